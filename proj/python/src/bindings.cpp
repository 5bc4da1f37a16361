#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cli.hpp"
#include "spatialcpl/cities.hpp"
#include "spatialcpl/distance_matrix.hpp"
#include "spatialcpl/error.hpp"
#include "spatialcpl/geo.hpp"
#include "spatialcpl/grid.hpp"
#include "spatialcpl/montecarlo.hpp"
#include "spatialcpl/partition.hpp"
#include "spatialcpl/road_network.hpp"
#include "spatialcpl/stats.hpp"
#include "spatialcpl/synth.hpp"

namespace py = pybind11;
using namespace spatialcpl;

namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Index: return "index";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Format: return "format";
    case ErrorKind::Data: return "data";
    case ErrorKind::Reference: return "reference";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::Degeneracy: return "degeneracy";
    case ErrorKind::Connectivity: return "connectivity";
    case ErrorKind::Snapping: return "snapping";
    case ErrorKind::Geometry: return "geometry";
  }
  return "unknown";
}

py::dict gi_dict(const GiFit& f) {
  py::dict d;
  d["theta"] = f.theta;
  d["b"] = f.b;
  d["alpha"] = f.alpha();
  d["c"] = f.c();
  d["rmse"] = f.rmse;
  d["n"] = f.n;
  d["residuals"] = f.residuals;
  return d;
}

py::dict cpl_dict(const CplFit& f) {
  py::dict d;
  d["theta"] = f.theta;
  d["b1"] = f.b1;
  d["betas"] = f.betas;
  d["rmse"] = f.rmse;
  d["m"] = f.m;
  d["observations"] = f.observations;
  d["excluded_subsets"] = f.excluded_subsets;
  d["subset_ids"] = f.subset_ids;
  return d;
}

py::dict spacing_dict(const SpacingTestResult& r) {
  py::dict d;
  d["K"] = r.K;
  d["L"] = r.L;
  d["M"] = r.M;
  d["seed"] = r.seed;
  d["voronoi_counts"] = r.voronoi_counts;
  d["mean_count_voronoi"] = r.mean_count_voronoi;
  d["mean_counts_random"] = r.mean_counts_random;
  d["M0"] = r.M0;
  d["p0"] = r.p0;
  d["significance"] = std::string(to_string(r.significance));
  d["color"] = std::string(color_of(r.significance));
  return d;
}

py::dict cpl_test_dict(const CplTestResult& r) {
  py::dict d;
  d["L"] = r.L;
  d["N"] = r.N;
  d["seed"] = r.seed;
  d["rmse_observed"] = r.rmse_observed;
  d["rmse_random"] = r.rmse_random;
  d["N_L"] = r.N_L;
  d["p_L"] = r.p_L;
  d["theta_hat"] = r.theta_hat;
  d["m"] = r.m;
  d["excluded_subsets"] = r.excluded_subsets;
  d["cell_count"] = r.cell_count;
  d["hinterland_count"] = r.hinterland_count;
  d["depth"] = r.depth;
  d["significance"] = std::string(to_string(r.significance));
  return d;
}

std::vector<RankSizeSample> samples_from(const std::vector<std::vector<double>>& subsets) {
  std::vector<RankSizeSample> out;
  for (std::size_t j = 0; j < subsets.size(); ++j) out.push_back(rank_sizes(subsets[j], j));
  return out;
}

py::tuple system_tuple(SynthSystem sys) {
  return py::make_tuple(std::move(sys.cities), std::move(sys.distances), std::move(sys.xy_km));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "City extraction, road distances, spacing-out and spatial CPL tests";
  m.attr("__version__") = cli::kToolVersion;

  // Leaked on purpose: the type must outlive the module's translators.
  static PyObject* error_type = py::exception<Error>(m, "Error", PyExc_RuntimeError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("kind") = kind_name(e.kind());
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<City>(m, "City")
      .def_readonly("id", &City::id)
      .def_readonly("population", &City::population)
      .def_readonly("n_cells", &City::n_cells)
      .def_readonly("center_lat", &City::center_lat)
      .def_readonly("center_lon", &City::center_lon)
      .def_property_readonly("center", [](const City& c) { return py::make_tuple(c.center.row, c.center.col); })
      .def("__repr__", [](const City& c) {
        return "<City " + std::to_string(c.id) + " population=" + std::to_string(c.population) + ">";
      });

  py::class_<CitySet>(m, "CitySet")
      .def("__len__", &CitySet::size)
      .def("__getitem__", [](const CitySet& s, std::size_t i) {
        if (i >= s.size()) throw py::index_error();
        return s[i];
      })
      .def("populations", &CitySet::populations)
      .def("to_csv", [](const CitySet& s) { return cities_csv(s); })
      .def("write_csv", [](const CitySet& s, const std::filesystem::path& p) { write_cities_csv(s, p); });

  py::class_<DistanceMatrix>(m, "DistanceMatrix")
      .def(py::init([](const std::vector<std::vector<double>>& rows) {
             std::vector<double> v;
             for (const auto& r : rows) {
               if (r.size() != rows.size()) fail(ErrorKind::Argument, "distance matrix must be square");
               v.insert(v.end(), r.begin(), r.end());
             }
             return DistanceMatrix(rows.size(), std::move(v), DistanceProvider::Loaded);
           }),
           py::arg("rows"))
      .def("__len__", &DistanceMatrix::size)
      .def("__call__", [](const DistanceMatrix& d, std::size_t i, std::size_t j) {
        if (i >= d.size() || j >= d.size()) throw py::index_error();
        return d(i, j);
      })
      .def("tolist", [](const DistanceMatrix& d) {
        std::vector<std::vector<double>> rows(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) rows[i].assign(d.row(i), d.row(i) + d.size());
        return rows;
      })
      .def("write", [](const DistanceMatrix& d, const std::filesystem::path& p) { write_distance_matrix(d, p); });

  m.def("load_cities_csv", &load_cities_csv, py::arg("path"));
  m.def("load_distance_matrix", &load_distance_matrix, py::arg("path"));
  m.def(
      "extract_cities",
      [](const std::filesystem::path& grid, const std::string& format, double density_min, double pop_min, int connectivity) {
        if (connectivity != 4 && connectivity != 8) fail(ErrorKind::Argument, "connectivity must be 4 or 8");
        const auto g = load_population_grid(grid, parse_grid_format(format));
        return extract_cities(g, {density_min, pop_min, connectivity == 8 ? Connectivity::Eight : Connectivity::Four});
      },
      py::arg("grid"), py::arg("format") = "esri-ascii", py::arg("density_min") = 1000.0, py::arg("pop_min") = 10000.0,
      py::arg("connectivity") = 4);
  m.def("great_circle_m", [](double lat1, double lon1, double lat2, double lon2) {
    return great_circle_m({lat1, lon1}, {lat2, lon2});
  });
  m.def(
      "build_distance_matrix",
      [](const CitySet& cities, std::optional<std::filesystem::path> network, double snap_radius_km, unsigned threads) {
        if (!network) return build_distance_matrix(cities, nullptr, {snap_radius_km, threads}).matrix;
        const auto net = load_road_network(*network);
        return build_distance_matrix(cities, &net, {snap_radius_km, threads}).matrix;
      },
      py::arg("cities"), py::arg("network") = py::none(), py::arg("snap_radius_km") = 20.0, py::arg("threads") = 1);

  m.def("fit_gi", [](const std::vector<double>& sizes) { return gi_dict(fit_gi(rank_sizes(sizes))); }, py::arg("sizes"));
  m.def(
      "fit_cpl",
      [](const std::vector<std::vector<double>>& subsets, std::size_t min_subset_size) {
        return cpl_dict(fit_cpl(samples_from(subsets), {min_subset_size}));
      },
      py::arg("subsets"), py::arg("min_subset_size") = 2);

  m.def(
      "voronoi_partition",
      [](const CitySet& cities, const std::vector<CityId>& centers, const DistanceMatrix& d) {
        return voronoi_partition(cities, centers, d).cell_of;
      },
      py::arg("cities"), py::arg("centers"), py::arg("distances"));
  m.def(
      "spatial_hierarchy_json",
      [](const CitySet& cities, std::size_t L, const DistanceMatrix& d) {
        return hierarchy_json(build_spatial_hierarchy(cities, L, d));
      },
      py::arg("cities"), py::arg("L"), py::arg("distances"));
  m.def(
      "global_hinterlands",
      [](const CitySet& cities, std::size_t L, const DistanceMatrix& d) {
        py::list out;
        for (const auto& h : global_hinterlands(build_spatial_hierarchy(cities, L, d))) {
          py::dict e;
          e["center"] = h.center;
          e["layer"] = h.layer;
          e["members"] = h.members;
          out.append(e);
        }
        return out;
      },
      py::arg("cities"), py::arg("L"), py::arg("distances"));

  m.def(
      "spacing_out_test",
      [](const CitySet& c, const DistanceMatrix& d, std::size_t K, std::size_t L, std::size_t M, std::uint64_t seed,
         unsigned threads, bool full_shuffle) {
        SpacingTestResult r;
        {
          py::gil_scoped_release release;
          r = spacing_out_test(c, d, {K, L, M, seed, threads, full_shuffle});
        }
        return spacing_dict(r);
      },
      py::arg("cities"), py::arg("distances"), py::arg("K"), py::arg("L"), py::arg("M") = 1000, py::arg("seed") = 1,
      py::arg("threads") = 1, py::arg("full_shuffle") = false);
  m.def(
      "spatial_cpl_test",
      [](const CitySet& c, const DistanceMatrix& d, std::size_t L, std::size_t N, std::size_t min_subset_size,
         std::uint64_t seed, unsigned threads) {
        CplTestResult r;
        {
          py::gil_scoped_release release;
          r = spatial_cpl_test(c, d, {L, N, min_subset_size, seed, threads});
        }
        return cpl_test_dict(r);
      },
      py::arg("cities"), py::arg("distances"), py::arg("L") = 3, py::arg("N") = 1000, py::arg("min_subset_size") = 2,
      py::arg("seed") = 1, py::arg("threads") = 1);

  m.def(
      "gen_iid_system",
      [](std::size_t n, double alpha, double min_size, double extent_km, std::uint64_t seed) {
        SynthSpec s;
        s.model = SynthModel::IidZipf;
        s.n = n;
        s.alpha_gen = alpha;
        s.min_size = min_size;
        s.extent_km = extent_km;
        s.seed = seed;
        return system_tuple(gen_iid_system(s));
      },
      py::arg("n") = 100, py::arg("alpha") = 1.0, py::arg("min_size") = 10000.0, py::arg("extent_km") = 1000.0,
      py::arg("seed") = 0);
  m.def(
      "gen_hierarchical_system",
      [](std::size_t L_gen, std::size_t depth, std::size_t satellites, double spacing_km, double spacing_ratio,
         double cluster_radius_km, double noise_sigma, double alpha, double min_size, std::uint64_t seed) {
        SynthSpec s;
        s.model = SynthModel::Hierarchical;
        s.L_gen = L_gen;
        s.depth = depth;
        s.satellites = satellites;
        s.spacing_km = spacing_km;
        s.spacing_ratio = spacing_ratio;
        s.cluster_radius_km = cluster_radius_km;
        s.size_noise_sigma = noise_sigma;
        s.alpha_gen = alpha;
        s.min_size = min_size;
        s.seed = seed;
        return system_tuple(gen_hierarchical_system(s));
      },
      py::arg("L_gen") = 3, py::arg("depth") = 4, py::arg("satellites") = 8, py::arg("spacing_km") = 300.0,
      py::arg("spacing_ratio") = 0.3, py::arg("cluster_radius_km") = 10.0, py::arg("noise_sigma") = 0.0,
      py::arg("alpha") = 1.0, py::arg("min_size") = 10000.0, py::arg("seed") = 0);
  m.def(
      "gen_spaced_system",
      [](std::size_t n, std::size_t L, double cluster_radius_km, bool relocate_largest, std::uint64_t seed) {
        SpacedSpec s;
        s.n = n;
        s.L = L;
        s.cluster_radius_km = cluster_radius_km;
        s.relocate_largest = relocate_largest;
        s.seed = seed;
        return system_tuple(gen_spaced_system(s));
      },
      py::arg("n") = 200, py::arg("L") = 5, py::arg("cluster_radius_km") = 60.0, py::arg("relocate_largest") = false,
      py::arg("seed") = 0);

  m.def(
      "run_cli", [](const std::vector<std::string>& args) { return cli::run(args); }, py::arg("args"),
      "Runs the command-line tool in-process and returns its exit code.");
}
