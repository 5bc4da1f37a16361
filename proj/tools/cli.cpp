#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spatialcpl/cities.hpp"
#include "spatialcpl/error.hpp"
#include "spatialcpl/geo.hpp"
#include "spatialcpl/grid.hpp"
#include "spatialcpl/montecarlo.hpp"
#include "spatialcpl/partition.hpp"
#include "spatialcpl/stats.hpp"
#include "spatialcpl/synth.hpp"

namespace spatialcpl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Format, "cannot open '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string digest_of_path(const fs::path& path) {
  if (!fs::is_directory(path)) return file_digest(path);
  // Road networks are directories of two CSV files.
  return file_digest(path / "nodes.csv") + "+" + file_digest(path / "edges.csv");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Format, "cannot write '" + path.string() + "'");
  out << text;
}

unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  return std::max(1u, std::thread::hardware_concurrency());
}

// Records everything needed to replay a command.
struct Manifest {
  std::string command;
  json config = json::object();
  std::vector<std::string> argv;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started_at = utc_now();

  void write(const fs::path& path) const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["tool"] = "spatialcpl";
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["config"] = config;
    j["argv"] = argv;
    j["inputs"] = json::array();
    for (const auto& in : inputs) j["inputs"].push_back({{"path", in}, {"digest", digest_of_path(in)}});
    j["outputs"] = outputs;
    j["started_at"] = started_at;
    j["finished_at"] = utc_now();
    write_text(path, j.dump(2) + "\n");
  }
};

// Collects the full effective configuration of a parsed subcommand.
void capture_config(const CLI::App& sub, Manifest& m) {
  m.command = sub.get_name();
  m.argv = {sub.get_name()};
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "--manifest") continue;
    const std::string name = opt->get_name();
    if (opt->get_expected_max() == 0) {
      const bool set = opt->count() > 0;
      m.config[name.substr(2)] = set;
      if (set) m.argv.push_back(name);
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      value = opt->results().back();
    } else {
      value = opt->get_default_str();
    }
    m.config[name.substr(2)] = value;
    if (!value.empty()) {
      m.argv.push_back(name);
      m.argv.push_back(value);
    }
  }
}

std::optional<fs::path> manifest_path(const std::string& flag, const std::string& primary_out) {
  if (flag == "none") return std::nullopt;
  if (!flag.empty()) return fs::path(flag);
  return fs::path(primary_out + ".manifest.json");
}

Connectivity parse_connectivity(int v) {
  if (v == 4) return Connectivity::Four;
  if (v == 8) return Connectivity::Eight;
  fail(ErrorKind::Argument, "connectivity must be 4 or 8");
}

json spacing_json(const SpacingTestResult& r, bool keep) {
  json j{{"K", r.K},
         {"L", r.L},
         {"M", r.M},
         {"seed", r.seed},
         {"mean_count_voronoi", r.mean_count_voronoi},
         {"M0", r.M0},
         {"p0", r.p0},
         {"class", std::string(to_string(r.significance))},
         {"color", std::string(color_of(r.significance))}};
  double avg = 0.0;
  for (double v : r.mean_counts_random) avg += v;
  j["mean_of_random_mean_counts"] = avg / static_cast<double>(r.mean_counts_random.size());
  if (keep) {
    j["voronoi_counts"] = r.voronoi_counts;
    j["mean_counts_random"] = r.mean_counts_random;
  }
  return j;
}

json cpl_json(const CplTestResult& r, bool keep) {
  json j{{"L", r.L},
         {"N", r.N},
         {"seed", r.seed},
         {"rmse_observed", r.rmse_observed},
         {"N_L", r.N_L},
         {"p_L", r.p_L},
         {"theta_hat", r.theta_hat},
         {"m", r.m},
         {"excluded_subsets", r.excluded_subsets},
         {"cell_count", r.cell_count},
         {"hinterland_count", r.hinterland_count},
         {"depth", r.depth},
         {"class", std::string(to_string(r.significance))},
         {"color", std::string(color_of(r.significance))}};
  if (keep) j["rmse_random"] = r.rmse_random;
  return j;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::vector<std::size_t> parse_range(const std::string& text) {
  std::vector<std::size_t> out;
  auto to_count = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty() || v < 0) fail(ErrorKind::Argument, "bad range value '" + s + "' in '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_count(item));
  } else {
    const std::string lo = text.substr(0, dots);
    std::string rest = text.substr(dots + 2);
    std::size_t step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = to_count(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const std::size_t a = to_count(lo), b = to_count(rest);
    if (step == 0 || a > b) fail(ErrorKind::Argument, "empty range '" + text + "'");
    for (std::size_t v = a; v <= b; v += step) out.push_back(v);
  }
  if (out.empty()) fail(ErrorKind::Argument, "empty range '" + text + "'");
  return out;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Spatial city-size analysis: city extraction, road distances, spacing-out and spatial CPL tests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.option_defaults()->always_capture_default();

  std::string manifest_flag;
  int threads_flag = 0;

  // extract
  auto* extract = app.add_subcommand("extract", "Extract cities from a population raster");
  std::string grid_path, grid_format = "esri-ascii", out_path;
  double density_min = 1000.0, pop_min = 10000.0;
  int connectivity = 4;
  extract->add_option("--grid", grid_path, "Population raster")->required();
  extract->add_option("--format", grid_format, "esri-ascii | packed-binary");
  extract->add_option("--density-min", density_min, "Minimum cell density (persons/km^2)");
  extract->add_option("--pop-min", pop_min, "Minimum city population");
  extract->add_option("--connectivity", connectivity, "4 or 8 neighbor contiguity");
  extract->add_option("--out", out_path, "Cities CSV")->required();
  extract->add_option("--manifest", manifest_flag, "Manifest path (default <out>.manifest.json, 'none' to skip)");

  // distances
  auto* distances = app.add_subcommand("distances", "Build the inter-city distance matrix (CDM1)");
  std::string cities_path, network_path, mode = "greatcircle";
  double snap_radius_km = 20.0;
  distances->add_option("--cities", cities_path, "Cities CSV")->required();
  distances->add_option("--network", network_path, "Directory with nodes.csv and edges.csv");
  distances->add_option("--mode", mode, "road | greatcircle");
  distances->add_option("--snap-radius-km", snap_radius_km, "Maximum city-to-node snap distance");
  distances->add_option("--out", out_path, "CDM1 matrix")->required();
  distances->add_option("--threads", threads_flag, "Worker threads (0 = all cores)");
  distances->add_option("--manifest", manifest_flag, "Manifest path");

  // spacing
  auto* spacing = app.add_subcommand("spacing", "Spacing-out test over a K x L grid");
  std::string dist_path, K_range = "5..50:5", L_range = "2..10";
  std::size_t M = 1000;
  std::uint64_t seed = 1;
  bool keep_samples = false, full_shuffle = false;
  std::string csv_path;
  spacing->add_option("--cities", cities_path, "Cities CSV")->required();
  spacing->add_option("--distances", dist_path, "Distance matrix (CDM1 or CSV)")->required();
  spacing->add_option("--K", K_range, "Voronoi cell counts, a..b[:step] or list");
  spacing->add_option("--L", L_range, "Largest-city counts, a..b[:step] or list");
  spacing->add_option("--M", M, "Replicates");
  spacing->add_option("--seed", seed, "Master seed");
  spacing->add_option("--threads", threads_flag, "Worker threads (0 = all cores)");
  spacing->add_flag("--keep-samples", keep_samples, "Store all replicate statistics in the report");
  spacing->add_flag("--full-shuffle", full_shuffle, "Shuffle all cities per counterfactual (verification mode)");
  spacing->add_option("--out", out_path, "JSON report")->required();
  spacing->add_option("--csv", csv_path, "CSV summary (default <out>.csv)");
  spacing->add_option("--manifest", manifest_flag, "Manifest path");

  // cpl
  auto* cpl = app.add_subcommand("cpl", "Spatial CPL test for a range of L");
  std::string cpl_L = "2..6", theta_path;
  std::size_t N = 1000, min_subset = 2;
  cpl->add_option("--cities", cities_path, "Cities CSV")->required();
  cpl->add_option("--distances", dist_path, "Distance matrix")->required();
  cpl->add_option("--L", cpl_L, "Branching counts, a..b[:step] or list");
  cpl->add_option("--N", N, "Random hierarchies per L");
  cpl->add_option("--min-subset-size", min_subset, "Smallest hinterland entering the regression");
  cpl->add_option("--seed", seed, "Master seed");
  cpl->add_option("--threads", threads_flag, "Worker threads (0 = all cores)");
  cpl->add_flag("--keep-samples", keep_samples, "Store all random RMSE values");
  cpl->add_option("--out", out_path, "JSON report")->required();
  cpl->add_option("--theta-out", theta_path, "Theta profile CSV (default <out>.theta.csv)");
  cpl->add_option("--manifest", manifest_flag, "Manifest path");

  // ranksize
  auto* ranksize = app.add_subcommand("ranksize", "Rank-size data of every global hinterland with fitted lines");
  std::size_t rs_L = 3;
  std::string hierarchy_out;
  ranksize->add_option("--cities", cities_path, "Cities CSV")->required();
  ranksize->add_option("--distances", dist_path, "Distance matrix")->required();
  ranksize->add_option("--L", rs_L, "Branching count");
  ranksize->add_option("--min-subset-size", min_subset, "Smallest hinterland entering the regression");
  ranksize->add_option("--out", out_path, "Rank-size CSV")->required();
  ranksize->add_option("--hierarchy-out", hierarchy_out, "Optional hierarchy JSON export");
  ranksize->add_option("--manifest", manifest_flag, "Manifest path");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic city system");
  std::string model = "hierarchical", dist_out;
  SynthSpec spec;
  SpacedSpec spaced;
  std::size_t spaced_L = 5;
  synth->add_option("--model", model, "iid | hierarchical | spaced | spaced-null");
  synth->add_option("--n", spec.n, "City count (iid, spaced)");
  synth->add_option("--L-gen", spec.L_gen, "Branching of the generator (hierarchical)");
  synth->add_option("--depth", spec.depth, "Generator depth (hierarchical)");
  synth->add_option("--satellites", spec.satellites, "Satellites per final center (hierarchical)");
  synth->add_option("--spacing-km", spec.spacing_km, "Separation of layer-2 centers (hierarchical)");
  synth->add_option("--spacing-ratio", spec.spacing_ratio, "Spacing shrink per layer (hierarchical)");
  double cluster_radius = -1.0;  // negative: the model's own default
  synth->add_option("--cluster-radius-km", cluster_radius, "Cluster radius; negative = model default (10 hierarchical, 60 spaced)");
  synth->add_option("--noise-sigma", spec.size_noise_sigma, "Lognormal size jitter (hierarchical)");
  synth->add_option("--large", spaced_L, "Number of large hub cities (spaced)");
  synth->add_option("--alpha", spec.alpha_gen, "Pareto / Zipf exponent");
  synth->add_option("--min-size", spec.min_size, "Smallest city size");
  synth->add_option("--extent-km", spec.extent_km, "Domain side length");
  synth->add_option("--seed", spec.seed, "Seed");
  synth->add_option("--out", out_path, "Cities CSV")->required();
  synth->add_option("--distances-out", dist_out, "CDM1 matrix")->required();
  synth->add_option("--manifest", manifest_flag, "Manifest path");

  // rerun
  auto* rerun = app.add_subcommand("rerun", "Replay a command from its manifest");
  std::string rerun_manifest;
  int rerun_threads = -1;
  rerun->add_option("manifest", rerun_manifest, "Manifest JSON")->required();
  rerun->add_option("--threads", rerun_threads, "Override the thread count (results do not depend on it)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Manifest manifest;
    if (rerun->parsed()) {
      std::ifstream in(rerun_manifest);
      if (!in) fail(ErrorKind::Format, "cannot open manifest '" + rerun_manifest + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        fail(ErrorKind::Format, std::string("manifest is not valid JSON: ") + e.what());
      }
      for (const auto& input : j.at("inputs")) {
        if (digest_of_path(input.at("path").get<std::string>()) != input.at("digest").get<std::string>())
          fail(ErrorKind::Data, "input '" + input.at("path").get<std::string>() + "' changed since the manifest was written");
      }
      auto replay = j.at("argv").get<std::vector<std::string>>();
      if (rerun_threads >= 0) {
        bool replaced = false;
        for (std::size_t i = 0; i + 1 < replay.size(); ++i)
          if (replay[i] == "--threads") {
            replay[i + 1] = std::to_string(rerun_threads);
            replaced = true;
          }
        if (!replaced && (replay[0] == "spacing" || replay[0] == "cpl" || replay[0] == "distances")) {
          replay.push_back("--threads");
          replay.push_back(std::to_string(rerun_threads));
        }
      }
      replay.push_back("--manifest");
      replay.push_back("none");
      return run(replay);
    }

    if (extract->parsed()) {
      capture_config(*extract, manifest);
      ExtractOptions opts{density_min, pop_min, parse_connectivity(connectivity)};
      const auto grid = load_population_grid(grid_path, parse_grid_format(grid_format));
      const auto cities = extract_cities(grid, opts);
      write_text(out_path, cities_csv(cities));
      manifest.inputs = {grid_path};
      manifest.outputs = {out_path};
      if (auto mp = manifest_path(manifest_flag, out_path)) manifest.write(*mp);
      std::cerr << "extracted " << cities.size() << " cities\n";
      return 0;
    }

    if (distances->parsed()) {
      capture_config(*distances, manifest);
      const auto cities = load_cities_csv(cities_path);
      DistanceBuildOptions opts{snap_radius_km, resolve_threads(threads_flag)};
      DistanceBuild built;
      if (mode == "road") {
        if (network_path.empty()) fail(ErrorKind::Argument, "--mode road requires --network");
        const auto net = load_road_network(network_path);
        built = build_distance_matrix(cities, &net, opts);
        manifest.inputs = {cities_path, network_path};
      } else if (mode == "greatcircle") {
        built = build_distance_matrix(cities, nullptr, opts);
        manifest.inputs = {cities_path};
      } else {
        fail(ErrorKind::Argument, "--mode must be road or greatcircle");
      }
      write_distance_matrix(built.matrix, out_path);
      std::string report = "city_id,node_id,snap_distance_m\n";
      for (const auto& s : built.snaps)
        report += std::to_string(s.city_id) + ',' + std::to_string(s.node) + ',' + fmt(s.snap_distance_m) + '\n';
      const std::string snap_path = out_path + ".snap.csv";
      write_text(snap_path, report);
      manifest.outputs = {out_path, snap_path};
      if (auto mp = manifest_path(manifest_flag, out_path)) manifest.write(*mp);
      if (const auto u = built.matrix.unreachable_pairs())
        std::cerr << "warning: " << u << " unreachable city pairs (stored as +inf)\n";
      return 0;
    }

    if (spacing->parsed()) {
      capture_config(*spacing, manifest);
      const auto cities = load_cities_csv(cities_path);
      const auto d = load_distance_matrix(dist_path);
      const auto Ks = parse_range(K_range);
      const auto Ls = parse_range(L_range);
      const auto results = spacing_grid(cities, d, Ks, Ls, M, seed, resolve_threads(threads_flag), full_shuffle);
      json report{{"schema_version", kSchemaVersion},
                  {"test", "spacing-out"},
                  {"inputs", {{"cities", cities_path}, {"distances", dist_path}}},
                  {"n", cities.size()},
                  {"M", M},
                  {"seed", seed},
                  {"sampling", full_shuffle ? "full-shuffle" : "leading-labels"},
                  {"results", json::array()}};
      std::string csv = "K,L,mean_count_voronoi,mean_of_random_mean_counts,M0,p0,class,color\n";
      for (const auto& r : results) {
        const json j = spacing_json(r, keep_samples);
        report["results"].push_back(j);
        csv += std::to_string(r.K) + ',' + std::to_string(r.L) + ',' + fmt(r.mean_count_voronoi) + ',' +
               fmt(j["mean_of_random_mean_counts"].get<double>()) + ',' + std::to_string(r.M0) + ',' + fmt(r.p0) +
               ',' + std::string(to_string(r.significance)) + ',' + std::string(color_of(r.significance)) + '\n';
      }
      if (csv_path.empty()) csv_path = out_path + ".csv";
      write_text(out_path, report.dump(2) + "\n");
      write_text(csv_path, csv);
      manifest.inputs = {cities_path, dist_path};
      manifest.outputs = {out_path, csv_path};
      if (auto mp = manifest_path(manifest_flag, out_path)) manifest.write(*mp);
      return 0;
    }

    if (cpl->parsed()) {
      capture_config(*cpl, manifest);
      const auto cities = load_cities_csv(cities_path);
      const auto d = load_distance_matrix(dist_path);
      const auto Ls = parse_range(cpl_L);
      json report{{"schema_version", kSchemaVersion},
                  {"test", "spatial-cpl"},
                  {"inputs", {{"cities", cities_path}, {"distances", dist_path}}},
                  {"n", cities.size()},
                  {"N", N},
                  {"seed", seed},
                  {"min_subset_size", min_subset},
                  {"results", json::array()}};
      std::vector<ThetaRow> rows;
      const std::string dataset = fs::path(cities_path).stem().string();
      for (std::size_t L : Ls) {
        const auto r = spatial_cpl_test(cities, d, {L, N, min_subset, seed, resolve_threads(threads_flag)});
        report["results"].push_back(cpl_json(r, keep_samples));
        rows.push_back({dataset, L, r.theta_hat, r.rmse_observed, r.m});
      }
      if (theta_path.empty()) theta_path = out_path + ".theta.csv";
      write_text(out_path, report.dump(2) + "\n");
      write_text(theta_path, theta_csv(rows));
      manifest.inputs = {cities_path, dist_path};
      manifest.outputs = {out_path, theta_path};
      if (auto mp = manifest_path(manifest_flag, out_path)) manifest.write(*mp);
      return 0;
    }

    if (ranksize->parsed()) {
      capture_config(*ranksize, manifest);
      const auto cities = load_cities_csv(cities_path);
      const auto d = load_distance_matrix(dist_path);
      const auto h = build_spatial_hierarchy(cities, rs_L, d);
      const auto samples = hinterland_samples(h, cities);
      const auto fit = fit_cpl(samples, {min_subset});
      write_text(out_path, rank_size_csv(samples, fit));
      manifest.inputs = {cities_path, dist_path};
      manifest.outputs = {out_path};
      if (!hierarchy_out.empty()) {
        write_text(hierarchy_out, hierarchy_json(h) + "\n");
        manifest.outputs.push_back(hierarchy_out);
      }
      if (auto mp = manifest_path(manifest_flag, out_path)) manifest.write(*mp);
      std::cerr << "theta=" << fmt(fit.theta) << " rmse=" << fmt(fit.rmse) << " subsets=" << fit.m << " (excluded "
                << fit.excluded_subsets << ")\n";
      return 0;
    }

    if (synth->parsed()) {
      capture_config(*synth, manifest);
      SynthSystem sys;
      if (model == "iid") {
        spec.model = SynthModel::IidZipf;
        sys = gen_iid_system(spec);
      } else if (model == "hierarchical") {
        spec.model = SynthModel::Hierarchical;
        if (cluster_radius >= 0.0) spec.cluster_radius_km = cluster_radius;
        sys = gen_hierarchical_system(spec);
      } else if (model == "spaced" || model == "spaced-null") {
        spaced.n = spec.n;
        spaced.L = spaced_L;
        spaced.extent_km = spec.extent_km;
        spaced.alpha_gen = spec.alpha_gen;
        spaced.min_size = spec.min_size;
        spaced.seed = spec.seed;
        if (cluster_radius >= 0.0) spaced.cluster_radius_km = cluster_radius;
        spaced.relocate_largest = model == "spaced-null";
        sys = gen_spaced_system(spaced);
      } else {
        fail(ErrorKind::Argument, "unknown model '" + model + "'");
      }
      write_text(out_path, cities_csv(sys.cities));
      write_distance_matrix(sys.distances, dist_out);
      manifest.outputs = {out_path, dist_out};
      if (auto mp = manifest_path(manifest_flag, out_path)) manifest.write(*mp);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace spatialcpl::cli
