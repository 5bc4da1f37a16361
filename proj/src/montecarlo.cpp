#include "spatialcpl/montecarlo.hpp"

#include <algorithm>
#include <numeric>

#include "io_util.hpp"
#include "spatialcpl/error.hpp"
#include "spatialcpl/parallel.hpp"
#include "spatialcpl/rng.hpp"
#include "spatialcpl/sampling.hpp"

namespace spatialcpl {

namespace {
constexpr std::uint64_t kVoronoiStream = hash_tag("spacing/voronoi");
constexpr std::uint64_t kRandomStream = hash_tag("spacing/random");
constexpr std::uint64_t kCplStream = hash_tag("cpl/random-hierarchy");
}  // namespace

Significance classify_p_value(double p) {
  if (p < 0.01) return Significance::P01;
  if (p < 0.05) return Significance::P05;
  if (p < 0.1) return Significance::P10;
  return Significance::NotSignificant;
}

std::string_view to_string(Significance s) {
  switch (s) {
    case Significance::P01: return "p<0.01";
    case Significance::P05: return "0.01<=p<0.05";
    case Significance::P10: return "0.05<=p<0.1";
    case Significance::NotSignificant: return "p>=0.1";
  }
  return "p>=0.1";
}

std::string_view color_of(Significance s) {
  switch (s) {
    case Significance::P01: return "red";
    case Significance::P05: return "orange";
    case Significance::P10: return "yellow";
    case Significance::NotSignificant: return "linen";
  }
  return "linen";
}

SpacingTestResult spacing_out_test(const CitySet& cities, const DistanceMatrix& d, const SpacingOptions& opt) {
  const std::size_t n = cities.size();
  if (d.size() != n)
    fail(ErrorKind::Argument, "distance matrix has " + std::to_string(d.size()) + " rows for " + std::to_string(n) +
                                  " cities");
  if (opt.K < 1 || opt.K > n) fail(ErrorKind::Argument, "K = " + std::to_string(opt.K) + " outside [1, n]");
  if (opt.L < 1 || opt.L > n) fail(ErrorKind::Argument, "L = " + std::to_string(opt.L) + " outside [1, n]");
  if (opt.M < 1) fail(ErrorKind::Argument, "M must be at least 1");
  const std::size_t K = opt.K, L = opt.L, M = opt.M;

  SpacingTestResult res;
  res.K = K;
  res.L = L;
  res.M = M;
  res.seed = opt.seed;
  res.voronoi_counts.assign(M, 0);

  std::vector<CityId> all(n);
  std::iota(all.begin(), all.end(), CityId{0});
  // Cell sizes of each random Voronoi partition, flattened M x K.
  std::vector<std::size_t> sizes(M * K, 0);
  parallel_for(M, opt.threads, [&](std::size_t v) {
    Rng rng(derive_seed(opt.seed, {kVoronoiStream, K, L, v}));
    const auto centers = random_centers(n, K, rng);
    const auto cell = nearest_center(all, centers, d);
    std::size_t* sz = sizes.data() + v * K;
    for (std::size_t c : cell) ++sz[c];
    std::vector<unsigned char> seen(K, 0);
    res.voronoi_counts[v] = count_distinct(std::span(cell).first(L), seen);
  });
  const std::size_t observed_sum = std::accumulate(res.voronoi_counts.begin(), res.voronoi_counts.end(), std::size_t{0});

  std::vector<std::size_t> random_sums(M, 0);
  parallel_for(M, opt.threads, [&](std::size_t w) {
    Rng rng(derive_seed(opt.seed, {kRandomStream, K, L, w}));
    std::vector<std::size_t> remaining(K), labels(L);
    std::vector<unsigned char> seen(K, 0);
    std::size_t sum = 0;
    for (std::size_t v = 0; v < M; ++v) {
      const std::span<const std::size_t> sz(sizes.data() + v * K, K);
      if (opt.full_shuffle) {
        const auto all_labels = shuffle_assign(n, sz, false, rng);
        sum += count_distinct(std::span(all_labels).first(L), seen);
      } else {
        sample_leading_labels(sz, L, rng, remaining, labels);
        sum += count_distinct(labels, seen);
      }
    }
    random_sums[w] = sum;
  });

  res.mean_count_voronoi = static_cast<double>(observed_sum) / static_cast<double>(M);
  res.mean_counts_random.resize(M);
  res.M0 = 1;
  for (std::size_t w = 0; w < M; ++w) {
    res.mean_counts_random[w] = static_cast<double>(random_sums[w]) / static_cast<double>(M);
    if (random_sums[w] >= observed_sum) ++res.M0;
  }
  res.p0 = static_cast<double>(res.M0) / static_cast<double>(M + 1);
  res.significance = classify_p_value(res.p0);
  return res;
}

std::vector<SpacingTestResult> spacing_grid(const CitySet& cities, const DistanceMatrix& d,
                                            std::span<const std::size_t> K_list, std::span<const std::size_t> L_list,
                                            std::size_t M, std::uint64_t seed, unsigned threads, bool full_shuffle) {
  if (K_list.empty() || L_list.empty()) fail(ErrorKind::Argument, "K and L lists must be nonempty");
  std::vector<SpacingTestResult> out;
  out.reserve(K_list.size() * L_list.size());
  for (std::size_t K : K_list)
    for (std::size_t L : L_list) out.push_back(spacing_out_test(cities, d, {K, L, M, seed, threads, full_shuffle}));
  return out;
}

std::vector<RankSizeSample> hinterland_samples(const HierarchicalPartition& h, const CitySet& cities) {
  std::vector<RankSizeSample> out;
  std::vector<double> pops;
  for (const auto& hl : global_hinterlands(h)) {
    pops.clear();
    for (CityId c : hl.members) pops.push_back(cities[c].population);
    out.push_back(rank_sizes(pops, hl.center));
  }
  return out;
}

namespace {

CplFit fit_hierarchy(const HierarchicalPartition& h, const CitySet& cities, std::size_t min_subset_size) {
  const auto samples = hinterland_samples(h, cities);
  try {
    return fit_cpl(samples, {min_subset_size});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degeneracy) throw;
    fail(ErrorKind::Degeneracy, "L = " + std::to_string(h.L()) + ": " + e.what());
  }
}

}  // namespace

CplTestResult cpl_test_for_hierarchy(const HierarchicalPartition& observed, const HierarchicalPartition& tmpl,
                                     const CitySet& cities, const CplTestOptions& opt) {
  CplTestResult res;
  res.L = opt.L;
  res.N = opt.N;
  res.seed = opt.seed;
  const CplFit fit = fit_hierarchy(observed, cities, opt.min_subset_size);
  res.rmse_observed = fit.rmse;
  res.theta_hat = fit.theta;
  res.m = fit.m;
  res.excluded_subsets = fit.excluded_subsets;
  res.cell_count = observed.nodes().size();
  res.hinterland_count = fit.m + fit.excluded_subsets;
  res.depth = observed.depth();

  res.rmse_random.assign(opt.N, 0.0);
  parallel_for(opt.N, opt.threads, [&](std::size_t v) {
    Rng rng(derive_seed(opt.seed, {kCplStream, opt.L, v}));
    const auto random = build_random_hierarchy(tmpl, cities, rng);
    res.rmse_random[v] = fit_hierarchy(random, cities, opt.min_subset_size).rmse;
  });
  res.N_L = 1;
  for (double r : res.rmse_random)
    if (r <= res.rmse_observed) ++res.N_L;
  res.p_L = static_cast<double>(res.N_L) / static_cast<double>(opt.N + 1);
  res.significance = classify_p_value(res.p_L);
  return res;
}

CplTestResult spatial_cpl_test(const CitySet& cities, const DistanceMatrix& d, const CplTestOptions& opt) {
  if (opt.L < 2) fail(ErrorKind::Argument, "L must be at least 2");
  const auto spatial = build_spatial_hierarchy(cities, opt.L, d);
  return cpl_test_for_hierarchy(spatial, spatial, cities, opt);
}

std::vector<ThetaRow> theta_profile(std::span<const ThetaDataset> datasets, std::span<const std::size_t> L_list,
                                    std::size_t min_subset_size) {
  std::vector<ThetaRow> rows;
  for (const auto& ds : datasets) {
    for (std::size_t L : L_list) {
      const auto h = build_spatial_hierarchy(*ds.cities, L, *ds.distances);
      const CplFit fit = fit_hierarchy(h, *ds.cities, min_subset_size);
      rows.push_back({ds.name, L, fit.theta, fit.rmse, fit.m});
    }
  }
  return rows;
}

std::string theta_csv(std::span<const ThetaRow> rows) {
  std::string out = "dataset,L,theta,rmse,m\n";
  for (const auto& r : rows)
    out += r.dataset + ',' + std::to_string(r.L) + ',' + io::format_double(r.theta) + ',' + io::format_double(r.rmse) +
           ',' + std::to_string(r.m) + '\n';
  return out;
}

}  // namespace spatialcpl
