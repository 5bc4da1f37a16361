#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "oracles.hpp"
#include "spatialcpl/montecarlo.hpp"
#include "spatialcpl/sampling.hpp"
#include "spatialcpl/synth.hpp"
#include "test_util.hpp"

using namespace spatialcpl;
using testutil::error_kind;

namespace {

CitySet zipf_cities(std::size_t n, double noise_sigma = 0.0, std::uint64_t seed = 0) {
  Rng rng(seed);
  std::vector<City> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i].population = 1e6 / (static_cast<double>(i + 1) - 0.5);
    if (noise_sigma > 0) raw[i].population *= std::exp(noise_sigma * rng.normal());
    raw[i].n_cells = 1;
    raw[i].center = {i, 0};
  }
  return CitySet::from_unsorted(raw);
}

// City 0 is nearer to every city than any other city is: each split peels
// off L - 1 singletons, so the root's hinterland is the only one that enters
// the regression.
DistanceMatrix star(std::size_t n) {
  std::vector<double> v(n * n, 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    v[i * n + i] = 0.0;
    if (i) v[i * n] = v[i] = 1.0;
  }
  return DistanceMatrix(n, std::move(v), DistanceProvider::Loaded);
}

SynthSystem random_system(std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.seed = seed;
  return gen_iid_system(spec);
}

}  // namespace

TEST_CASE("significance bands") {
  CHECK(classify_p_value(0.001) == Significance::P01);
  CHECK(classify_p_value(0.01) == Significance::P05);
  CHECK(classify_p_value(0.0499) == Significance::P05);
  CHECK(classify_p_value(0.05) == Significance::P10);
  CHECK(classify_p_value(0.1) == Significance::NotSignificant);
  CHECK(color_of(Significance::P01) == "red");
  CHECK(color_of(Significance::P05) == "orange");
  CHECK(color_of(Significance::P10) == "yellow");
  CHECK(color_of(Significance::NotSignificant) == "linen");
}

TEST_CASE("spacing: leading-label shortcut has the full-shuffle count law (exhaustive, n <= 8)") {
  const std::vector<std::vector<std::size_t>> size_sets{{1, 1}, {2, 1}, {3, 2, 1}, {2, 2, 2}, {4, 1, 1, 1}, {3, 3, 2}, {1, 1, 1, 1, 1, 1, 1, 1}};
  for (const auto& sizes : size_sets) {
    const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    for (std::size_t L = 1; L <= std::min<std::size_t>(n, 4); ++L) {
      std::vector<unsigned char> seen(sizes.size(), 0);
      std::map<std::size_t, std::size_t> full, fast;
      oracle::enumerate_draws([&](auto& draw) {
        const auto labels = shuffle_assign(n, sizes, false, draw);
        full[count_distinct(std::span(labels).first(L), seen)]++;
      });
      std::vector<std::size_t> remaining(sizes.size()), out(L);
      oracle::enumerate_draws([&](auto& draw) {
        sample_leading_labels(sizes, L, draw, remaining, out);
        fast[count_distinct(out, seen)]++;
      });
      std::size_t fact = 1;
      for (std::size_t k = 2; k <= n - L; ++k) fact *= k;
      // the shortcut's draw sequences are n!/(n-L)! equally likely outcomes
      // over the slots, the shuffle's are n!
      REQUIRE(full.size() == fast.size());
      for (auto [count, ways] : fast) CHECK(full[count] == ways * fact);
    }
  }
}

TEST_CASE("spacing: L = 1 and K = n are degenerate with p0 = 1") {
  const auto sys = random_system(30, 3);
  auto r1 = spacing_out_test(sys.cities, sys.distances, {5, 1, 50, 9});
  CHECK(r1.mean_count_voronoi == 1.0);
  for (double m : r1.mean_counts_random) CHECK(m == 1.0);
  CHECK(r1.M0 == 51);
  CHECK(r1.p0 == 1.0);
  auto rn = spacing_out_test(sys.cities, sys.distances, {30, 4, 50, 9});
  CHECK(rn.mean_count_voronoi == 4.0);
  for (double m : rn.mean_counts_random) CHECK(m == 4.0);
  CHECK(rn.p0 == 1.0);
  CHECK(rn.significance == Significance::NotSignificant);
}

TEST_CASE("spacing: argument errors") {
  const auto sys = random_system(10, 3);
  CHECK(error_kind([&] { spacing_out_test(sys.cities, sys.distances, {11, 2, 10, 0}); }) == ErrorKind::Argument);
  CHECK(error_kind([&] { spacing_out_test(sys.cities, sys.distances, {3, 11, 10, 0}); }) == ErrorKind::Argument);
  CHECK(error_kind([&] { spacing_out_test(sys.cities, sys.distances, {0, 2, 10, 0}); }) == ErrorKind::Argument);
  CHECK(error_kind([&] { spacing_out_test(sys.cities, sys.distances, {3, 0, 10, 0}); }) == ErrorKind::Argument);
  CHECK(error_kind([&] { spacing_out_test(sys.cities, sys.distances, {3, 2, 0, 0}); }) == ErrorKind::Argument);
}

TEST_CASE("spacing: bounds, determinism and thread invariance") {
  const auto sys = random_system(80, 4);
  SpacingOptions o{8, 5, 100, 77};
  const auto a = spacing_out_test(sys.cities, sys.distances, o);
  o.threads = 4;
  const auto b = spacing_out_test(sys.cities, sys.distances, o);
  CHECK(a.voronoi_counts == b.voronoi_counts);
  CHECK(a.mean_counts_random == b.mean_counts_random);
  CHECK(a.p0 == b.p0);
  CHECK(a.voronoi_counts.size() == 100);
  CHECK(a.mean_counts_random.size() == 100);
  for (auto c : a.voronoi_counts) CHECK((c >= 1 && c <= 5));
  for (double m : a.mean_counts_random) CHECK((m >= 1.0 && m <= 5.0));
  CHECK(a.p0 >= 1.0 / 101.0);
  CHECK(a.p0 <= 1.0);
  CHECK(a.p0 == static_cast<double>(a.M0) / 101.0);
  CHECK(a.significance == classify_p_value(a.p0));
  // M0 recount
  const double obs = a.mean_count_voronoi;
  std::size_t m0 = 1;
  for (double m : a.mean_counts_random) m0 += m >= obs - 1e-12;
  CHECK(a.M0 == m0);
}

TEST_CASE("spacing: full-shuffle mode agrees with the shortcut in distribution") {
  const auto sys = random_system(60, 5);
  SpacingOptions o{6, 4, 400, 5};
  const auto fast = spacing_out_test(sys.cities, sys.distances, o);
  o.full_shuffle = true;
  const auto full = spacing_out_test(sys.cities, sys.distances, o);
  CHECK(full.voronoi_counts == fast.voronoi_counts);
  const double mf = std::accumulate(fast.mean_counts_random.begin(), fast.mean_counts_random.end(), 0.0) / 400.0;
  const double ms = std::accumulate(full.mean_counts_random.begin(), full.mean_counts_random.end(), 0.0) / 400.0;
  CHECK(std::abs(mf - ms) < 0.02);
}

TEST_CASE("spacing: spaced system is significant, relocated null is not forced") {
  SpacedSpec spec;
  spec.seed = 12;
  const auto sys = gen_spaced_system(spec);
  const auto r = spacing_out_test(sys.cities, sys.distances, {10, 5, 200, 1});
  CHECK(r.p0 <= 0.05);
}

TEST_CASE("spacing grid: singleton equals the test, reruns are identical, monotone tendency") {
  SpacedSpec spec;
  spec.seed = 3;
  const auto sys = gen_spaced_system(spec);
  const std::vector<std::size_t> K1{10}, L1{3};
  const auto one = spacing_grid(sys.cities, sys.distances, K1, L1, 100, 42);
  const auto direct = spacing_out_test(sys.cities, sys.distances, {10, 3, 100, 42});
  REQUIRE(one.size() == 1);
  CHECK(one[0].mean_counts_random == direct.mean_counts_random);
  CHECK(one[0].p0 == direct.p0);

  const std::vector<std::size_t> Ks{5, 10}, Ls{2, 3, 4, 5};
  const auto g1 = spacing_grid(sys.cities, sys.distances, Ks, Ls, 200, 8);
  const auto g2 = spacing_grid(sys.cities, sys.distances, Ks, Ls, 200, 8, 3);
  REQUIRE(g1.size() == 8);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g1[i].mean_counts_random == g2[i].mean_counts_random);
    CHECK(g1[i].voronoi_counts == g2[i].voronoi_counts);
  }
  // as L decreases at fixed K, no class worsens by more than one level
  for (const auto& a : g1)
    for (const auto& b : g1)
      if (a.K == b.K && b.L + 1 == a.L)
        CHECK(static_cast<int>(b.significance) - static_cast<int>(a.significance) <= 1);
}

TEST_CASE("cpl: single-leaf hierarchy gives p_L = 1") {
  const auto cities = zipf_cities(2);
  const auto r = spatial_cpl_test(cities, star(2), {3, 50, 2, 1});
  CHECK(r.m == 1);
  CHECK(r.depth == 1);
  for (double x : r.rmse_random) CHECK(x == r.rmse_observed);
  CHECK(r.N_L == 51);
  CHECK(r.p_L == 1.0);
}

TEST_CASE("cpl: degeneracy names L") {
  // the root hinterland (3 cities) is the largest, below the minimum of 4
  const auto cities = zipf_cities(3);
  auto run = [&] { spatial_cpl_test(cities, star(3), {3, 10, 4, 1}); };
  CHECK(error_kind(run) == ErrorKind::Degeneracy);
  CHECK(testutil::error_message(run).find("L = 3") != std::string::npos);
}

TEST_CASE("cpl: hierarchical synthetic system is significant; bookkeeping") {
  SynthSpec spec;
  spec.model = SynthModel::Hierarchical;
  spec.seed = 1;
  const auto sys = gen_hierarchical_system(spec);
  CplTestOptions o{3, 200, 2, 1};
  const auto r = spatial_cpl_test(sys.cities, sys.distances, o);
  CHECK(r.p_L <= 0.05);
  CHECK(r.rmse_random.size() == 200);
  CHECK(r.p_L == static_cast<double>(r.N_L) / 201.0);
  CHECK(r.m + r.excluded_subsets == r.hinterland_count);
  CHECK(r.hinterland_count <= r.cell_count);
  std::size_t nl = 1;
  for (double x : r.rmse_random) nl += x <= r.rmse_observed;
  CHECK(r.N_L == nl);
  o.threads = 3;
  const auto again = spatial_cpl_test(sys.cities, sys.distances, o);
  CHECK(again.rmse_random == r.rmse_random);
  CHECK(again.theta_hat == r.theta_hat);
}

TEST_CASE("cpl: calibration entry point accepts a random observed hierarchy") {
  const auto sys = random_system(120, 6);
  const auto tmpl = build_spatial_hierarchy(sys.cities, 3, sys.distances);
  Rng rng(1);
  const auto observed = build_random_hierarchy(tmpl, sys.cities, rng);
  const auto r = cpl_test_for_hierarchy(observed, tmpl, sys.cities, {3, 50, 2, 5});
  CHECK(r.p_L >= 1.0 / 51.0);
  CHECK(r.p_L <= 1.0);
}

TEST_CASE("hinterland samples follow the global hinterlands") {
  const auto sys = random_system(50, 7);
  const auto h = build_spatial_hierarchy(sys.cities, 3, sys.distances);
  const auto samples = hinterland_samples(h, sys.cities);
  const auto hl = global_hinterlands(h);
  REQUIRE(samples.size() == hl.size());
  for (std::size_t i = 0; i < hl.size(); ++i) {
    CHECK(samples[i].subset_id == hl[i].center);
    CHECK(samples[i].n() == hl[i].members.size());
    CHECK(std::is_sorted(samples[i].sizes.rbegin(), samples[i].sizes.rend()));
    CHECK(samples[i].sizes[0] == sys.cities[hl[i].members[0]].population);
  }
}

TEST_CASE("theta profile: noiseless Zipf gives theta = 1 at every L") {
  const auto cities = zipf_cities(60);
  const auto d = star(60);
  const std::vector<ThetaDataset> data{{"zipf", &cities, &d}};
  const std::vector<std::size_t> Ls{2, 3, 4, 5, 6};
  const auto rows = theta_profile(data, Ls);
  REQUIRE(rows.size() == 5);
  for (const auto& row : rows) {
    CHECK(row.theta == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(row.m == 1);
  }
  const std::vector<std::size_t> L3{3};
  const auto single = theta_profile(data, L3);
  const auto test = spatial_cpl_test(cities, d, {3, 5, 2, 0});
  CHECK(single.at(0).theta == test.theta_hat);

  const auto noisy = zipf_cities(60, 0.1, 4);
  const std::vector<ThetaDataset> both{{"zipf", &cities, &d}, {"noisy", &noisy, &d}};
  const auto rows2 = theta_profile(both, Ls);
  double lo = 1e9, hi = -1e9;
  for (const auto& row : rows2)
    if (row.dataset == "noisy") {
      lo = std::min(lo, row.theta);
      hi = std::max(hi, row.theta);
    }
  CHECK(hi - lo <= std::abs(hi - 1.0) + 1e-12);
  const auto csv = theta_csv(rows2);
  CHECK(csv.rfind("dataset,L,theta,rmse,m\n", 0) == 0);
  CHECK(testutil::split_lines(csv).size() == 11);
}
