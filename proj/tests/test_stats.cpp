#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "spatialcpl/rng.hpp"
#include "spatialcpl/stats.hpp"
#include "test_util.hpp"

using namespace spatialcpl;
using testutil::error_kind;

namespace {

RankSizeSample zipf(double c, std::size_t n, std::size_t id = 0) {
  RankSizeSample s{id, {}};
  for (std::size_t r = 1; r <= n; ++r) s.sizes.push_back(c / (static_cast<double>(r) - 0.5));
  return s;
}

// Dense solve of the fixed-effects design [1, ln(r-0.5), d_2..d_m].
std::vector<double> dense_cpl(const std::vector<RankSizeSample>& samples) {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  const std::size_t m = samples.size();
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < samples[j].n(); ++i) {
      std::vector<double> row(m + 1, 0.0);
      row[0] = 1.0;
      row[1] = std::log(static_cast<double>(i + 1) - 0.5);
      if (j > 0) row[j + 1] = 1.0;
      X.push_back(row);
      y.push_back(std::log(samples[j].sizes[i]));
    }
  return oracle::dense_least_squares(X, y);
}

double pooled_rmse(const std::vector<RankSizeSample>& samples) {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (const auto& s : samples)
    for (std::size_t i = 0; i < s.n(); ++i) {
      X.push_back({1.0, std::log(static_cast<double>(i + 1) - 0.5)});
      y.push_back(std::log(s.sizes[i]));
    }
  const auto b = oracle::dense_least_squares(X, y);
  double ssr = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double e = y[r] - b[0] - b[1] * X[r][1];
    ssr += e * e;
  }
  return std::sqrt(ssr / static_cast<double>(y.size()));
}

std::vector<RankSizeSample> random_design(Rng& rng, std::size_t m, std::size_t max_n) {
  std::vector<RankSizeSample> out;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> pops;
    const std::size_t n = 2 + rng.uniform_index(max_n - 1);
    for (std::size_t i = 0; i < n; ++i) pops.push_back(std::exp(5.0 + 4.0 * rng.uniform01()));
    out.push_back(rank_sizes(pops, j));
  }
  return out;
}

}  // namespace

TEST_CASE("rank_sizes: trivial cases and stable ties") {
  const std::vector<double> one{5};
  CHECK(rank_sizes(one).sizes == std::vector<double>{5});
  const std::vector<double> three{3, 9, 9};
  CHECK(rank_sizes(three, 4).sizes == std::vector<double>{9, 9, 3});
  CHECK(rank_sizes(three, 4).subset_id == 4);
  const std::vector<double> bad{3, 0};
  CHECK(error_kind([&] { rank_sizes(bad); }) == ErrorKind::Data);
  const std::vector<double> neg{-1};
  CHECK(error_kind([&] { rank_sizes(neg); }) == ErrorKind::Data);
}

TEST_CASE("rank_sizes: matches an independent sort") {
  Rng rng(1);
  std::vector<double> pops;
  for (int i = 0; i < 1000; ++i) pops.push_back(1.0 + std::floor(rng.uniform01() * 300.0));
  auto want = pops;
  std::sort(want.begin(), want.end(), std::greater<>());
  CHECK(rank_sizes(pops).sizes == want);
}

TEST_CASE("fit_gi: noiseless Zipf") {
  const auto fit = fit_gi(zipf(1000.0, 50));
  CHECK(fit.theta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.b == doctest::Approx(std::log(1000.0)).epsilon(1e-12));
  CHECK(fit.rmse < 1e-10);
  CHECK(fit.n == 50);
  CHECK(fit.alpha() == doctest::Approx(1.0));
  CHECK(fit.c() == doctest::Approx(1000.0 / 50.0).epsilon(1e-9));
}

TEST_CASE("fit_gi: three points against closed-form normal equations") {
  RankSizeSample s{0, {8, 4, 2}};
  const double x[3] = {std::log(0.5), std::log(1.5), std::log(2.5)};
  const double y[3] = {std::log(8.0), std::log(4.0), std::log(2.0)};
  const double mx = (x[0] + x[1] + x[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < 3; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx, icpt = my - slope * mx;
  const auto fit = fit_gi(s);
  CHECK(fit.theta == doctest::Approx(-slope).epsilon(1e-12));
  CHECK(fit.b == doctest::Approx(icpt).epsilon(1e-12));
  double ssr = 0;
  for (int i = 0; i < 3; ++i) {
    CHECK(fit.residuals[i] == doctest::Approx(y[i] - icpt - slope * x[i]).epsilon(1e-9));
    ssr += fit.residuals[i] * fit.residuals[i];
  }
  CHECK(fit.rmse == doctest::Approx(std::sqrt(ssr / 3)).epsilon(1e-12));
}

TEST_CASE("fit_gi: too few observations") {
  CHECK(error_kind([] { fit_gi(RankSizeSample{0, {5}}); }) == ErrorKind::Degeneracy);
  CHECK(error_kind([] { fit_gi(RankSizeSample{0, {}}); }) == ErrorKind::Degeneracy);
}

TEST_CASE("fit_gi: 10,000 Pareto draws land in the GI band") {
  Rng rng(2026);
  std::vector<double> pops(10000);
  for (auto& p : pops) p = rng.pareto(1.0, 1.0);
  const auto fit = fit_gi(rank_sizes(pops));
  CHECK(std::abs(fit.theta - 1.0) <= 3.0 * fit.theta * std::sqrt(2.0 / 10000.0));
}

TEST_CASE("fit_gi: invariant under relabeling of tied sizes") {
  Rng rng(3);
  std::vector<double> pops;
  for (int i = 0; i < 200; ++i) pops.push_back(std::floor(1.0 + 20.0 * rng.uniform01()));
  const double theta = fit_gi(rank_sizes(pops)).theta;
  for (int k = 0; k < 5; ++k) {
    for (std::size_t i = pops.size(); i > 1; --i) std::swap(pops[i - 1], pops[rng.uniform_index(i)]);
    CHECK(fit_gi(rank_sizes(pops)).theta == theta);
  }
}

TEST_CASE("fit_cpl: one subset reduces to fit_gi") {
  Rng rng(4);
  const auto design = random_design(rng, 1, 30);
  const auto gi = fit_gi(design[0]);
  const auto cpl = fit_cpl(design);
  CHECK(cpl.m == 1);
  CHECK(cpl.betas.empty());
  CHECK(cpl.theta == doctest::Approx(gi.theta).epsilon(1e-12));
  CHECK(cpl.b1 == doctest::Approx(gi.b).epsilon(1e-12));
  CHECK(cpl.rmse == doctest::Approx(gi.rmse).epsilon(1e-12));
}

TEST_CASE("fit_cpl: two noiseless Zipf subsets") {
  const std::vector<RankSizeSample> s{zipf(1000.0, 40, 0), zipf(50.0, 20, 1)};
  const auto fit = fit_cpl(s);
  CHECK(fit.theta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.b1 == doctest::Approx(std::log(1000.0)).epsilon(1e-12));
  REQUIRE(fit.betas.size() == 1);
  CHECK(fit.betas[0] == doctest::Approx(std::log(50.0 / 1000.0)).epsilon(1e-12));
  CHECK(fit.rmse < 1e-10);
  CHECK(fit.observations == 60);
}

TEST_CASE("fit_cpl: random designs match the dense solve") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto design = random_design(rng, 1 + rng.uniform_index(6), 6);
    const auto fit = fit_cpl(design);
    const auto b = dense_cpl(design);
    CHECK(std::abs(fit.b1 - b[0]) < 1e-9);
    CHECK(std::abs(fit.theta + b[1]) < 1e-9);
    for (std::size_t j = 1; j < design.size(); ++j) CHECK(std::abs(fit.betas[j - 1] - b[j + 1]) < 1e-9);
    // within estimator equals the demeaned slope (checked through the dense
    // solve) and RMSE uses the total observation count
    double ssr = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < design.size(); ++j)
      for (std::size_t i = 0; i < design[j].n(); ++i, ++n) {
        const double e = std::log(design[j].sizes[i]) - fit.intercept(j) + fit.theta * std::log(i + 0.5);
        ssr += e * e;
      }
    CHECK(fit.rmse == doctest::Approx(std::sqrt(ssr / static_cast<double>(n))).epsilon(1e-12));
    CHECK(fit.rmse <= pooled_rmse(design) + 1e-12);
  }
}

TEST_CASE("fit_cpl: scale equivariance") {
  Rng rng(6);
  auto design = random_design(rng, 4, 10);
  const auto base = fit_cpl(design);
  const double lambda = 7.5;
  for (std::size_t j : {0u, 2u}) {
    auto scaled = design;
    for (auto& s : scaled[j].sizes) s *= lambda;
    const auto fit = fit_cpl(scaled);
    CHECK(std::abs(fit.theta - base.theta) < 1e-9);
    CHECK(std::abs(fit.rmse - base.rmse) < 1e-9);
    CHECK(std::abs(fit.intercept(j) - base.intercept(j) - std::log(lambda)) < 1e-9);
    const std::size_t other = j == 0 ? 1 : 0;
    CHECK(std::abs(fit.intercept(other) - base.intercept(other)) < 1e-9);
  }
}

TEST_CASE("fit_cpl: minimum subset size and degeneracy") {
  std::vector<RankSizeSample> s{zipf(100.0, 5, 0), RankSizeSample{1, {40}}, zipf(70.0, 3, 2)};
  const auto fit = fit_cpl(s);
  CHECK(fit.m == 2);
  CHECK(fit.excluded_subsets == 1);
  CHECK(fit.subset_ids == std::vector<std::size_t>{0, 2});
  CHECK(fit.observations == 8);
  const auto all = fit_cpl(s, {1});
  CHECK(all.m == 3);
  CHECK(all.excluded_subsets == 0);
  CHECK(all.observations == 9);

  const std::vector<RankSizeSample> singles{RankSizeSample{0, {5}}, RankSizeSample{1, {3}}};
  CHECK(error_kind([&] { fit_cpl(singles, {1}); }) == ErrorKind::Degeneracy);
  CHECK(error_kind([&] { fit_cpl(singles); }) == ErrorKind::Degeneracy);
}

TEST_CASE("rank-size csv") {
  const std::vector<RankSizeSample> s{zipf(1000.0, 3, 7), RankSizeSample{9, {2}}};
  const auto fit = fit_cpl(s);
  const auto csv = rank_size_csv(s, fit);
  const auto lines = testutil::split_lines(csv);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "subset_id,rank,size,ln_rank_adj,ln_size,fitted");
  CHECK(lines[1].rfind("7,1,2000,", 0) == 0);
}
