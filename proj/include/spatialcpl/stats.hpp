#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spatialcpl {

// Sizes of one subset in rank order: sizes[i] has rank i + 1.
struct RankSizeSample {
  std::size_t subset_id = 0;
  std::vector<double> sizes;

  std::size_t n() const { return sizes.size(); }
};

// Descending sort; equal sizes keep their input order (stable).
RankSizeSample rank_sizes(std::span<const double> populations, std::size_t subset_id = 0);

// ln(rank - 0.5): the regressor of the rank-size regression.
double adjusted_log_rank(std::size_t rank);

// OLS fit of ln s = b - theta * ln(r - 0.5).
struct GiFit {
  double theta = 0.0;
  double b = 0.0;
  std::vector<double> residuals;
  double rmse = 0.0;
  std::size_t n = 0;

  double alpha() const { return 1.0 / theta; }
  // Power-law constant c in Pr(S > s) ~ c s^-alpha, from b = ln(c n) / alpha.
  double c() const;
};

GiFit fit_gi(const RankSizeSample& sample);

// Common-slope regression with one intercept per subset.
struct CplFit {
  double theta = 0.0;
  double b1 = 0.0;                       // intercept of the reference (first included) subset
  std::vector<double> betas;             // intercept shifts of subsets 2..m relative to b1
  double rmse = 0.0;                     // denominator: total observations
  std::size_t m = 0;                     // included subsets
  std::size_t observations = 0;
  std::size_t excluded_subsets = 0;      // dropped by min_subset_size
  std::vector<std::size_t> subset_ids;   // included subsets, in input order

  double intercept(std::size_t j) const { return j == 0 ? b1 : b1 + betas[j - 1]; }
};

struct CplOptions {
  std::size_t min_subset_size = 2;
};

CplFit fit_cpl(std::span<const RankSizeSample> samples, const CplOptions& options = {});

// `subset_id,rank,size,ln_rank_adj,ln_size,fitted` rows for the included subsets.
std::string rank_size_csv(std::span<const RankSizeSample> samples, const CplFit& fit);

}  // namespace spatialcpl
