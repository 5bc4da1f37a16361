#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spatialcpl/cities.hpp"
#include "spatialcpl/distance_matrix.hpp"
#include "spatialcpl/partition.hpp"
#include "spatialcpl/stats.hpp"

namespace spatialcpl {

// The four reporting bands for p-values: < 0.01, [0.01, 0.05), [0.05, 0.1), >= 0.1.
enum class Significance { P01, P05, P10, NotSignificant };

Significance classify_p_value(double p);
std::string_view to_string(Significance s);
std::string_view color_of(Significance s);  // red, orange, yellow, linen

struct SpacingOptions {
  std::size_t K = 2;
  std::size_t L = 1;
  std::size_t M = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // Shuffle every city for each counterfactual instead of sampling only the
  // labels of the L largest. Same distribution, much slower.
  bool full_shuffle = false;
};

struct SpacingTestResult {
  std::size_t K = 0;
  std::size_t L = 0;
  std::size_t M = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> voronoi_counts;  // N_L(v), v = 1..M
  double mean_count_voronoi = 0.0;          // mean of N_L(v)
  std::vector<double> mean_counts_random;   // mean over v of N_L(v, w), w = 1..M
  std::size_t M0 = 0;                       // random means >= observed, plus the observed
  double p0 = 1.0;
  Significance significance = Significance::NotSignificant;
};

SpacingTestResult spacing_out_test(const CitySet& cities, const DistanceMatrix& d, const SpacingOptions& options);

std::vector<SpacingTestResult> spacing_grid(const CitySet& cities, const DistanceMatrix& d,
                                            std::span<const std::size_t> K_list, std::span<const std::size_t> L_list,
                                            std::size_t M, std::uint64_t seed, unsigned threads = 1,
                                            bool full_shuffle = false);

// Rank-size samples of the global hinterlands of a hierarchy, subset id =
// central city id.
std::vector<RankSizeSample> hinterland_samples(const HierarchicalPartition& h, const CitySet& cities);

struct CplTestOptions {
  std::size_t L = 3;
  std::size_t N = 1000;
  std::size_t min_subset_size = 2;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct CplTestResult {
  std::size_t L = 0;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  double rmse_observed = 0.0;
  std::vector<double> rmse_random;
  std::size_t N_L = 0;  // random RMSEs not exceeding the observed, plus the observed
  double p_L = 1.0;
  double theta_hat = 0.0;
  std::size_t m = 0;                 // subsets in the regression
  std::size_t excluded_subsets = 0;  // hinterlands below min_subset_size
  std::size_t cell_count = 0;        // all nodes of the spatial hierarchy
  std::size_t hinterland_count = 0;  // distinct central cities
  std::size_t depth = 0;
  Significance significance = Significance::NotSignificant;
};

CplTestResult spatial_cpl_test(const CitySet& cities, const DistanceMatrix& d, const CplTestOptions& options);

// Same statistic, but the "observed" hierarchy is supplied by the caller.
// Used to check calibration when the observed system is itself a random draw.
CplTestResult cpl_test_for_hierarchy(const HierarchicalPartition& observed, const HierarchicalPartition& tmpl,
                                     const CitySet& cities, const CplTestOptions& options);

struct ThetaDataset {
  std::string name;
  const CitySet* cities;
  const DistanceMatrix* distances;
};

struct ThetaRow {
  std::string dataset;
  std::size_t L;
  double theta;
  double rmse;
  std::size_t m;
};

std::vector<ThetaRow> theta_profile(std::span<const ThetaDataset> datasets, std::span<const std::size_t> L_list,
                                    std::size_t min_subset_size = 2);

std::string theta_csv(std::span<const ThetaRow> rows);

}  // namespace spatialcpl
