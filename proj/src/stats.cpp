#include "spatialcpl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "io_util.hpp"
#include "spatialcpl/error.hpp"

namespace spatialcpl {

RankSizeSample rank_sizes(std::span<const double> populations, std::size_t subset_id) {
  if (populations.empty()) fail(ErrorKind::Data, "rank-size sample needs at least one size");
  for (std::size_t i = 0; i < populations.size(); ++i)
    if (!(populations[i] > 0.0) || !std::isfinite(populations[i]))
      fail(ErrorKind::Data, "size at position " + std::to_string(i) + " is not positive");
  RankSizeSample out;
  out.subset_id = subset_id;
  out.sizes.assign(populations.begin(), populations.end());
  std::stable_sort(out.sizes.begin(), out.sizes.end(), std::greater<>());
  return out;
}

double adjusted_log_rank(std::size_t rank) { return std::log(static_cast<double>(rank) - 0.5); }

double GiFit::c() const { return std::exp(b * alpha()) / static_cast<double>(n); }

GiFit fit_gi(const RankSizeSample& sample) {
  const std::size_t n = sample.n();
  if (n < 2) fail(ErrorKind::Degeneracy, "rank-size regression needs at least 2 observations");
  double mx = 0.0, my = 0.0;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = adjusted_log_rank(i + 1);
    y[i] = std::log(sample.sizes[i]);
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::Degeneracy, "rank regressor has zero variance");
  GiFit fit;
  fit.n = n;
  fit.theta = -sxy / sxx;
  fit.b = my + fit.theta * mx;
  fit.residuals.resize(n);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - (fit.b - fit.theta * x[i]);
    ssr += fit.residuals[i] * fit.residuals[i];
  }
  fit.rmse = std::sqrt(ssr / static_cast<double>(n));
  return fit;
}

CplFit fit_cpl(std::span<const RankSizeSample> samples, const CplOptions& options) {
  CplFit fit;
  std::vector<const RankSizeSample*> used;
  for (const auto& s : samples) {
    if (s.n() >= std::max<std::size_t>(options.min_subset_size, 1)) {
      used.push_back(&s);
      fit.subset_ids.push_back(s.subset_id);
    } else {
      ++fit.excluded_subsets;
    }
  }
  fit.m = used.size();
  if (fit.m == 0) fail(ErrorKind::Degeneracy, "no subset meets the minimum size of " +
                                                  std::to_string(options.min_subset_size));

  // Within transformation: slope from subset-demeaned data, then one
  // intercept per subset.
  std::vector<double> mean_x(fit.m), mean_y(fit.m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < fit.m; ++j) {
    const auto& s = *used[j];
    const std::size_t n = s.n();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += adjusted_log_rank(i + 1);
      my += std::log(s.sizes[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = adjusted_log_rank(i + 1) - mx;
      sxx += dx * dx;
      sxy += dx * (std::log(s.sizes[i]) - my);
    }
    mean_x[j] = mx;
    mean_y[j] = my;
    fit.observations += n;
  }
  if (!(sxx > 0.0) || fit.observations < fit.m + 1)
    fail(ErrorKind::Degeneracy, "common slope is not identified (every included subset has a single observation)");
  fit.theta = -sxy / sxx;

  double ssr = 0.0;
  std::vector<double> intercepts(fit.m);
  for (std::size_t j = 0; j < fit.m; ++j) {
    intercepts[j] = mean_y[j] + fit.theta * mean_x[j];
    const auto& s = *used[j];
    for (std::size_t i = 0; i < s.n(); ++i) {
      const double e = std::log(s.sizes[i]) - (intercepts[j] - fit.theta * adjusted_log_rank(i + 1));
      ssr += e * e;
    }
  }
  fit.b1 = intercepts[0];
  fit.betas.resize(fit.m - 1);
  for (std::size_t j = 1; j < fit.m; ++j) fit.betas[j - 1] = intercepts[j] - intercepts[0];
  fit.rmse = std::sqrt(ssr / static_cast<double>(fit.observations));
  return fit;
}

std::string rank_size_csv(std::span<const RankSizeSample> samples, const CplFit& fit) {
  std::string out = "subset_id,rank,size,ln_rank_adj,ln_size,fitted\n";
  std::size_t j = 0;
  for (const auto& s : samples) {
    if (j >= fit.subset_ids.size() || s.subset_id != fit.subset_ids[j]) continue;
    const double intercept = fit.intercept(j);
    for (std::size_t i = 0; i < s.n(); ++i) {
      const double x = adjusted_log_rank(i + 1);
      out += std::to_string(s.subset_id) + ',' + std::to_string(i + 1) + ',' + io::format_double(s.sizes[i]) + ',' +
             io::format_double(x) + ',' + io::format_double(std::log(s.sizes[i])) + ',' +
             io::format_double(intercept - fit.theta * x) + '\n';
    }
    ++j;
  }
  return out;
}

}  // namespace spatialcpl
