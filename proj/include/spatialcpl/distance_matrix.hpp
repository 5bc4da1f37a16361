#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <string_view>
#include <vector>

namespace spatialcpl {

enum class DistanceProvider { Road, GreatCircle, Planar, Loaded };

std::string_view to_string(DistanceProvider p);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Square matrix of distances in meters; row = origin. Asymmetric entries are
// allowed. +inf marks an unreachable pair.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, std::vector<double> values, DistanceProvider provider);

  std::size_t size() const { return n_; }
  double operator()(std::size_t from, std::size_t to) const { return values_[from * n_ + to]; }
  const double* row(std::size_t from) const { return values_.data() + from * n_; }
  const std::vector<double>& values() const { return values_; }
  DistanceProvider provider() const { return provider_; }
  std::size_t unreachable_pairs() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  DistanceProvider provider_ = DistanceProvider::Loaded;
};

// Reads either the CDM1 binary layout or a headerless CSV matrix; the format
// is detected from the leading magic bytes.
DistanceMatrix load_distance_matrix(const std::filesystem::path& path);
void write_distance_matrix(const DistanceMatrix& d, const std::filesystem::path& path);
void write_distance_matrix_csv(const DistanceMatrix& d, const std::filesystem::path& path);

}  // namespace spatialcpl
