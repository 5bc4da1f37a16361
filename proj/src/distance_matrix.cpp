#include "spatialcpl/distance_matrix.hpp"

#include <cmath>
#include <string>

#include "io_util.hpp"
#include "spatialcpl/error.hpp"

namespace spatialcpl {

namespace {
constexpr char kMatrixMagic[4] = {'C', 'D', 'M', '1'};
}

std::string_view to_string(DistanceProvider p) {
  switch (p) {
    case DistanceProvider::Road: return "road";
    case DistanceProvider::GreatCircle: return "great-circle";
    case DistanceProvider::Planar: return "planar";
    case DistanceProvider::Loaded: return "loaded";
  }
  return "loaded";
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values, DistanceProvider provider)
    : n_(n), values_(std::move(values)), provider_(provider) {
  if (n_ != 0 && values_.size() / n_ != n_)
    fail(ErrorKind::Format, "distance matrix holds " + std::to_string(values_.size()) + " values, expected " +
                                std::to_string(n_) + "^2");
  if (n_ == 0 && !values_.empty()) fail(ErrorKind::Format, "distance matrix with n = 0 holds values");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = values_[i * n_ + j];
      if (std::isnan(v) || v < 0.0)
        fail(ErrorKind::Data, "invalid distance at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (i == j && v != 0.0)
        fail(ErrorKind::Data, "nonzero diagonal at (" + std::to_string(i) + "," + std::to_string(i) + ")");
    }
  }
}

std::size_t DistanceMatrix::unreachable_pairs() const {
  std::size_t count = 0;
  for (double v : values_)
    if (std::isinf(v)) ++count;
  return count;
}

DistanceMatrix load_distance_matrix(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  if (data.size() >= 4 && std::string_view(data).substr(0, 4) == std::string_view(kMatrixMagic, 4)) {
    io::ByteReader in(data, "distance matrix '" + path.string() + "'");
    in.take(4, "magic");
    const std::size_t n = in.get<std::uint32_t>("n");
    if (in.remaining() != n * n * sizeof(double))
      fail(ErrorKind::Format, "distance matrix payload does not match declared n = " + std::to_string(n));
    std::vector<double> values(n * n);
    for (auto& v : values) v = in.get<double>("values");
    return DistanceMatrix(n, std::move(values), DistanceProvider::Loaded);
  }

  std::vector<double> values;
  std::size_t n = 0;
  std::size_t row = 0;
  for (auto line : io::lines(data)) {
    if (io::trim(line).empty()) continue;
    const auto fields = io::split(line, ',');
    if (row == 0) n = fields.size();
    if (fields.size() != n)
      fail(ErrorKind::Format, "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                  " entries, expected " + std::to_string(n));
    for (auto f : fields) {
      if (f == "inf" || f == "Inf" || f == "INF") {
        values.push_back(kUnreachable);
        continue;
      }
      auto v = io::parse_double(f);
      if (!v) fail(ErrorKind::Format, "unparseable distance '" + std::string(f) + "' in row " + std::to_string(row));
      values.push_back(*v);
    }
    ++row;
  }
  if (row != n) fail(ErrorKind::Format, "CSV matrix has " + std::to_string(row) + " rows and " + std::to_string(n) +
                                            " columns");
  return DistanceMatrix(n, std::move(values), DistanceProvider::Loaded);
}

void write_distance_matrix(const DistanceMatrix& d, const std::filesystem::path& path) {
  std::string out(kMatrixMagic, 4);
  out.reserve(8 + d.values().size() * 8);
  io::put_le(out, static_cast<std::uint32_t>(d.size()));
  for (double v : d.values()) io::put_le(out, v);
  auto f = io::open_out(path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void write_distance_matrix_csv(const DistanceMatrix& d, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j) out += ',';
      out += std::isinf(d(i, j)) ? std::string("inf") : io::format_double(d(i, j));
    }
    out += '\n';
  }
  io::open_out(path) << out;
}

}  // namespace spatialcpl
