#include "spatialcpl/grid.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "io_util.hpp"
#include "spatialcpl/error.hpp"

namespace spatialcpl {

namespace {

constexpr char kGridMagic[4] = {'C', 'P', 'G', '1'};
// Refuse rasters above 2^34 cells (128 GiB of doubles).
constexpr std::size_t kMaxCells = std::size_t{1} << 34;

std::size_t checked_cells(std::size_t rows, std::size_t cols) {
  if (rows != 0 && cols > kMaxCells / rows)
    fail(ErrorKind::Capacity, "grid of " + std::to_string(rows) + "x" + std::to_string(cols) +
                                  " cells exceeds addressable memory");
  return rows * cols;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

}  // namespace

GridFormat parse_grid_format(std::string_view name) {
  if (name == "esri-ascii" || name == "asc") return GridFormat::EsriAscii;
  if (name == "packed-binary" || name == "cpg") return GridFormat::PackedBinary;
  fail(ErrorKind::Argument, "unknown grid format '" + std::string(name) + "'");
}

PopulationGrid::PopulationGrid(std::size_t n_rows, std::size_t n_cols, double origin_lat, double origin_lon,
                               double cell_height_arcsec, double cell_width_arcsec, std::vector<double> counts,
                               std::optional<double> nodata_value)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      origin_lat_(origin_lat),
      origin_lon_(origin_lon),
      cell_height_arcsec_(cell_height_arcsec),
      cell_width_arcsec_(cell_width_arcsec),
      counts_(std::move(counts)),
      nodata_value_(nodata_value) {
  if (counts_.size() != checked_cells(n_rows, n_cols))
    fail(ErrorKind::Format, "grid has " + std::to_string(counts_.size()) + " counts, expected " +
                                std::to_string(n_rows * n_cols));
  if (!(cell_height_arcsec > 0.0) || !(cell_width_arcsec > 0.0) || !std::isfinite(cell_height_arcsec) ||
      !std::isfinite(cell_width_arcsec))
    fail(ErrorKind::Data, "cell extents must be positive");
  if (!(std::abs(origin_lat) <= 90.0)) fail(ErrorKind::Data, "origin latitude outside [-90, 90]");
  if (!std::isfinite(origin_lon)) fail(ErrorKind::Data, "origin longitude is not finite");
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const double v = counts_[i];
    if (std::isnan(v)) continue;
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorKind::Data, "invalid count " + io::format_double(v) + " at row " + std::to_string(i / n_cols) +
                                ", col " + std::to_string(i % n_cols));
  }
}

bool PopulationGrid::is_nodata(std::size_t row, std::size_t col) const { return std::isnan(raw(row, col)); }

double PopulationGrid::population(std::size_t row, std::size_t col) const {
  const double v = raw(row, col);
  return std::isnan(v) ? 0.0 : v;
}

double PopulationGrid::row_center_lat(std::size_t row) const {
  const double h = cell_height_arcsec_ / 3600.0;
  return origin_lat_ + (static_cast<double>(n_rows_ - row) - 0.5) * h;
}

double PopulationGrid::col_center_lon(std::size_t col) const {
  const double w = cell_width_arcsec_ / 3600.0;
  return origin_lon_ + (static_cast<double>(col) + 0.5) * w;
}

namespace {

PopulationGrid load_esri_ascii(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  const auto all_lines = io::lines(text);
  std::map<std::string, std::string_view> header;
  std::size_t line_no = 0;
  for (; line_no < all_lines.size(); ++line_no) {
    const auto toks = io::tokens(all_lines[line_no]);
    if (toks.empty()) continue;
    const char first = toks[0].front();
    const bool is_key = (first >= 'A' && first <= 'Z') || (first >= 'a' && first <= 'z');
    if (!is_key) break;
    if (toks.size() != 2) fail(ErrorKind::Format, "header field '" + std::string(toks[0]) + "' must have one value");
    header[lower(toks[0])] = toks[1];
  }

  auto number = [&](const char* key) -> std::optional<double> {
    auto it = header.find(key);
    if (it == header.end()) return std::nullopt;
    auto v = io::parse_double(it->second);
    if (!v) fail(ErrorKind::Format, std::string("header field '") + key + "' is not a number");
    return v;
  };
  auto required_count = [&](const char* key) -> std::size_t {
    auto it = header.find(key);
    if (it == header.end()) fail(ErrorKind::Format, std::string("missing header field '") + key + "'");
    auto v = io::parse_int(it->second);
    if (!v || *v <= 0) fail(ErrorKind::Format, std::string("header field '") + key + "' must be a positive integer");
    return static_cast<std::size_t>(*v);
  };

  const std::size_t ncols = required_count("ncols");
  const std::size_t nrows = required_count("nrows");

  double dy = 0.0;
  double dx = 0.0;
  if (auto cs = number("cellsize")) {
    dy = dx = *cs;
  } else {
    auto ody = number("dy");
    auto odx = number("dx");
    if (!ody || !odx) fail(ErrorKind::Format, "missing header field 'cellsize' (or 'dx'/'dy')");
    dy = *ody;
    dx = *odx;
  }
  if (!(dx > 0.0) || !(dy > 0.0)) fail(ErrorKind::Format, "header field 'cellsize' must be positive");

  double xll = 0.0;
  double yll = 0.0;
  if (auto v = number("xllcorner")) {
    xll = *v;
  } else if (auto c = number("xllcenter")) {
    xll = *c - dx / 2.0;
  } else {
    fail(ErrorKind::Format, "missing header field 'xllcorner'");
  }
  if (auto v = number("yllcorner")) {
    yll = *v;
  } else if (auto c = number("yllcenter")) {
    yll = *c - dy / 2.0;
  } else {
    fail(ErrorKind::Format, "missing header field 'yllcorner'");
  }
  const std::optional<double> nodata = number("nodata_value");

  std::vector<double> counts;
  counts.reserve(checked_cells(nrows, ncols));
  std::size_t row = 0;
  for (; line_no < all_lines.size(); ++line_no) {
    const auto toks = io::tokens(all_lines[line_no]);
    if (toks.empty()) continue;
    if (row >= nrows) fail(ErrorKind::Format, "more than nrows=" + std::to_string(nrows) + " data rows");
    if (toks.size() != ncols)
      fail(ErrorKind::Format, "row " + std::to_string(row) + " has " + std::to_string(toks.size()) +
                                  " values, header declares ncols=" + std::to_string(ncols));
    for (std::size_t col = 0; col < ncols; ++col) {
      auto v = io::parse_double(toks[col]);
      if (!v)
        fail(ErrorKind::Format, "unparseable value '" + std::string(toks[col]) + "' at row " + std::to_string(row) +
                                    ", col " + std::to_string(col));
      if (nodata && *v == *nodata) {
        counts.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      if (*v < 0.0)
        fail(ErrorKind::Data, "negative count at row " + std::to_string(row) + ", col " + std::to_string(col));
      counts.push_back(*v);
    }
    ++row;
  }
  if (row != nrows)
    fail(ErrorKind::Format, "found " + std::to_string(row) + " data rows, header declares nrows=" +
                                std::to_string(nrows));
  return PopulationGrid(nrows, ncols, yll, xll, dy * 3600.0, dx * 3600.0, std::move(counts), nodata);
}

PopulationGrid load_packed(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  io::ByteReader in(data, "packed grid '" + path.string() + "'");
  if (in.take(4, "magic") != std::string_view(kGridMagic, 4)) fail(ErrorKind::Format, "bad magic, expected CPG1");
  const auto nrows = in.get<std::uint32_t>("n_rows");
  const auto ncols = in.get<std::uint32_t>("n_cols");
  const double lat = in.get<double>("origin_lat");
  const double lon = in.get<double>("origin_lon");
  const double h = in.get<double>("cell_height_arcsec");
  const double w = in.get<double>("cell_width_arcsec");
  const std::size_t cells = checked_cells(nrows, ncols);
  if (in.remaining() != cells * sizeof(double))
    fail(ErrorKind::Format, "payload holds " + std::to_string(in.remaining()) + " bytes, expected " +
                                std::to_string(cells * sizeof(double)) + " for n_rows*n_cols counts");
  std::vector<double> counts(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    counts[i] = in.get<double>("counts");
    if (counts[i] < 0.0)
      fail(ErrorKind::Data, "negative count at row " + std::to_string(i / ncols) + ", col " +
                                std::to_string(i % ncols));
  }
  return PopulationGrid(nrows, ncols, lat, lon, h, w, std::move(counts));
}

}  // namespace

PopulationGrid load_population_grid(const std::filesystem::path& path, GridFormat format) {
  return format == GridFormat::EsriAscii ? load_esri_ascii(path) : load_packed(path);
}

void write_esri_ascii(const PopulationGrid& grid, const std::filesystem::path& path) {
  std::string out;
  out += "ncols " + std::to_string(grid.n_cols()) + "\n";
  out += "nrows " + std::to_string(grid.n_rows()) + "\n";
  out += "xllcorner " + io::format_double(grid.origin_lon()) + "\n";
  out += "yllcorner " + io::format_double(grid.origin_lat()) + "\n";
  const double dy = grid.cell_height_arcsec() / 3600.0;
  const double dx = grid.cell_width_arcsec() / 3600.0;
  if (grid.cell_height_arcsec() == grid.cell_width_arcsec()) {
    out += "cellsize " + io::format_double(dx) + "\n";
  } else {
    out += "dx " + io::format_double(dx) + "\n";
    out += "dy " + io::format_double(dy) + "\n";
  }
  const double nodata = grid.nodata_value().value_or(-9999.0);
  out += "NODATA_value " + io::format_double(nodata) + "\n";
  for (std::size_t r = 0; r < grid.n_rows(); ++r) {
    for (std::size_t c = 0; c < grid.n_cols(); ++c) {
      if (c) out += ' ';
      out += io::format_double(grid.is_nodata(r, c) ? nodata : grid.raw(r, c));
    }
    out += '\n';
  }
  auto f = io::open_out(path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void write_packed_binary(const PopulationGrid& grid, const std::filesystem::path& path) {
  if (grid.n_rows() > std::numeric_limits<std::uint32_t>::max() ||
      grid.n_cols() > std::numeric_limits<std::uint32_t>::max())
    fail(ErrorKind::Capacity, "grid dimensions exceed the packed format's u32 fields");
  std::string out(kGridMagic, 4);
  out.reserve(44 + grid.raw_counts().size() * 8);
  io::put_le(out, static_cast<std::uint32_t>(grid.n_rows()));
  io::put_le(out, static_cast<std::uint32_t>(grid.n_cols()));
  io::put_le(out, grid.origin_lat());
  io::put_le(out, grid.origin_lon());
  io::put_le(out, grid.cell_height_arcsec());
  io::put_le(out, grid.cell_width_arcsec());
  for (double v : grid.raw_counts()) io::put_le(out, v);
  auto f = io::open_out(path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace spatialcpl
