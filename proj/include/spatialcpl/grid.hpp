#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace spatialcpl {

enum class GridFormat { EsriAscii, PackedBinary };

GridFormat parse_grid_format(std::string_view name);

// Population counts on a regular lat/lon lattice. Row 0 is the northernmost
// row; the origin is the south-west (lower-left) corner. Cells without data
// are stored as NaN and count as zero population.
class PopulationGrid {
 public:
  PopulationGrid(std::size_t n_rows, std::size_t n_cols, double origin_lat, double origin_lon,
                 double cell_height_arcsec, double cell_width_arcsec, std::vector<double> counts,
                 std::optional<double> nodata_value = std::nullopt);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  double origin_lat() const { return origin_lat_; }
  double origin_lon() const { return origin_lon_; }
  double cell_height_arcsec() const { return cell_height_arcsec_; }
  double cell_width_arcsec() const { return cell_width_arcsec_; }
  // Sentinel declared by the source file, kept for provenance only.
  std::optional<double> nodata_value() const { return nodata_value_; }

  // Raw stored value; NaN marks a no-data cell.
  double raw(std::size_t row, std::size_t col) const { return counts_[row * n_cols_ + col]; }
  bool is_nodata(std::size_t row, std::size_t col) const;
  // Population used for city extraction (no-data reads as 0).
  double population(std::size_t row, std::size_t col) const;
  const std::vector<double>& raw_counts() const { return counts_; }

  double row_center_lat(std::size_t row) const;
  double col_center_lon(std::size_t col) const;

 private:
  std::size_t n_rows_;
  std::size_t n_cols_;
  double origin_lat_;
  double origin_lon_;
  double cell_height_arcsec_;
  double cell_width_arcsec_;
  std::vector<double> counts_;
  std::optional<double> nodata_value_;
};

PopulationGrid load_population_grid(const std::filesystem::path& path, GridFormat format);

void write_esri_ascii(const PopulationGrid& grid, const std::filesystem::path& path);
void write_packed_binary(const PopulationGrid& grid, const std::filesystem::path& path);

}  // namespace spatialcpl
