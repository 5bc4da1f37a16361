#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "spatialcpl/grid.hpp"

namespace spatialcpl {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct Cell {
  std::size_t row;
  std::size_t col;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct City {
  std::size_t id = 0;
  std::vector<Cell> cells;  // empty when loaded from a cities CSV
  std::size_t n_cells = 0;
  double population = 0.0;
  Cell center{0, 0};
  double center_lat = 0.0;
  double center_lon = 0.0;
};

enum class Connectivity { Four = 4, Eight = 8 };

struct CityMetadata {
  double density_min = 1000.0;
  double pop_min = 10000.0;
  Connectivity connectivity = Connectivity::Four;
  std::string source;
};

// Total order used everywhere a "largest city" is needed: population
// descending, then center row, center col, lat, lon ascending.
bool city_precedes(const City& a, const City& b);

// Cities in size-descending order with ids equal to list positions.
class CitySet {
 public:
  CitySet() = default;
  // Validates the ordering and id invariants.
  CitySet(std::vector<City> cities, CityMetadata metadata);
  // Sorts by the total order and assigns ids.
  static CitySet from_unsorted(std::vector<City> cities, CityMetadata metadata = {});

  std::size_t size() const { return cities_.size(); }
  bool empty() const { return cities_.empty(); }
  const City& operator[](std::size_t id) const { return cities_[id]; }
  const std::vector<City>& cities() const { return cities_; }
  const CityMetadata& metadata() const { return metadata_; }
  std::vector<double> populations() const;

 private:
  std::vector<City> cities_;
  CityMetadata metadata_;
};

// Spherical area of a cell in the given grid row.
double cell_area_km2(const PopulationGrid& grid, std::size_t row);

struct ExtractOptions {
  double density_min = 1000.0;  // persons per km^2
  double pop_min = 10000.0;     // persons
  Connectivity connectivity = Connectivity::Four;
};

CitySet extract_cities(const PopulationGrid& grid, const ExtractOptions& options = {});

// `id,center_lat,center_lon,population,n_cells,center_row,center_col`
void write_cities_csv(const CitySet& cities, const std::filesystem::path& path);
std::string cities_csv(const CitySet& cities);
CitySet load_cities_csv(const std::filesystem::path& path);

}  // namespace spatialcpl
