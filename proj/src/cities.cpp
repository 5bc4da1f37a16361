#include "spatialcpl/cities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <deque>
#include <tuple>
#include <unordered_set>

#include "io_util.hpp"
#include "spatialcpl/error.hpp"

namespace spatialcpl {

bool city_precedes(const City& a, const City& b) {
  if (a.population != b.population) return a.population > b.population;
  return std::tie(a.center.row, a.center.col, a.center_lat, a.center_lon) <
         std::tie(b.center.row, b.center.col, b.center_lat, b.center_lon);
}

CitySet::CitySet(std::vector<City> cities, CityMetadata metadata)
    : cities_(std::move(cities)), metadata_(std::move(metadata)) {
  for (std::size_t i = 0; i < cities_.size(); ++i) {
    if (cities_[i].id != i) fail(ErrorKind::Data, "city at position " + std::to_string(i) + " has id " +
                                                      std::to_string(cities_[i].id));
    if (!(cities_[i].population > 0.0)) fail(ErrorKind::Data, "city " + std::to_string(i) + " has no population");
    if (i > 0 && !city_precedes(cities_[i - 1], cities_[i]))
      fail(ErrorKind::Data, "cities " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                " violate the size-descending order");
  }
}

CitySet CitySet::from_unsorted(std::vector<City> cities, CityMetadata metadata) {
  std::stable_sort(cities.begin(), cities.end(), city_precedes);
  for (std::size_t i = 0; i < cities.size(); ++i) cities[i].id = i;
  return CitySet(std::move(cities), std::move(metadata));
}

std::vector<double> CitySet::populations() const {
  std::vector<double> out;
  out.reserve(cities_.size());
  for (const auto& c : cities_) out.push_back(c.population);
  return out;
}

double cell_area_km2(const PopulationGrid& grid, std::size_t row) {
  if (row >= grid.n_rows())
    fail(ErrorKind::Index, "row " + std::to_string(row) + " outside grid of " + std::to_string(grid.n_rows()) +
                               " rows");
  constexpr double kArcsecToRad = std::numbers::pi / (180.0 * 3600.0);
  const double dphi = grid.cell_height_arcsec() * kArcsecToRad;
  const double dlambda = grid.cell_width_arcsec() * kArcsecToRad;
  const double phi = grid.row_center_lat(row) * std::numbers::pi / 180.0;
  return kEarthRadiusKm * kEarthRadiusKm * dphi * dlambda * std::cos(phi);
}

CitySet extract_cities(const PopulationGrid& grid, const ExtractOptions& options) {
  if (!(options.density_min > 0.0)) fail(ErrorKind::Argument, "density_min must be positive");
  if (!(options.pop_min > 0.0)) fail(ErrorKind::Argument, "pop_min must be positive");

  const std::size_t rows = grid.n_rows();
  const std::size_t cols = grid.n_cols();
  std::vector<double> area(rows);
  for (std::size_t r = 0; r < rows; ++r) area[r] = cell_area_km2(grid, r);

  auto density = [&](std::size_t r, std::size_t c) { return grid.population(r, c) / area[r]; };
  std::vector<char> qualifies(rows * cols, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (area[r] > 0.0 && density(r, c) >= options.density_min) qualifies[r * cols + c] = 1;

  std::vector<std::pair<int, int>> offsets = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  if (options.connectivity == Connectivity::Eight)
    offsets.insert(offsets.end(), {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});

  std::vector<char> visited(rows * cols, 0);
  std::vector<City> found;
  std::deque<Cell> queue;
  for (std::size_t r0 = 0; r0 < rows; ++r0) {
    for (std::size_t c0 = 0; c0 < cols; ++c0) {
      const std::size_t start = r0 * cols + c0;
      if (!qualifies[start] || visited[start]) continue;
      City city;
      visited[start] = 1;
      queue.push_back({r0, c0});
      double best_density = -1.0;
      while (!queue.empty()) {
        const Cell cell = queue.front();
        queue.pop_front();
        city.cells.push_back(cell);
        city.population += grid.population(cell.row, cell.col);
        const double dens = density(cell.row, cell.col);
        if (dens > best_density || (dens == best_density && cell < city.center)) {
          best_density = dens;
          city.center = cell;
        }
        for (auto [dr, dc] : offsets) {
          const long long nr = static_cast<long long>(cell.row) + dr;
          const long long nc = static_cast<long long>(cell.col) + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<long long>(rows) || nc >= static_cast<long long>(cols)) continue;
          const std::size_t idx = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
          if (qualifies[idx] && !visited[idx]) {
            visited[idx] = 1;
            queue.push_back({static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)});
          }
        }
      }
      if (city.population < options.pop_min) continue;
      std::sort(city.cells.begin(), city.cells.end());
      city.n_cells = city.cells.size();
      city.center_lat = grid.row_center_lat(city.center.row);
      city.center_lon = grid.col_center_lon(city.center.col);
      found.push_back(std::move(city));
    }
  }
  CityMetadata meta{options.density_min, options.pop_min, options.connectivity, "grid"};
  return CitySet::from_unsorted(std::move(found), std::move(meta));
}

std::string cities_csv(const CitySet& cities) {
  std::string out = "id,center_lat,center_lon,population,n_cells,center_row,center_col\n";
  for (const auto& c : cities.cities()) {
    out += std::to_string(c.id) + ',' + io::format_double(c.center_lat) + ',' + io::format_double(c.center_lon) +
           ',' + io::format_double(c.population) + ',' + std::to_string(c.n_cells) + ',' +
           std::to_string(c.center.row) + ',' + std::to_string(c.center.col) + '\n';
  }
  return out;
}

void write_cities_csv(const CitySet& cities, const std::filesystem::path& path) {
  io::open_out(path) << cities_csv(cities);
}

CitySet load_cities_csv(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  const auto ls = io::lines(text);
  if (ls.empty() || io::trim(ls[0]) != "id,center_lat,center_lon,population,n_cells,center_row,center_col")
    fail(ErrorKind::Format, path.string() + ": missing or unexpected cities header");
  std::vector<City> cities;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (io::trim(ls[i]).empty()) continue;
    const auto f = io::split(ls[i], ',');
    if (f.size() != 7) fail(ErrorKind::Format, path.string() + ": line " + std::to_string(i + 1) + " needs 7 fields");
    auto id = io::parse_int(f[0]);
    auto lat = io::parse_double(f[1]);
    auto lon = io::parse_double(f[2]);
    auto pop = io::parse_double(f[3]);
    auto ncells = io::parse_int(f[4]);
    auto row = io::parse_int(f[5]);
    auto col = io::parse_int(f[6]);
    if (!id || !lat || !lon || !pop || !ncells || !row || !col || *id < 0 || *ncells < 0 || *row < 0 || *col < 0)
      fail(ErrorKind::Format, path.string() + ": malformed line " + std::to_string(i + 1));
    City c;
    c.id = static_cast<std::size_t>(*id);
    c.center_lat = *lat;
    c.center_lon = *lon;
    c.population = *pop;
    c.n_cells = static_cast<std::size_t>(*ncells);
    c.center = {static_cast<std::size_t>(*row), static_cast<std::size_t>(*col)};
    cities.push_back(std::move(c));
  }
  CityMetadata meta;
  meta.source = path.string();
  return CitySet(std::move(cities), std::move(meta));
}

}  // namespace spatialcpl
