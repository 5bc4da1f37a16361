#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "oracles.hpp"
#include "spatialcpl/cities.hpp"
#include "spatialcpl/rng.hpp"
#include "test_util.hpp"

using namespace spatialcpl;
using testutil::error_kind;

namespace {

constexpr double kArc30 = 30.0;
// R^2 * (30" in radians)^2 with R = 6371.0088 km, evaluated independently.
const double kEquatorCell30 = [] {
  const double r = 6371.0088;
  const double delta = 30.0 / 3600.0 * std::numbers::pi / 180.0;
  return r * r * delta * delta;
}();

// One-row grid whose row center sits at `lat`.
PopulationGrid row_at(double lat, double h = kArc30, double w = kArc30) {
  return PopulationGrid(1, 1, lat - h / 7200.0, 0.0, h, w, {0.0});
}

// Independent density threshold: area from first principles per row.
double oracle_area(const PopulationGrid& g, std::size_t row) {
  const double r = 6371.0088;
  const double lat_center = g.origin_lat() + (static_cast<double>(g.n_rows() - row) - 0.5) * g.cell_height_arcsec() / 3600.0;
  const double k = std::numbers::pi / 180.0;
  return r * r * (g.cell_height_arcsec() / 3600.0 * k) * (g.cell_width_arcsec() / 3600.0 * k) * std::cos(lat_center * k);
}

// Random raster with densities kept away from the threshold.
PopulationGrid random_raster(std::size_t rows, std::size_t cols, std::uint64_t seed, double origin_lat) {
  Rng rng(seed);
  const PopulationGrid shape(rows, cols, origin_lat, 100.0, kArc30, kArc30, std::vector<double>(rows * cols, 0.0));
  std::vector<double> counts(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double area = oracle_area(shape, r);
    for (std::size_t c = 0; c < cols; ++c) {
      const double density = rng.uniform01() < 0.52 ? 1010.0 + rng.uniform01() * 4000.0 : rng.uniform01() * 990.0;
      counts[r * cols + c] = std::round(density * area);
    }
  }
  return PopulationGrid(rows, cols, origin_lat, 100.0, kArc30, kArc30, std::move(counts));
}

std::vector<oracle::Component> oracle_components(const PopulationGrid& g, double density_min, bool eight) {
  std::vector<char> q(g.n_rows() * g.n_cols());
  std::vector<double> pop(q.size());
  for (std::size_t r = 0; r < g.n_rows(); ++r)
    for (std::size_t c = 0; c < g.n_cols(); ++c) {
      pop[r * g.n_cols() + c] = g.population(r, c);
      q[r * g.n_cols() + c] = g.population(r, c) / oracle_area(g, r) >= density_min;
    }
  return oracle::flood_fill(g.n_rows(), g.n_cols(), q, pop, eight);
}

// Map from first (smallest) cell to component, for order-free comparison.
template <class Comp>
std::map<std::pair<std::size_t, std::size_t>, const Comp*> by_first_cell(const std::vector<Comp>& comps) {
  std::map<std::pair<std::size_t, std::size_t>, const Comp*> out;
  for (const auto& c : comps) out[c.cells.front()] = &c;
  return out;
}

void check_against_oracle(const PopulationGrid& g, double pop_min, Connectivity conn) {
  const auto cities = extract_cities(g, {1000.0, pop_min, conn});
  std::vector<oracle::Component> expected;
  for (auto& comp : oracle_components(g, 1000.0, conn == Connectivity::Eight))
    if (comp.population >= pop_min) expected.push_back(comp);
  REQUIRE(cities.size() == expected.size());
  const auto want = by_first_cell(expected);
  for (const auto& city : cities.cities()) {
    REQUIRE(!city.cells.empty());
    const std::pair<std::size_t, std::size_t> first{city.cells.front().row, city.cells.front().col};
    auto it = want.find(first);
    REQUIRE(it != want.end());
    const auto& comp = *it->second;
    REQUIRE(comp.cells.size() == city.cells.size());
    for (std::size_t i = 0; i < comp.cells.size(); ++i) {
      CHECK(comp.cells[i].first == city.cells[i].row);
      CHECK(comp.cells[i].second == city.cells[i].col);
    }
    CHECK(city.population == doctest::Approx(comp.population).epsilon(1e-12));
  }
}

}  // namespace

TEST_CASE("cell area: equatorial 30 arc-second cell") {
  const auto g = row_at(0.0);
  CHECK(cell_area_km2(g, 0) == doctest::Approx(kEquatorCell30).epsilon(1e-12));
  CHECK(kEquatorCell30 == doctest::Approx(0.858635).epsilon(1e-6));
}

TEST_CASE("cell area: cosine factor and the pole limit") {
  const double equator = cell_area_km2(row_at(0.0), 0);
  CHECK(cell_area_km2(row_at(60.0), 0) / equator == doctest::Approx(0.5).epsilon(1e-12));
  const double polar = cell_area_km2(row_at(89.999, 1.0, 30.0), 0);
  const double eq1 = cell_area_km2(row_at(0.0, 1.0, 30.0), 0);
  CHECK(polar > 0.0);
  CHECK(polar < 1e-3 * eq1);
}

TEST_CASE("cell area: row out of range") {
  CHECK(error_kind([] { cell_area_km2(row_at(0.0), 1); }) == ErrorKind::Index);
}

TEST_CASE("extract: nothing qualifies below the density threshold") {
  const PopulationGrid g(3, 3, 0.0, 0.0, kArc30, kArc30, std::vector<double>(9, 500.0));
  CHECK(extract_cities(g).empty());
}

TEST_CASE("extract: one isolated 5x5 block") {
  std::vector<double> counts(9 * 9, 10.0);
  for (std::size_t r = 2; r < 7; ++r)
    for (std::size_t c = 3; c < 8; ++c) counts[r * 9 + c] = 2000.0;
  const PopulationGrid g(9, 9, -0.02, 0.0, kArc30, kArc30, counts);
  const auto cities = extract_cities(g);
  REQUIRE(cities.size() == 1);
  const City& city = cities[0];
  CHECK(city.population == 50000.0);
  CHECK(city.n_cells == 25);
  // expected center: max density (smallest cell area) with (row, col) tie-break
  Cell best{99, 99};
  double best_density = -1.0;
  for (std::size_t r = 2; r < 7; ++r)
    for (std::size_t c = 3; c < 8; ++c) {
      const double dens = 2000.0 / oracle_area(g, r);
      if (dens > best_density + 1e-12) {
        best_density = dens;
        best = {r, c};
      }
    }
  CHECK(city.center == best);
  CHECK(city.center_lat == doctest::Approx(g.row_center_lat(best.row)));
}

TEST_CASE("extract: center tie-break by smallest (row, col)") {
  // same row, so equal area; two max cells
  std::vector<double> counts = {3000, 5000, 5000, 3000, 3000, 3000, 3000, 3000};
  const PopulationGrid g(1, 8, 0.0, 0.0, kArc30, kArc30, counts);
  const auto cities = extract_cities(g, {1000.0, 1000.0, Connectivity::Four});
  REQUIRE(cities.size() == 1);
  CHECK(cities[0].center == Cell{0, 1});
}

TEST_CASE("extract: random 200x200 grid equals the flood-fill oracle") {
  const auto g = random_raster(200, 200, 2024, 35.0);
  check_against_oracle(g, 10000.0, Connectivity::Four);
  check_against_oracle(g, 20000.0, Connectivity::Four);
  check_against_oracle(g, 10000.0, Connectivity::Eight);
}

TEST_CASE("extract: raising pop_min removes exactly the mid-sized components") {
  const auto g = random_raster(200, 200, 99, -20.0);
  const auto low = extract_cities(g, {1000.0, 10000.0, Connectivity::Four});
  const auto high = extract_cities(g, {1000.0, 20000.0, Connectivity::Four});
  std::size_t mid = 0;
  for (const auto& c : low.cities()) mid += c.population < 20000.0;
  CHECK(mid > 0);
  CHECK(high.size() + mid == low.size());
  // survivors keep membership and relative order
  std::size_t j = 0;
  for (const auto& c : low.cities()) {
    if (c.population < 20000.0) continue;
    REQUIRE(j < high.size());
    CHECK(high[j].cells == c.cells);
    ++j;
  }
}

TEST_CASE("extract: qualifying cells are partitioned and cities are maximal") {
  const auto g = random_raster(60, 80, 5, 10.0);
  const auto all = extract_cities(g, {1000.0, 1e-9, Connectivity::Four});
  std::vector<int> owner(g.n_rows() * g.n_cols(), -1);
  for (const auto& c : all.cities())
    for (const auto& cell : c.cells) {
      CHECK(owner[cell.row * g.n_cols() + cell.col] == -1);
      owner[cell.row * g.n_cols() + cell.col] = static_cast<int>(c.id);
    }
  for (std::size_t r = 0; r < g.n_rows(); ++r)
    for (std::size_t c = 0; c < g.n_cols(); ++c) {
      const bool q = g.population(r, c) / oracle_area(g, r) >= 1000.0;
      CHECK(q == (owner[r * g.n_cols() + c] != -1));
      if (!q) continue;
      if (c + 1 < g.n_cols() && owner[r * g.n_cols() + c + 1] != -1)
        CHECK(owner[r * g.n_cols() + c + 1] == owner[r * g.n_cols() + c]);
      if (r + 1 < g.n_rows() && owner[(r + 1) * g.n_cols() + c] != -1)
        CHECK(owner[(r + 1) * g.n_cols() + c] == owner[r * g.n_cols() + c]);
    }
}

TEST_CASE("extract: ordering invariant and determinism") {
  const auto g = random_raster(120, 120, 11, 48.0);
  const auto a = extract_cities(g);
  const auto b = extract_cities(g);
  CHECK(cities_csv(a) == cities_csv(b));
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(city_precedes(a[i - 1], a[i]));
  for (const auto& c : a.cities()) {
    CHECK(c.population >= 10000.0);
    CHECK(std::find(c.cells.begin(), c.cells.end(), c.center) != c.cells.end());
  }
}

TEST_CASE("extract: no-data cells count as empty") {
  std::vector<double> counts(4 * 4, 3000.0);
  counts[5] = std::nan("");
  const PopulationGrid g(4, 4, 0.0, 0.0, kArc30, kArc30, counts, -9999.0);
  const auto cities = extract_cities(g, {1000.0, 1000.0, Connectivity::Four});
  REQUIRE(cities.size() == 1);
  CHECK(cities[0].n_cells == 15);
  CHECK(cities[0].population == 45000.0);
}

TEST_CASE("cities csv: round trip and header") {
  testutil::TempDir dir;
  const auto g = random_raster(80, 80, 3, 0.0);
  const auto cities = extract_cities(g);
  REQUIRE(cities.size() > 2);
  write_cities_csv(cities, dir / "c.csv");
  const auto back = load_cities_csv(dir / "c.csv");
  REQUIRE(back.size() == cities.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].population == cities[i].population);
    CHECK(back[i].center_lat == cities[i].center_lat);
    CHECK(back[i].center_lon == cities[i].center_lon);
    CHECK(back[i].n_cells == cities[i].n_cells);
    CHECK(back[i].center == cities[i].center);
  }
  CHECK(cities_csv(back) == cities_csv(cities));

  const CitySet empty;
  CHECK(cities_csv(empty) == "id,center_lat,center_lon,population,n_cells,center_row,center_col\n");
}

TEST_CASE("city set rejects out-of-order input") {
  City a, b;
  a.id = 0;
  a.population = 10;
  b.id = 1;
  b.population = 20;
  CHECK(error_kind([&] { CitySet({a, b}, {}); }) == ErrorKind::Data);
  const auto sorted = CitySet::from_unsorted({a, b});
  CHECK(sorted[0].population == 20);
  CHECK(sorted[1].id == 1);
}
