#include "spatialcpl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "spatialcpl/error.hpp"
#include "spatialcpl/rng.hpp"

namespace spatialcpl {

namespace {

struct Site {
  double x;
  double y;
  double size;
  std::size_t layer;
};

const double kKmPerDegree = kEarthRadiusKm * std::numbers::pi / 180.0;

SynthSystem finalize(const std::vector<Site>& sites, const std::string& source) {
  std::vector<City> raw(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    raw[i].population = sites[i].size;
    raw[i].center = {0, i};
    raw[i].center_lat = sites[i].y / kKmPerDegree;
    raw[i].center_lon = sites[i].x / kKmPerDegree;
    raw[i].n_cells = 1;
    if (!(std::abs(raw[i].center_lat) <= 90.0) || !(std::abs(raw[i].center_lon) <= 180.0))
      fail(ErrorKind::Geometry, "synthetic domain too large to embed as lat/lon");
  }
  CityMetadata meta;
  meta.source = source;
  SynthSystem sys;
  sys.cities = CitySet::from_unsorted(std::move(raw), meta);
  const std::size_t n = sites.size();
  sys.xy_km.resize(n);
  sys.center_layer.resize(n);
  for (std::size_t id = 0; id < n; ++id) {
    const Site& s = sites[sys.cities[id].center.col];
    sys.xy_km[id] = {s.x, s.y};
    sys.center_layer[id] = s.layer;
  }
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j)
        d[i * n + j] = std::hypot(sys.xy_km[i].first - sys.xy_km[j].first, sys.xy_km[i].second - sys.xy_km[j].second) *
                       1000.0;
  sys.distances = DistanceMatrix(n, std::move(d), DistanceProvider::Planar);
  return sys;
}

void check_common(const SynthSpec& spec) {
  if (!(spec.alpha_gen > 0.0)) fail(ErrorKind::Argument, "alpha_gen must be positive");
  if (!(spec.min_size >= 1.0)) fail(ErrorKind::Argument, "min_size must be at least 1");
  if (!(spec.extent_km > 0.0)) fail(ErrorKind::Argument, "extent must be positive");
}

// Uniform point in a disc.
std::pair<double, double> in_disc(Rng& rng, double cx, double cy, double radius) {
  const double r = radius * std::sqrt(rng.uniform01());
  const double a = 2.0 * std::numbers::pi * rng.uniform01();
  return {cx + r * std::cos(a), cy + r * std::sin(a)};
}

}  // namespace

SynthSystem gen_iid_system(const SynthSpec& spec) {
  check_common(spec);
  if (spec.model != SynthModel::IidZipf) fail(ErrorKind::Argument, "spec model is not iid-zipf");
  if (spec.n < 1) fail(ErrorKind::Argument, "n must be at least 1");
  Rng rng(derive_seed(spec.seed, {hash_tag("synth/iid")}));
  std::vector<Site> sites(spec.n);
  for (auto& s : sites) s.size = rng.pareto(spec.alpha_gen, spec.min_size);
  for (auto& s : sites) {
    s.x = rng.uniform01() * spec.extent_km;
    s.y = rng.uniform01() * spec.extent_km;
    s.layer = 0;
  }
  return finalize(sites, "synth:iid-zipf");
}

std::vector<double> layer_spacings(const SynthSpec& spec) {
  std::vector<double> out(spec.depth + 1, 0.0);
  double s = spec.spacing_km;
  for (std::size_t k = 2; k <= spec.depth; ++k) {
    out[k] = s;
    s *= spec.spacing_ratio;
  }
  return out;
}

SynthSystem gen_hierarchical_system(const SynthSpec& spec) {
  check_common(spec);
  if (spec.model != SynthModel::Hierarchical) fail(ErrorKind::Argument, "spec model is not hierarchical");
  if (spec.depth < 1) fail(ErrorKind::Argument, "depth must be at least 1");
  if (spec.L_gen < 2) fail(ErrorKind::Argument, "L_gen must be at least 2");
  if (!(spec.spacing_km > 0.0) || !(spec.spacing_ratio > 0.0) || !(spec.cluster_radius_km >= 0.0))
    fail(ErrorKind::Argument, "spacing parameters must be positive");
  Rng rng(derive_seed(spec.seed, {hash_tag("synth/hierarchical")}));
  const auto spacing = layer_spacings(spec);

  // New children sit on a circle around their parent; the radius makes both
  // parent-child and child-child distances at least the layer spacing.
  const std::size_t fresh = spec.L_gen - 1;
  const double chord = fresh >= 2 ? 2.0 * std::sin(std::numbers::pi / static_cast<double>(fresh)) : 1.0;
  const double radius_factor = 1.0 / std::min(1.0, chord);

  std::vector<Site> centers{{spec.extent_km / 2.0, spec.extent_km / 2.0, 0.0, 1}};
  for (std::size_t k = 2; k <= spec.depth; ++k) {
    const double rho = spacing[k] * radius_factor * (1.0 + 1e-9);
    const std::size_t parents = centers.size();
    for (std::size_t p = 0; p < parents; ++p) {
      const double phase = 2.0 * std::numbers::pi * rng.uniform01();
      for (std::size_t j = 0; j < fresh; ++j) {
        const double a = phase + 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(fresh);
        centers.push_back({centers[p].x + rho * std::cos(a), centers[p].y + rho * std::sin(a), 0.0, k});
      }
    }
    for (std::size_t i = 0; i < centers.size(); ++i)
      for (std::size_t j = i + 1; j < centers.size(); ++j)
        if (std::hypot(centers[i].x - centers[j].x, centers[i].y - centers[j].y) < spacing[k])
          fail(ErrorKind::Geometry, "layer " + std::to_string(k) + " centers closer than the spacing " +
                                        std::to_string(spacing[k]) + " km; lower spacing_ratio");
  }
  const double finest = spec.depth >= 2 ? spacing[spec.depth] : spec.spacing_km;
  if (spec.satellites > 0 && 2.0 * spec.cluster_radius_km >= finest)
    fail(ErrorKind::Geometry, "satellite clusters of radius " + std::to_string(spec.cluster_radius_km) +
                                  " km overlap at the finest spacing " + std::to_string(finest) + " km");

  std::vector<Site> sites = centers;
  for (const auto& c : centers)
    for (std::size_t s = 0; s < spec.satellites; ++s) {
      const auto [x, y] = in_disc(rng, c.x, c.y, spec.cluster_radius_km);
      sites.push_back({x, y, 0.0, 0});
    }

  // Zipf sizes by global rank, assigned so that every subtree is a scaled
  // copy of the whole: within a layer, new centers are ranked child-slot
  // first, then by their parent's rank. Satellites come last, same rule.
  const std::size_t n = sites.size();
  std::vector<std::size_t> by_rank{0};
  std::size_t base = 1;
  for (std::size_t k = 2; k <= spec.depth; ++k) {
    const std::size_t parents = base;  // centers created before layer k, all of which spawn
    std::vector<std::size_t> fresh_ranked;
    for (std::size_t j = 0; j < fresh; ++j)
      for (std::size_t p : by_rank) fresh_ranked.push_back(base + p * fresh + j);
    by_rank.insert(by_rank.end(), fresh_ranked.begin(), fresh_ranked.end());
    base += parents * fresh;
  }
  const std::size_t center_count = by_rank.size();
  for (std::size_t s = 0; s < spec.satellites; ++s)
    for (std::size_t r = 0; r < center_count; ++r) by_rank.push_back(center_count + by_rank[r] * spec.satellites + s);
  std::vector<std::size_t> rank_of(n);
  for (std::size_t r = 0; r < n; ++r) rank_of[by_rank[r]] = r + 1;
  const double top = static_cast<double>(n) - 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    double s = spec.min_size * std::pow(top / (static_cast<double>(rank_of[i]) - 0.5), 1.0 / spec.alpha_gen);
    if (spec.size_noise_sigma > 0.0) s *= std::exp(spec.size_noise_sigma * rng.normal());
    sites[i].size = s;
  }
  return finalize(sites, "synth:hierarchical");
}

SynthSystem gen_spaced_system(const SpacedSpec& spec) {
  if (spec.L < 1 || spec.n < spec.L) fail(ErrorKind::Argument, "spaced system needs 1 <= L <= n");
  if (!(spec.extent_km > 0.0) || !(spec.cluster_radius_km >= 0.0) || !(spec.alpha_gen > 0.0))
    fail(ErrorKind::Argument, "invalid spaced-system geometry or size law");
  Rng rng(derive_seed(spec.seed, {hash_tag("synth/spaced")}));
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec.L))));
  const double cell = spec.extent_km / static_cast<double>(side);
  if (2.0 * spec.cluster_radius_km >= cell) fail(ErrorKind::Geometry, "clusters overlap on the lattice");

  std::vector<Site> sites;
  for (std::size_t h = 0; h < spec.L; ++h)
    sites.push_back({(static_cast<double>(h % side) + 0.5) * cell, (static_cast<double>(h / side) + 0.5) * cell, 0.0, 1});
  for (std::size_t i = spec.L; i < spec.n; ++i) {
    const Site& hub = sites[(i - spec.L) % spec.L];
    const auto [x, y] = in_disc(rng, hub.x, hub.y, spec.cluster_radius_km);
    sites.push_back({x, y, 0.0, 0});
  }

  std::vector<double> sizes(spec.n);
  for (auto& s : sizes) s = rng.pareto(spec.alpha_gen, spec.min_size);
  std::sort(sizes.begin(), sizes.end(), std::greater<>());

  std::vector<std::size_t> order(spec.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (spec.relocate_largest) {
    for (std::size_t i = spec.n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  } else {
    // hubs keep the largest sizes; the rest are shuffled over the satellites
    for (std::size_t i = spec.n - spec.L; i > 1; --i)
      std::swap(order[spec.L + i - 1], order[spec.L + rng.uniform_index(i)]);
  }
  for (std::size_t r = 0; r < spec.n; ++r) {
    sites[order[r]].size = sizes[r];
    sites[order[r]].layer = r < spec.L ? 1 : 0;
  }
  return finalize(sites, spec.relocate_largest ? "synth:spaced-null" : "synth:spaced");
}

}  // namespace spatialcpl
