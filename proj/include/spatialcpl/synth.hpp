#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "spatialcpl/cities.hpp"
#include "spatialcpl/distance_matrix.hpp"

namespace spatialcpl {

enum class SynthModel { IidZipf, Hierarchical };

struct SynthSpec {
  SynthModel model = SynthModel::IidZipf;
  // iid-zipf
  std::size_t n = 100;
  // hierarchical: depth-level tree of centers, each center spawning L_gen - 1
  // new centers per level, plus `satellites` small cities per final center.
  std::size_t L_gen = 3;
  std::size_t depth = 4;
  std::size_t satellites = 8;
  double spacing_ratio = 0.3;  // layer-(k+1) spacing / layer-k spacing
  double size_noise_sigma = 0.0;  // multiplicative lognormal jitter on sizes
  // size law
  double alpha_gen = 1.0;
  double min_size = 10000.0;
  // geometry (km)
  double extent_km = 1000.0;
  double cluster_radius_km = 10.0;
  double spacing_km = 300.0;  // separation of layer-2 centers
  std::uint64_t seed = 0;
};

struct SynthSystem {
  CitySet cities;
  DistanceMatrix distances;
  std::vector<std::pair<double, double>> xy_km;  // planar position per city id
  // Layer at which each city first appears as a center (0 for satellites and
  // iid cities); indexed by city id.
  std::vector<std::size_t> center_layer;
};

// Planar positions are embedded as lat/lon on an equatorial patch (1 degree
// = R * pi / 180 km) so the cities CSV stays valid; distances are exact
// Euclidean meters. Synthetic cities store their generation index in
// center.col so that the size order has a deterministic tie-break.
SynthSystem gen_iid_system(const SynthSpec& spec);
SynthSystem gen_hierarchical_system(const SynthSpec& spec);

// Minimum separation each layer's centers are guaranteed, index k = layer
// (entries 0 and 1 unused).
std::vector<double> layer_spacings(const SynthSpec& spec);

struct SpacedSpec {
  std::size_t n = 200;
  std::size_t L = 5;  // number of large cities, one per cluster
  double extent_km = 1000.0;
  double cluster_radius_km = 60.0;
  double alpha_gen = 1.0;
  double min_size = 10000.0;
  // Null variant: the L largest sizes are moved to L sites drawn uniformly
  // from all n sites instead of the cluster hubs.
  bool relocate_largest = false;
  std::uint64_t seed = 0;
};

// L clusters on a square lattice; the L largest cities sit at the cluster
// hubs and the remaining cities are spread around the hubs.
SynthSystem gen_spaced_system(const SpacedSpec& spec);

}  // namespace spatialcpl
