#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spatialcpl/cities.hpp"
#include "spatialcpl/distance_matrix.hpp"
#include "spatialcpl/rng.hpp"

namespace spatialcpl {

using CityId = std::size_t;

struct Partition {
  std::vector<std::size_t> cell_of;  // city id -> cell index
  std::vector<CityId> centers;       // empty for random partitions
  std::size_t K = 0;

  std::vector<std::size_t> cell_sizes() const;
};

// Assigns each member to its nearest center, measuring distance from the
// member to the center (row = member). Ties go to the earlier center in
// `centers`; each center owns its own cell. Returns the center position
// for each member, aligned with `members`.
std::vector<std::size_t> nearest_center(std::span<const CityId> members, std::span<const CityId> centers,
                                        const DistanceMatrix& d);

Partition voronoi_partition(const CitySet& cities, std::span<const CityId> centers, const DistanceMatrix& d);

// K distinct ids drawn uniformly without replacement, in draw order.
std::vector<CityId> random_centers(std::size_t n, std::size_t K, Rng& rng);
inline std::vector<CityId> random_centers(const CitySet& cities, std::size_t K, Rng& rng) {
  return random_centers(cities.size(), K, rng);
}

// Uniform random partition with the given cell sizes. `pinned`, when given,
// lists one city per cell that is fixed in that cell.
Partition random_partition_with_sizes(const CitySet& cities, std::span<const std::size_t> sizes, Rng& rng,
                                      std::optional<std::span<const CityId>> pinned = std::nullopt);

enum class HierarchyOrigin { Spatial, Random };

struct HierarchyNode {
  std::size_t layer = 1;            // root = 1
  CityId center = 0;
  std::vector<CityId> members;      // ascending id = size-descending
  std::vector<std::size_t> children;  // child k is centered on the k-th largest member
  std::optional<std::size_t> parent;
};

// Tree of Voronoi (or random) cells; nodes are stored in breadth-first
// order, so layers are nondecreasing along `nodes()` and nodes()[0] is the
// root.
class HierarchicalPartition {
 public:
  HierarchicalPartition(std::size_t L, HierarchyOrigin origin, std::vector<HierarchyNode> nodes)
      : L_(L), origin_(origin), nodes_(std::move(nodes)) {}

  std::size_t L() const { return L_; }
  HierarchyOrigin origin() const { return origin_; }
  const std::vector<HierarchyNode>& nodes() const { return nodes_; }
  const HierarchyNode& root() const { return nodes_.front(); }
  std::size_t depth() const { return nodes_.empty() ? 0 : nodes_.back().layer; }

 private:
  std::size_t L_;
  HierarchyOrigin origin_;
  std::vector<HierarchyNode> nodes_;
};

HierarchicalPartition build_spatial_hierarchy(const CitySet& cities, std::size_t L, const DistanceMatrix& d);

// Same tree shape and cell sizes as `tmpl`; at every split the node's L
// largest members are pinned one per child and the rest are placed at random.
HierarchicalPartition build_random_hierarchy(const HierarchicalPartition& tmpl, const CitySet& cities, Rng& rng);

struct Hinterland {
  CityId center;
  std::vector<CityId> members;
  std::size_t layer;
  std::size_t node;  // index into HierarchicalPartition::nodes()
};

// One entry per distinct central city (ordered by center id): the member set
// of the smallest-layer node that city is the center of.
std::vector<Hinterland> global_hinterlands(const HierarchicalPartition& h);

std::string hierarchy_json(const HierarchicalPartition& h);

}  // namespace spatialcpl
