#include "spatialcpl/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "spatialcpl/error.hpp"
#include "spatialcpl/sampling.hpp"

namespace spatialcpl {

std::vector<std::size_t> Partition::cell_sizes() const {
  std::vector<std::size_t> sizes(K, 0);
  for (std::size_t c : cell_of) ++sizes[c];
  return sizes;
}

std::vector<std::size_t> nearest_center(std::span<const CityId> members, std::span<const CityId> centers,
                                        const DistanceMatrix& d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> center_pos(n, centers.size());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    if (centers[k] >= n) fail(ErrorKind::Argument, "center id " + std::to_string(centers[k]) + " out of range");
    if (center_pos[centers[k]] != centers.size())
      fail(ErrorKind::Argument, "duplicate center " + std::to_string(centers[k]));
    center_pos[centers[k]] = k;
  }
  std::vector<std::size_t> out(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const CityId c = members[i];
    if (c >= n) fail(ErrorKind::Argument, "city id " + std::to_string(c) + " out of range");
    if (center_pos[c] != centers.size()) {
      out[i] = center_pos[c];
      continue;
    }
    const double* row = d.row(c);
    std::size_t best = centers.size();
    double best_d = kUnreachable;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double v = row[centers[k]];
      if (v < best_d) {
        best_d = v;
        best = k;
      }
    }
    if (best == centers.size())
      fail(ErrorKind::Connectivity, "city " + std::to_string(c) + " cannot reach any of the " +
                                        std::to_string(centers.size()) + " centers");
    out[i] = best;
  }
  return out;
}

Partition voronoi_partition(const CitySet& cities, std::span<const CityId> centers, const DistanceMatrix& d) {
  if (d.size() != cities.size())
    fail(ErrorKind::Argument, "distance matrix has " + std::to_string(d.size()) + " rows for " +
                                  std::to_string(cities.size()) + " cities");
  if (centers.empty()) fail(ErrorKind::Argument, "need at least one center");
  std::vector<CityId> all(cities.size());
  std::iota(all.begin(), all.end(), CityId{0});
  Partition p;
  p.cell_of = nearest_center(all, centers, d);
  p.centers.assign(centers.begin(), centers.end());
  p.K = centers.size();
  return p;
}

std::vector<CityId> random_centers(std::size_t n, std::size_t K, Rng& rng) {
  if (K > n) fail(ErrorKind::Argument, "cannot draw " + std::to_string(K) + " centers from " + std::to_string(n) +
                                           " cities");
  std::vector<CityId> pool(n);
  std::iota(pool.begin(), pool.end(), CityId{0});
  for (std::size_t i = 0; i < K; ++i) std::swap(pool[i], pool[i + rng.uniform_index(n - i)]);
  pool.resize(K);
  return pool;
}

Partition random_partition_with_sizes(const CitySet& cities, std::span<const std::size_t> sizes, Rng& rng,
                                      std::optional<std::span<const CityId>> pinned) {
  const std::size_t n = cities.size();
  Partition p;
  p.K = sizes.size();
  p.cell_of.assign(n, 0);
  if (!pinned) {
    const auto labels = shuffle_assign(n, sizes, false, rng);
    p.cell_of = labels;
    return p;
  }
  if (pinned->size() != sizes.size())
    fail(ErrorKind::Argument, "need exactly one pinned city per cell");
  // Order members as pinned first, then the rest by id.
  std::vector<CityId> order;
  order.reserve(n);
  std::vector<char> is_pinned(n, 0);
  for (CityId c : *pinned) {
    if (c >= n) fail(ErrorKind::Argument, "pinned city " + std::to_string(c) + " out of range");
    if (is_pinned[c]) fail(ErrorKind::Argument, "city " + std::to_string(c) + " pinned twice");
    is_pinned[c] = 1;
    order.push_back(c);
  }
  for (CityId c = 0; c < n; ++c)
    if (!is_pinned[c]) order.push_back(c);
  const auto labels = shuffle_assign(n, sizes, true, rng);
  for (std::size_t i = 0; i < n; ++i) p.cell_of[order[i]] = labels[i];
  return p;
}

HierarchicalPartition build_spatial_hierarchy(const CitySet& cities, std::size_t L, const DistanceMatrix& d) {
  if (L < 2) fail(ErrorKind::Argument, "L must be at least 2");
  if (cities.empty()) fail(ErrorKind::Argument, "cannot build a hierarchy over zero cities");
  if (d.size() != cities.size())
    fail(ErrorKind::Argument, "distance matrix has " + std::to_string(d.size()) + " rows for " +
                                  std::to_string(cities.size()) + " cities");
  std::vector<HierarchyNode> nodes;
  HierarchyNode root;
  root.layer = 1;
  root.center = 0;
  root.members.resize(cities.size());
  std::iota(root.members.begin(), root.members.end(), CityId{0});
  nodes.push_back(std::move(root));

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].members.size() < L) continue;
    const std::vector<CityId> centers(nodes[i].members.begin(), nodes[i].members.begin() + static_cast<long>(L));
    const auto cell = nearest_center(nodes[i].members, centers, d);
    std::vector<HierarchyNode> kids(L);
    for (std::size_t k = 0; k < L; ++k) {
      kids[k].layer = nodes[i].layer + 1;
      kids[k].center = centers[k];
      kids[k].parent = i;
    }
    for (std::size_t m = 0; m < cell.size(); ++m) kids[cell[m]].members.push_back(nodes[i].members[m]);
    for (auto& kid : kids) {
      nodes[i].children.push_back(nodes.size());
      nodes.push_back(std::move(kid));
    }
  }
  return HierarchicalPartition(L, HierarchyOrigin::Spatial, std::move(nodes));
}

HierarchicalPartition build_random_hierarchy(const HierarchicalPartition& tmpl, const CitySet& cities, Rng& rng) {
  const auto& tnodes = tmpl.nodes();
  if (tnodes.empty() || tnodes.front().members.size() != cities.size())
    fail(ErrorKind::Argument, "template hierarchy does not cover the " + std::to_string(cities.size()) + " cities");
  const std::size_t L = tmpl.L();
  std::vector<HierarchyNode> nodes(tnodes.size());
  nodes[0].layer = 1;
  nodes[0].center = 0;
  nodes[0].members.resize(cities.size());
  std::iota(nodes[0].members.begin(), nodes[0].members.end(), CityId{0});

  std::vector<std::size_t> sizes(L);
  for (std::size_t i = 0; i < tnodes.size(); ++i) {
    const auto& t = tnodes[i];
    auto& node = nodes[i];
    node.children = t.children;
    if (t.children.empty()) continue;
    if (t.children.size() != L || node.members.size() != t.members.size())
      fail(ErrorKind::Argument, "template node " + std::to_string(i) + " is inconsistent");
    for (std::size_t k = 0; k < L; ++k) sizes[k] = tnodes[t.children[k]].members.size();
    // Members are ascending by id, so the first L are the node's L largest.
    const auto labels = shuffle_assign(node.members.size(), sizes, true, rng);
    for (std::size_t k = 0; k < L; ++k) {
      auto& kid = nodes[t.children[k]];
      kid.layer = node.layer + 1;
      kid.center = node.members[k];
      kid.parent = i;
      kid.members.reserve(sizes[k]);
    }
    // Walking members in ascending order keeps every child's list sorted.
    for (std::size_t m = 0; m < labels.size(); ++m) nodes[t.children[labels[m]]].members.push_back(node.members[m]);
  }
  return HierarchicalPartition(L, HierarchyOrigin::Random, std::move(nodes));
}

std::vector<Hinterland> global_hinterlands(const HierarchicalPartition& h) {
  std::vector<Hinterland> out;
  std::vector<char> seen;
  for (std::size_t i = 0; i < h.nodes().size(); ++i) {
    const auto& node = h.nodes()[i];
    if (node.center >= seen.size()) seen.resize(node.center + 1, 0);
    if (seen[node.center]) continue;
    seen[node.center] = 1;
    out.push_back({node.center, node.members, node.layer, i});
  }
  std::sort(out.begin(), out.end(), [](const Hinterland& a, const Hinterland& b) { return a.center < b.center; });
  return out;
}

std::string hierarchy_json(const HierarchicalPartition& h) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["L"] = h.L();
  j["origin"] = h.origin() == HierarchyOrigin::Spatial ? "spatial" : "random";
  j["nodes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < h.nodes().size(); ++i) {
    const auto& n = h.nodes()[i];
    j["nodes"].push_back({{"index", i},
                          {"layer", n.layer},
                          {"center", n.center},
                          {"parent", n.parent ? nlohmann::json(*n.parent) : nlohmann::json(nullptr)},
                          {"members", n.members},
                          {"children", n.children}});
  }
  return j.dump();
}

}  // namespace spatialcpl
