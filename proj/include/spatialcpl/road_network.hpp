#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

namespace spatialcpl {

using NodeId = std::int64_t;

struct RoadNode {
  NodeId id;
  double lat;
  double lon;
};

struct RoadEdge {
  NodeId u;
  NodeId v;
  double length_m;
  bool oneway;  // true: traversable u -> v only
};

// Road graph read from a nodes/edges CSV pair. Immutable once built.
class RoadNetwork {
 public:
  RoadNetwork(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges);

  const std::vector<RoadNode>& nodes() const { return nodes_; }
  const std::vector<RoadEdge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  bool contains(NodeId id) const { return index_.count(id) != 0; }
  // Dense index of a node id; throws a reference error for unknown ids.
  std::size_t index_of(NodeId id) const;

 private:
  std::vector<RoadNode> nodes_;
  std::vector<RoadEdge> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
};

// Reads `nodes.csv` and `edges.csv` from a directory.
RoadNetwork load_road_network(const std::filesystem::path& dir);
void write_road_network(const RoadNetwork& network, const std::filesystem::path& dir);

}  // namespace spatialcpl
