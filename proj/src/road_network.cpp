#include "spatialcpl/road_network.hpp"

#include <cmath>
#include <string>

#include "io_util.hpp"
#include "spatialcpl/error.hpp"

namespace spatialcpl {

RoadNetwork::RoadNetwork(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges) {
  for (const auto& n : nodes) {
    if (!(std::abs(n.lat) <= 90.0) || !(std::abs(n.lon) <= 180.0))
      fail(ErrorKind::Data, "node " + std::to_string(n.id) + " has out-of-range coordinates");
    auto [it, inserted] = index_.emplace(n.id, nodes_.size());
    if (inserted) {
      nodes_.push_back(n);
    } else {
      const auto& prev = nodes_[it->second];
      if (prev.lat != n.lat || prev.lon != n.lon)
        fail(ErrorKind::Data, "node " + std::to_string(n.id) + " listed twice with different coordinates");
    }
  }
  edges_.reserve(edges.size());
  for (const auto& e : edges) {
    if (!contains(e.u)) fail(ErrorKind::Reference, "edge references unknown node " + std::to_string(e.u));
    if (!contains(e.v)) fail(ErrorKind::Reference, "edge references unknown node " + std::to_string(e.v));
    if (e.u == e.v) fail(ErrorKind::Data, "self-loop edge at node " + std::to_string(e.u));
    if (!(e.length_m > 0.0) || !std::isfinite(e.length_m))
      fail(ErrorKind::Data, "edge " + std::to_string(e.u) + "-" + std::to_string(e.v) + " has nonpositive length");
    edges_.push_back(e);
  }
}

std::size_t RoadNetwork::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorKind::Reference, "unknown node id " + std::to_string(id));
  return it->second;
}

namespace {

void expect_header(std::string_view line, std::string_view expected, const std::string& file) {
  if (io::trim(line) != expected)
    fail(ErrorKind::Format, file + ": expected header '" + std::string(expected) + "'");
}

}  // namespace

RoadNetwork load_road_network(const std::filesystem::path& dir) {
  const std::string nodes_file = (dir / "nodes.csv").string();
  const std::string edges_file = (dir / "edges.csv").string();
  std::vector<RoadNode> nodes;
  {
    const std::string text = io::read_file(nodes_file);
    const auto ls = io::lines(text);
    if (ls.empty()) fail(ErrorKind::Format, nodes_file + ": missing header");
    expect_header(ls[0], "node_id,lat,lon", nodes_file);
    for (std::size_t i = 1; i < ls.size(); ++i) {
      if (io::trim(ls[i]).empty()) continue;
      const auto f = io::split(ls[i], ',');
      auto id = f.size() == 3 ? io::parse_int(f[0]) : std::nullopt;
      auto lat = f.size() == 3 ? io::parse_double(f[1]) : std::nullopt;
      auto lon = f.size() == 3 ? io::parse_double(f[2]) : std::nullopt;
      if (!id || !lat || !lon) fail(ErrorKind::Format, nodes_file + ": malformed line " + std::to_string(i + 1));
      nodes.push_back({*id, *lat, *lon});
    }
  }
  std::vector<RoadEdge> edges;
  {
    const std::string text = io::read_file(edges_file);
    const auto ls = io::lines(text);
    if (ls.empty()) fail(ErrorKind::Format, edges_file + ": missing header");
    expect_header(ls[0], "u,v,length_m,oneway", edges_file);
    for (std::size_t i = 1; i < ls.size(); ++i) {
      if (io::trim(ls[i]).empty()) continue;
      const auto f = io::split(ls[i], ',');
      if (f.size() != 4) fail(ErrorKind::Format, edges_file + ": malformed line " + std::to_string(i + 1));
      auto u = io::parse_int(f[0]);
      auto v = io::parse_int(f[1]);
      auto len = io::parse_double(f[2]);
      auto oneway = io::parse_int(f[3]);
      if (!u || !v || !len || !oneway || (*oneway != 0 && *oneway != 1))
        fail(ErrorKind::Format, edges_file + ": malformed line " + std::to_string(i + 1));
      edges.push_back({*u, *v, *len, *oneway == 1});
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

void write_road_network(const RoadNetwork& network, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string nodes = "node_id,lat,lon\n";
  for (const auto& n : network.nodes())
    nodes += std::to_string(n.id) + "," + io::format_double(n.lat) + "," + io::format_double(n.lon) + "\n";
  std::string edges = "u,v,length_m,oneway\n";
  for (const auto& e : network.edges())
    edges += std::to_string(e.u) + "," + std::to_string(e.v) + "," + io::format_double(e.length_m) + "," +
             (e.oneway ? "1" : "0") + "\n";
  io::open_out(dir / "nodes.csv") << nodes;
  io::open_out(dir / "edges.csv") << edges;
}

}  // namespace spatialcpl
