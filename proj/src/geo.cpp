#include "spatialcpl/geo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <tuple>
#include <string>
#include <utility>

#include "spatialcpl/error.hpp"
#include "spatialcpl/parallel.hpp"

namespace spatialcpl {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_coordinates(LatLon p) {
  if (!(std::abs(p.lat) <= 90.0) || !(std::abs(p.lon) <= 180.0))
    fail(ErrorKind::Domain, "coordinate (" + std::to_string(p.lat) + ", " + std::to_string(p.lon) +
                                ") outside valid lat/lon range");
}

// Compressed adjacency over dense node indices.
struct Adjacency {
  std::vector<std::size_t> offsets;
  std::vector<std::pair<std::size_t, double>> arcs;
};

Adjacency build_adjacency(const RoadNetwork& net) {
  const std::size_t n = net.node_count();
  std::vector<std::size_t> degree(n + 1, 0);
  for (const auto& e : net.edges()) {
    ++degree[net.index_of(e.u)];
    if (!e.oneway) ++degree[net.index_of(e.v)];
  }
  Adjacency adj;
  adj.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) adj.offsets[i + 1] = adj.offsets[i] + degree[i];
  adj.arcs.resize(adj.offsets[n]);
  std::vector<std::size_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const auto& e : net.edges()) {
    const std::size_t u = net.index_of(e.u);
    const std::size_t v = net.index_of(e.v);
    adj.arcs[fill[u]++] = {v, e.length_m};
    if (!e.oneway) adj.arcs[fill[v]++] = {u, e.length_m};
  }
  return adj;
}

std::vector<double> dijkstra(const Adjacency& adj, std::size_t source) {
  const std::size_t n = adj.offsets.size() - 1;
  std::vector<double> dist(n, kUnreachable);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (std::size_t a = adj.offsets[u]; a < adj.offsets[u + 1]; ++a) {
      const auto [v, w] = adj.arcs[a];
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.push({nd, v});
      }
    }
  }
  return dist;
}

}  // namespace

double great_circle_m(LatLon a, LatLon b) {
  check_coordinates(a);
  check_coordinates(b);
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = std::min(1.0, s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2);
  return 2.0 * kEarthRadiusKm * 1000.0 * std::asin(std::sqrt(h));
}

std::vector<double> shortest_path_from(const RoadNetwork& network, NodeId source) {
  const std::size_t s = network.index_of(source);
  return dijkstra(build_adjacency(network), s);
}

DistanceBuild build_distance_matrix(const CitySet& cities, const RoadNetwork* network,
                                    const DistanceBuildOptions& options) {
  const std::size_t n = cities.size();
  std::vector<double> values(n * n, 0.0);
  DistanceBuild out;

  if (network == nullptr) {
    parallel_for(n, options.threads, [&](std::size_t i) {
      const LatLon a{cities[i].center_lat, cities[i].center_lon};
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) values[i * n + j] = great_circle_m(a, {cities[j].center_lat, cities[j].center_lon});
    });
    out.matrix = DistanceMatrix(n, std::move(values), DistanceProvider::GreatCircle);
    return out;
  }

  if (!(options.snap_radius_km > 0.0)) fail(ErrorKind::Argument, "snap radius must be positive");
  const auto& nodes = network->nodes();
  // Nodes sorted by latitude; a snap search only scans the latitude band
  // that can lie within the snap radius.
  std::vector<std::size_t> by_lat(nodes.size());
  for (std::size_t i = 0; i < by_lat.size(); ++i) by_lat[i] = i;
  std::sort(by_lat.begin(), by_lat.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(nodes[a].lat, nodes[a].id) < std::tie(nodes[b].lat, nodes[b].id);
  });
  const double radius_m = options.snap_radius_km * 1000.0;
  const double band_deg = radius_m / (kEarthRadiusKm * 1000.0) / kDegToRad * 1.0000001;

  std::vector<std::size_t> snapped(n);
  std::vector<std::size_t> offenders;
  out.snaps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LatLon c{cities[i].center_lat, cities[i].center_lon};
    auto lo = std::lower_bound(by_lat.begin(), by_lat.end(), c.lat - band_deg,
                               [&](std::size_t k, double v) { return nodes[k].lat < v; });
    double best = kUnreachable;
    std::size_t best_node = 0;
    for (auto it = lo; it != by_lat.end() && nodes[*it].lat <= c.lat + band_deg; ++it) {
      const double d = great_circle_m(c, {nodes[*it].lat, nodes[*it].lon});
      if (d < best || (d == best && nodes[*it].id < nodes[best_node].id)) {
        best = d;
        best_node = *it;
      }
    }
    if (!(best <= radius_m)) {
      offenders.push_back(i);
      continue;
    }
    snapped[i] = best_node;
    out.snaps[i] = {i, nodes[best_node].id, best};
  }
  if (!offenders.empty()) {
    std::string list;
    for (std::size_t k = 0; k < offenders.size() && k < 20; ++k) list += (k ? ", " : "") + std::to_string(offenders[k]);
    if (offenders.size() > 20) list += ", ...";
    fail(ErrorKind::Snapping, std::to_string(offenders.size()) + " cities farther than " +
                                  std::to_string(options.snap_radius_km) + " km from the road network: " + list);
  }

  const Adjacency adj = build_adjacency(*network);
  parallel_for(n, options.threads, [&](std::size_t i) {
    const std::vector<double> dist = dijkstra(adj, snapped[i]);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) values[i * n + j] = dist[snapped[j]];
  });
  out.matrix = DistanceMatrix(n, std::move(values), DistanceProvider::Road);
  return out;
}

}  // namespace spatialcpl
