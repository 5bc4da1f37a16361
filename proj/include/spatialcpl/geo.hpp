#pragma once

#include <optional>
#include <vector>

#include "spatialcpl/cities.hpp"
#include "spatialcpl/distance_matrix.hpp"
#include "spatialcpl/road_network.hpp"

namespace spatialcpl {

struct LatLon {
  double lat;
  double lon;
};

// Haversine distance on a sphere of radius kEarthRadiusKm.
double great_circle_m(LatLon a, LatLon b);

// Single-source shortest path lengths (meters) indexed by
// RoadNetwork::index_of; unreachable nodes hold kUnreachable.
std::vector<double> shortest_path_from(const RoadNetwork& network, NodeId source);

struct SnapRecord {
  std::size_t city_id;
  NodeId node;
  double snap_distance_m;
};

struct DistanceBuildOptions {
  double snap_radius_km = 20.0;
  unsigned threads = 1;
};

struct DistanceBuild {
  DistanceMatrix matrix;
  std::vector<SnapRecord> snaps;  // empty for great-circle matrices
};

// Road distances when a network is supplied, great-circle otherwise.
DistanceBuild build_distance_matrix(const CitySet& cities, const RoadNetwork* network,
                                    const DistanceBuildOptions& options = {});

}  // namespace spatialcpl
