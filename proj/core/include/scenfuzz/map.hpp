#pragma once

#include <string>
#include <vector>

#include "scenfuzz/geometry.hpp"

namespace scenfuzz {

/// One lane of a road, decomposed into convex quads (one per centerline
/// segment). is_opposite marks lanes whose traffic direction opposes the
/// map's canonical ego route.
struct Lane {
  Polyline centerline;
  double width = 3.5;
  bool is_opposite = false;
  std::vector<ConvexPolygon> quads;  // derived from centerline and width
};

struct RoadMap {
  std::string id;
  std::vector<Lane> lanes;
  std::vector<ConvexPolygon> junctions;
  Vec2 bounds_min;
  Vec2 bounds_max;

  bool in_drivable(Vec2 p) const;
  /// Inside an opposite-direction lane and not inside a junction.
  bool in_opposite_lane(Vec2 p) const;
  /// 0 when p lies in the drivable region, else distance to its boundary.
  double distance_to_drivable(Vec2 p) const;

  /// Travel distance from p along dir until entering an opposite-direction
  /// lane (capped). Junction cells do not shield the query.
  double ray_to_opposite(Vec2 p, Vec2 dir, double cap) const;
  /// Travel distance from p along dir until leaving the drivable region
  /// (capped); 0 when p itself is off the road.
  double ray_to_offroad(Vec2 p, Vec2 dir, double cap) const;
};

/// Builds one of the bundled maps: "straight_road", "t_junction", "crossing".
/// Throws SchemaError for unknown ids.
RoadMap make_map(const std::string& id);

/// True when every waypoint lies in the drivable region of the map.
bool route_on_map(const RoadMap& map, const Polyline& route);

}  // namespace scenfuzz
