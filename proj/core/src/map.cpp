#include "scenfuzz/map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scenfuzz/errors.hpp"

namespace scenfuzz {

namespace {

ConvexPolygon segment_quad(Vec2 a, Vec2 b, double width) {
  Vec2 dir = (b - a).normalized();
  Vec2 left = dir.perp_left() * (width * 0.5);
  // counter-clockwise order
  return ConvexPolygon{{a - left, b - left, b + left, a + left}};
}

void finish_lane(Lane& lane) {
  lane.quads.clear();
  for (size_t i = 1; i < lane.centerline.points.size(); ++i) {
    lane.quads.push_back(
        segment_quad(lane.centerline.points[i - 1], lane.centerline.points[i], lane.width));
  }
}

Lane straight_lane(Vec2 a, Vec2 b, double width, bool opposite) {
  Lane lane;
  lane.centerline.points = {a, b};
  lane.width = width;
  lane.is_opposite = opposite;
  finish_lane(lane);
  return lane;
}

ConvexPolygon square(Vec2 lo, Vec2 hi) {
  return ConvexPolygon{{{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}}};
}

void compute_bounds(RoadMap& map) {
  double inf = std::numeric_limits<double>::infinity();
  map.bounds_min = {inf, inf};
  map.bounds_max = {-inf, -inf};
  auto extend = [&](Vec2 p) {
    map.bounds_min.x = std::min(map.bounds_min.x, p.x);
    map.bounds_min.y = std::min(map.bounds_min.y, p.y);
    map.bounds_max.x = std::max(map.bounds_max.x, p.x);
    map.bounds_max.y = std::max(map.bounds_max.y, p.y);
  };
  for (const Lane& lane : map.lanes) {
    for (const ConvexPolygon& q : lane.quads) {
      for (Vec2 p : q.vertices) extend(p);
    }
  }
  for (const ConvexPolygon& j : map.junctions) {
    for (Vec2 p : j.vertices) extend(p);
  }
}

double point_polygon_distance(Vec2 p, const ConvexPolygon& poly) {
  if (point_in_polygon(p, poly)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = poly.vertices[i];
    Vec2 b = poly.vertices[(i + 1) % n];
    Vec2 d = b - a;
    double len2 = d.dot(d);
    double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (a + d * t)).norm());
  }
  return best;
}

}  // namespace

bool RoadMap::in_drivable(Vec2 p) const {
  for (const ConvexPolygon& j : junctions) {
    if (point_in_polygon(p, j)) return true;
  }
  for (const Lane& lane : lanes) {
    for (const ConvexPolygon& q : lane.quads) {
      if (point_in_polygon(p, q)) return true;
    }
  }
  return false;
}

bool RoadMap::in_opposite_lane(Vec2 p) const {
  for (const ConvexPolygon& j : junctions) {
    if (point_in_polygon(p, j)) return false;  // junction interior is shared
  }
  for (const Lane& lane : lanes) {
    if (!lane.is_opposite) continue;
    for (const ConvexPolygon& q : lane.quads) {
      if (point_in_polygon(p, q)) return true;
    }
  }
  return false;
}

double RoadMap::distance_to_drivable(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const ConvexPolygon& j : junctions) {
    best = std::min(best, point_polygon_distance(p, j));
    if (best == 0.0) return 0.0;
  }
  for (const Lane& lane : lanes) {
    for (const ConvexPolygon& q : lane.quads) {
      best = std::min(best, point_polygon_distance(p, q));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

double RoadMap::ray_to_opposite(Vec2 p, Vec2 dir, double cap) const {
  double best = cap;
  for (const Lane& lane : lanes) {
    if (!lane.is_opposite) continue;
    for (const ConvexPolygon& q : lane.quads) {
      double t_in, t_out;
      if (ray_polygon_interval(p, dir, q, t_in, t_out)) {
        double entry = std::max(t_in, 0.0);
        if (t_out >= 0.0) best = std::min(best, entry);
      }
    }
  }
  return best;
}

double RoadMap::ray_to_offroad(Vec2 p, Vec2 dir, double cap) const {
  // Merge the covered intervals of the ray against all drivable cells; the
  // answer is the end of the merged interval that contains t = 0.
  std::vector<std::pair<double, double>> spans;
  auto add_poly = [&](const ConvexPolygon& poly) {
    double t_in, t_out;
    if (ray_polygon_interval(p, dir, poly, t_in, t_out)) {
      double lo = std::max(t_in, 0.0);
      double hi = std::min(t_out, cap);
      if (hi >= lo) spans.emplace_back(lo, hi);
    }
  };
  for (const ConvexPolygon& j : junctions) add_poly(j);
  for (const Lane& lane : lanes) {
    for (const ConvexPolygon& q : lane.quads) add_poly(q);
  }
  if (spans.empty()) return 0.0;
  std::sort(spans.begin(), spans.end());
  const double glue = 1e-9;
  double reach = 0.0;
  bool covered_zero = false;
  for (const auto& [lo, hi] : spans) {
    if (lo <= reach + glue) {
      reach = std::max(reach, hi);
      covered_zero = true;
    } else {
      break;
    }
  }
  if (!covered_zero) return 0.0;
  return std::min(reach, cap);
}

RoadMap make_map(const std::string& id) {
  RoadMap map;
  map.id = id;
  const double w = 3.5;      // lane width
  const double h = w / 2.0;  // lane center offset from the road axis
  if (id == "straight_road") {
    map.lanes.push_back(straight_lane({-100, -h}, {100, -h}, w, false));
    map.lanes.push_back(straight_lane({100, h}, {-100, h}, w, true));
  } else if (id == "t_junction") {
    // Main road along x, side road along -y; canonical route drives north on
    // the side road and turns right (east) at the junction.
    map.junctions.push_back(square({-w, -w}, {w, w}));
    // main road, west arm
    map.lanes.push_back(straight_lane({-100, -h}, {-w, -h}, w, false));
    map.lanes.push_back(straight_lane({-w, h}, {-100, h}, w, true));
    // main road, east arm
    map.lanes.push_back(straight_lane({w, -h}, {100, -h}, w, false));
    map.lanes.push_back(straight_lane({100, h}, {w, h}, w, true));
    // side road below (ego approach: northbound on x = +h)
    map.lanes.push_back(straight_lane({h, -100}, {h, -w}, w, false));
    map.lanes.push_back(straight_lane({-h, -w}, {-h, -100}, w, true));
  } else if (id == "crossing") {
    // Four-way crossing; canonical route heads east through the junction.
    map.junctions.push_back(square({-w, -w}, {w, w}));
    map.lanes.push_back(straight_lane({-100, -h}, {-w, -h}, w, false));
    map.lanes.push_back(straight_lane({w, -h}, {100, -h}, w, false));
    map.lanes.push_back(straight_lane({-w, h}, {-100, h}, w, true));
    map.lanes.push_back(straight_lane({100, h}, {w, h}, w, true));
    // crossing road (perpendicular; not opposite-direction for the route)
    map.lanes.push_back(straight_lane({h, -100}, {h, -w}, w, false));
    map.lanes.push_back(straight_lane({h, w}, {h, 100}, w, false));
    map.lanes.push_back(straight_lane({-h, -w}, {-h, -100}, w, false));
    map.lanes.push_back(straight_lane({-h, 100}, {-h, w}, w, false));
  } else {
    throw SchemaError("unknown map id '" + id + "'");
  }
  compute_bounds(map);
  return map;
}

bool route_on_map(const RoadMap& map, const Polyline& route) {
  for (Vec2 p : route.points) {
    if (!map.in_drivable(p)) return false;
  }
  return true;
}

}  // namespace scenfuzz
