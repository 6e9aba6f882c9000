#pragma once

#include <cmath>
#include <vector>

namespace scenfuzz {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  Vec2 perp_left() const { return {-y, x}; }
};

inline Vec2 heading_vec(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

constexpr double deg2rad(double d) { return d * 3.14159265358979323846 / 180.0; }

/// Axis-oriented rectangle in a local frame: center, heading of the long axis,
/// half extents along (heading, left-of-heading).
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  Vec2 half_extents{0.5, 0.5};

  std::vector<Vec2> corners() const;
};

/// Separating-axis overlap test for two oriented boxes.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

/// Smallest distance between the boundaries/interiors of two oriented boxes.
/// Zero when they touch or overlap.
double box_distance(const OrientedBox& a, const OrientedBox& b);

/// Distance from a point to an oriented box (0 inside).
double point_box_distance(Vec2 p, const OrientedBox& b);

bool point_in_box(Vec2 p, const OrientedBox& b);

/// Convex polygon given by counter-clockwise vertices.
struct ConvexPolygon {
  std::vector<Vec2> vertices;
};

bool point_in_polygon(Vec2 p, const ConvexPolygon& poly);

/// Entry/exit parameters of ray p + t*dir against a convex polygon.
/// Returns false when the ray misses; t_in may be negative when p is inside.
bool ray_polygon_interval(Vec2 p, Vec2 dir, const ConvexPolygon& poly, double& t_in, double& t_out);

/// Piecewise linear path utilities used for routes and lane centerlines.
struct Polyline {
  std::vector<Vec2> points;

  double length() const;
  /// Point at arc-length s (clamped to the ends).
  Vec2 at(double s) const;
  /// Heading of the segment containing arc-length s.
  double heading_at(double s) const;
  /// Arc-length of the closest point on the path to p, plus the lateral
  /// distance (unsigned) written to out_lateral.
  double project(Vec2 p, double* out_lateral = nullptr) const;
  /// Resample with uniform spacing; keeps the two endpoints.
  Polyline resample(double spacing) const;
};

}  // namespace scenfuzz
