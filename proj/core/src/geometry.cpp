#include "scenfuzz/geometry.hpp"

#include <algorithm>
#include <limits>

namespace scenfuzz {

double wrap_angle(double a) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  a = std::fmod(a, two_pi);
  if (a > 3.14159265358979323846) a -= two_pi;
  if (a <= -3.14159265358979323846) a += two_pi;
  return a;
}

std::vector<Vec2> OrientedBox::corners() const {
  Vec2 f = heading_vec(heading);
  Vec2 l = f.perp_left();
  Vec2 ex = f * half_extents.x;
  Vec2 ey = l * half_extents.y;
  return {center + ex + ey, center - ex + ey, center - ex - ey, center + ex - ey};
}

namespace {

// Projects corners onto axis and returns [min, max].
std::pair<double, double> project_onto(const std::vector<Vec2>& pts, Vec2 axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : pts) {
    double d = p.dot(axis);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {lo, hi};
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  auto ca = a.corners();
  auto cb = b.corners();
  const Vec2 axes[4] = {heading_vec(a.heading), heading_vec(a.heading).perp_left(),
                        heading_vec(b.heading), heading_vec(b.heading).perp_left()};
  for (const Vec2& axis : axes) {
    auto [alo, ahi] = project_onto(ca, axis);
    auto [blo, bhi] = project_onto(cb, axis);
    if (ahi < blo || bhi < alo) return false;
  }
  return true;
}

namespace {

double segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  auto point_seg = [](Vec2 p, Vec2 s0, Vec2 s1) {
    Vec2 d = s1 - s0;
    double len2 = d.dot(d);
    double t = len2 > 0.0 ? std::clamp((p - s0).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (p - (s0 + d * t)).norm();
  };
  auto intersects = [](Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1) {
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return (b - a).cross(c - a); };
    double o1 = orient(p0, p1, q0), o2 = orient(p0, p1, q1);
    double o3 = orient(q0, q1, p0), o4 = orient(q0, q1, p1);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
  };
  if (intersects(a0, a1, b0, b1)) return 0.0;
  return std::min(std::min(point_seg(a0, b0, b1), point_seg(a1, b0, b1)),
                  std::min(point_seg(b0, a0, a1), point_seg(b1, a0, a1)));
}

}  // namespace

double box_distance(const OrientedBox& a, const OrientedBox& b) {
  if (boxes_overlap(a, b)) return 0.0;
  auto ca = a.corners();
  auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, segment_distance(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4]));
    }
  }
  return best;
}

double point_box_distance(Vec2 p, const OrientedBox& b) {
  Vec2 f = heading_vec(b.heading);
  Vec2 l = f.perp_left();
  Vec2 d = p - b.center;
  double lx = std::abs(d.dot(f)) - b.half_extents.x;
  double ly = std::abs(d.dot(l)) - b.half_extents.y;
  double ox = std::max(lx, 0.0);
  double oy = std::max(ly, 0.0);
  return std::hypot(ox, oy);
}

bool point_in_box(Vec2 p, const OrientedBox& b) {
  Vec2 f = heading_vec(b.heading);
  Vec2 l = f.perp_left();
  Vec2 d = p - b.center;
  return std::abs(d.dot(f)) <= b.half_extents.x && std::abs(d.dot(l)) <= b.half_extents.y;
}

bool point_in_polygon(Vec2 p, const ConvexPolygon& poly) {
  const auto& v = poly.vertices;
  size_t n = v.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = v[i];
    Vec2 b = v[(i + 1) % n];
    if ((b - a).cross(p - a) < -1e-12) return false;
  }
  return true;
}

bool ray_polygon_interval(Vec2 p, Vec2 dir, const ConvexPolygon& poly, double& t_in,
                          double& t_out) {
  // Clip the infinite line p + t*dir against every edge half-plane.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  size_t n = v.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = v[i];
    Vec2 b = v[(i + 1) % n];
    Vec2 edge = b - a;
    Vec2 inward = edge.perp_left();  // CCW polygon: inside is left of each edge
    double denom = dir.dot(inward);
    double num = (a - p).dot(inward);
    if (std::abs(denom) < 1e-15) {
      if (num > 0.0) return false;  // parallel and outside: (p-a).inward < 0
      continue;
    }
    double t = num / denom;
    if (denom > 0.0) {
      lo = std::max(lo, t);
    } else {
      hi = std::min(hi, t);
    }
    if (lo > hi) return false;
  }
  t_in = lo;
  t_out = hi;
  return hi >= std::max(lo, 0.0);
}

double Polyline::length() const {
  double s = 0.0;
  for (size_t i = 1; i < points.size(); ++i) s += (points[i] - points[i - 1]).norm();
  return s;
}

Vec2 Polyline::at(double s) const {
  if (points.empty()) return {};
  if (s <= 0.0) return points.front();
  for (size_t i = 1; i < points.size(); ++i) {
    double seg = (points[i] - points[i - 1]).norm();
    if (s <= seg && seg > 0.0) {
      double t = s / seg;
      return points[i - 1] + (points[i] - points[i - 1]) * t;
    }
    s -= seg;
  }
  return points.back();
}

double Polyline::heading_at(double s) const {
  if (points.size() < 2) return 0.0;
  if (s < 0.0) s = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    double seg = (points[i] - points[i - 1]).norm();
    if ((s <= seg && seg > 0.0) || i + 1 == points.size()) {
      Vec2 d = points[i] - points[i - 1];
      return std::atan2(d.y, d.x);
    }
    s -= seg;
  }
  Vec2 d = points.back() - points[points.size() - 2];
  return std::atan2(d.y, d.x);
}

double Polyline::project(Vec2 p, double* out_lateral) const {
  double best_s = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  double acc = 0.0;
  if (points.size() == 1) {
    if (out_lateral) *out_lateral = (p - points[0]).norm();
    return 0.0;
  }
  for (size_t i = 1; i < points.size(); ++i) {
    Vec2 a = points[i - 1];
    Vec2 b = points[i];
    Vec2 d = b - a;
    double len2 = d.dot(d);
    double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    Vec2 q = a + d * t;
    double dist = (p - q).norm();
    if (dist < best_d) {
      best_d = dist;
      best_s = acc + t * std::sqrt(len2);
    }
    acc += std::sqrt(len2);
  }
  if (out_lateral) *out_lateral = best_d;
  return best_s;
}

Polyline Polyline::resample(double spacing) const {
  Polyline out;
  if (points.size() < 2 || spacing <= 0.0) return *this;
  double total = length();
  int n = std::max(1, static_cast<int>(std::ceil(total / spacing)));
  out.points.reserve(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    out.points.push_back(at(total * i / n));
  }
  return out;
}

}  // namespace scenfuzz
