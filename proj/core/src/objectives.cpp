#include "scenfuzz/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scenfuzz {

ObjectiveVector compute_objectives(const SimulationOutcome& outcome, const RoadMap& map,
                                   const ObjectiveParams& params) {
  ObjectiveVector obj;
  obj.f_collision = -1.0;
  if (outcome.violation && outcome.violation->type == ViolationType::Collision) {
    obj.f_collision = outcome.violation->collision.ego_speed_at_impact;
  }

  double min_object = std::numeric_limits<double>::infinity();
  double min_view = params.fov_half_angle;
  double min_wronglane = params.ray_cap;
  double min_offroad = params.ray_cap;
  double max_deviation = 0.0;

  const std::size_t n_agents = outcome.agents.size();
  for (const auto& row : outcome.trace) {
    const AgentSnapshot& ego = row[0];
    OrientedBox ego_box{ego.position, ego.heading, outcome.agents[0].half_extents};

    // nearest other object by box distance
    double nearest = std::numeric_limits<double>::infinity();
    std::size_t nearest_idx = 0;
    for (std::size_t i = 1; i < n_agents; ++i) {
      OrientedBox other{row[i].position, row[i].heading, outcome.agents[i].half_extents};
      double d = box_distance(ego_box, other);
      if (d < nearest) {
        nearest = d;
        nearest_idx = i;
      }
    }
    if (nearest_idx != 0) {
      min_object = std::min(min_object, nearest);
      Vec2 rel = row[nearest_idx].position - ego.position;
      double bearing = std::abs(wrap_angle(std::atan2(rel.y, rel.x) - ego.heading));
      min_view = std::min(min_view, std::min(bearing, params.fov_half_angle));
    }

    // directional distances: ego heading, road normal, ego normal
    double s = outcome.route.project(ego.position);
    double road_heading = outcome.route.heading_at(s);
    const Vec2 dirs[5] = {heading_vec(ego.heading),
                          heading_vec(road_heading).perp_left(),
                          heading_vec(ego.heading).perp_left(),
                          heading_vec(road_heading).perp_left() * -1.0,
                          heading_vec(ego.heading).perp_left() * -1.0};
    for (const Vec2& dir : dirs) {
      min_wronglane = std::min(min_wronglane, map.ray_to_opposite(ego.position, dir, params.ray_cap));
      min_offroad = std::min(min_offroad, map.ray_to_offroad(ego.position, dir, params.ray_cap));
    }

    double lateral = 0.0;
    outcome.route.project(ego.position, &lateral);
    double theta = std::abs(wrap_angle(ego.heading - road_heading));
    max_deviation = std::max(max_deviation, theta * lateral);
  }

  obj.f_object = std::isfinite(min_object) ? min_object : params.ray_cap;
  obj.f_view = min_view;
  obj.f_wronglane = min_wronglane;
  obj.f_offroad = min_offroad;
  obj.f_deviation = max_deviation;
  return obj;
}

std::array<double, 3> folded_triple(const ObjectiveVector& obj, ViolationMode mode) {
  if (mode == ViolationType::Collision) {
    return {-obj.f_collision, obj.f_object, obj.f_view};
  }
  return {obj.f_wronglane, obj.f_offroad, -obj.f_deviation};
}

double fitness(const ObjectiveVector& obj, const FitnessWeights& weights, ViolationMode mode) {
  auto g = folded_triple(obj, mode);
  return weights.w[0] * g[0] + weights.w[1] * g[1] + weights.w[2] * g[2];
}

}  // namespace scenfuzz
