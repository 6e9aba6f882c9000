#include "scenfuzz/sim.hpp"

#include <algorithm>
#include <cmath>

#include "scenfuzz/errors.hpp"

namespace scenfuzz {

std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Ego: return "ego";
    case AgentKind::Vehicle: return "vehicle";
    case AgentKind::Pedestrian: return "pedestrian";
    case AgentKind::Static: return "static";
  }
  return "unknown";
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Violation: return "violation";
    case Termination::DestinationReached: return "destination_reached";
    case Termination::Timeout: return "timeout";
  }
  return "unknown";
}

namespace {

// 21 weather presets, roughly ordered from clear noon to heavy rain at night.
constexpr int kWeatherCount = 21;
constexpr double kWeatherFriction[kWeatherCount] = {
    1.00, 0.97, 0.95, 0.92, 0.90, 0.85, 0.82, 0.78, 0.75, 0.72, 0.70,
    0.95, 0.90, 0.85, 0.80, 0.68, 0.66, 0.64, 0.62, 0.61, 0.60};
constexpr double kWeatherSensing[kWeatherCount] = {
    1.00, 0.98, 0.95, 0.92, 0.90, 0.85, 0.82, 0.80, 0.78, 0.75, 0.72,
    0.88, 0.84, 0.80, 0.76, 0.74, 0.73, 0.72, 0.71, 0.70, 0.70};

// vehicle half extents by type label
constexpr int kVehicleTypeCount = 6;
const Vec2 kVehicleSizes[kVehicleTypeCount] = {
    {2.4, 1.0}, {2.2, 0.95}, {2.6, 1.05}, {2.45, 1.0}, {2.3, 0.9}, {2.7, 1.1}};

const Vec2 kPedestrianSize = {0.4, 0.4};

constexpr int kStaticTypeCount = 4;
const Vec2 kStaticSizes[kStaticTypeCount] = {
    {0.5, 0.5}, {0.8, 0.4}, {0.4, 0.4}, {1.0, 0.5}};

int clamp_index(double raw, int count) {
  int i = static_cast<int>(std::llround(raw));
  return std::clamp(i, 0, count - 1);
}

struct FieldReader {
  const SearchSpaceSchema& schema;
  const ScenarioVector& v;

  std::optional<double> get(const std::string& path) const {
    std::size_t i = schema.index_of(path);
    if (i == SearchSpaceSchema::npos) return std::nullopt;
    return v[i];
  }
  double get_or(const std::string& path, double fallback) const {
    auto x = get(path);
    return x ? *x : fallback;
  }
};

// Local frame at a center transform: +x is left of the local route heading,
// -y is ahead along it (so y encodes the gap between ego and the object when
// the transform sits at the ego start).
struct LocalFrame {
  Vec2 origin;
  double heading = 0.0;

  Vec2 to_world(Vec2 local) const {
    Vec2 fwd = heading_vec(heading);
    Vec2 left = fwd.perp_left();
    return origin + fwd * (-local.y) + left * local.x;
  }
  double yaw_to_world(double yaw_deg) const { return wrap_angle(heading + deg2rad(yaw_deg)); }
};

LocalFrame resolve_frame(const SearchSpaceSchema& schema, const Polyline& route,
                         const std::string& object_key) {
  LocalFrame frame;
  auto it = schema.center_transforms.find(object_key);
  if (it == schema.center_transforms.end()) {
    frame.origin = route.points.front();
    frame.heading = route.heading_at(0.0);
    return frame;
  }
  const CenterTransform& ct = it->second;
  if (ct.kind == CenterTransform::Kind::Absolute) {
    frame.origin = ct.point;
    double s = route.project(ct.point);
    frame.heading = route.heading_at(s);
  } else {
    double s = ct.ratio * route.length();
    frame.origin = route.at(s);
    frame.heading = route.heading_at(s);
  }
  return frame;
}

void clamp_spawn(World& world, Agent& agent) {
  Vec2 lo = world.map.bounds_min;
  Vec2 hi = world.map.bounds_max;
  Vec2 p = agent.position;
  Vec2 q{std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y)};
  if (q.x != p.x || q.y != p.y) {
    agent.position = q;
    world.spawn_clamped = true;
  }
}

struct Decision {
  double accel = 0.0;     // m/s^2 along heading
  double yaw_rate = 0.0;  // rad/s
};

Decision decide_ego(const World& world, const SimParams& params) {
  const Agent& ego = world.agents[0];
  const EgoParams& ep = params.ego;
  Decision d;

  // pure pursuit toward a lookahead point on the route
  double s = world.route.project(ego.position);
  double lookahead = ep.lookahead_base + ep.lookahead_speed_gain * ego.speed;
  Vec2 target = world.route.at(s + lookahead);
  Vec2 to_target = target - ego.position;
  double alpha = wrap_angle(std::atan2(to_target.y, to_target.x) - ego.heading);
  double dist = std::max(to_target.norm(), 1e-6);
  double curvature = 2.0 * std::sin(alpha) / dist;
  double max_curv = 1.0 / ep.min_turn_radius;
  curvature = std::clamp(curvature, -max_curv, max_curv);
  d.yaw_rate = ego.speed * curvature;

  // proportional speed control, overridden by the naive braking rule
  bool braking = world.detect_timer >= ep.reaction_delay - 1e-9;
  double brake_limit = ep.max_brake * world.friction;
  if (braking) {
    d.accel = -brake_limit;
  } else {
    double wanted = (ep.cruise_speed - ego.speed) / params.dt;
    d.accel = std::clamp(wanted, -brake_limit, ep.max_accel);
  }
  return d;
}

bool ego_detects(const World& world, const SimParams& params) {
  const Agent& ego = world.agents[0];
  double range = params.ego.sensing_range * world.sensing_scale;
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    const Agent& a = world.agents[i];
    Vec2 rel = a.position - ego.position;
    if (rel.norm() > range) continue;
    double bearing = wrap_angle(std::atan2(rel.y, rel.x) - ego.heading);
    if (std::abs(bearing) <= params.ego.fov_half_angle) return true;
  }
  return false;
}

bool predicted_overlap(const World& world, std::size_t self, double horizon) {
  const Agent& me = world.agents[self];
  OrientedBox mine = me.box();
  mine.center = me.position + heading_vec(me.heading) * (me.speed * horizon);
  for (std::size_t j = 0; j < world.agents.size(); ++j) {
    if (j == self) continue;
    const Agent& other = world.agents[j];
    OrientedBox theirs = other.box();
    theirs.center = other.position + heading_vec(other.heading) * (other.speed * horizon);
    if (boxes_overlap(mine, theirs)) return true;
  }
  return false;
}

Decision decide_npc(const World& world, std::size_t idx, const SimParams& params) {
  const Agent& a = world.agents[idx];
  Decision d;
  if (a.kind == AgentKind::Static) return d;

  double accel_limit = a.kind == AgentKind::Pedestrian ? params.pedestrian_accel : params.vehicle_accel;
  double brake_limit = a.kind == AgentKind::Pedestrian ? params.pedestrian_accel
                                                       : params.vehicle_brake * world.friction;
  auto speed_toward = [&](double target) {
    double wanted = (target - a.speed) / params.dt;
    return std::clamp(wanted, -brake_limit, accel_limit);
  };

  if (!a.triggered) {
    if (a.kind == AgentKind::Vehicle) {
      d.accel = speed_toward(a.initial_speed);
    }
    // pedestrians stand still until triggered
    return d;
  }

  if (a.travel_done) {
    d.accel = speed_toward(0.0);
    return d;
  }

  if (a.kind == AgentKind::Vehicle && a.waypoint_follower) {
    Vec2 rel = a.target_point - a.position;
    double dist = rel.norm();
    if (dist > params.waypoint_tolerance) {
      double desired = std::atan2(rel.y, rel.x);
      double err = wrap_angle(desired - a.heading);
      double max_rate = std::max(a.speed, 1.0) / params.ego.min_turn_radius;
      d.yaw_rate = std::clamp(err / params.dt, -max_rate, max_rate);
      d.accel = speed_toward(a.target_speed);
    } else {
      d.accel = speed_toward(0.0);
    }
  } else {
    d.accel = speed_toward(a.target_speed);
  }

  if (a.kind == AgentKind::Vehicle && a.avoid_collision &&
      predicted_overlap(world, idx, params.avoid_horizon)) {
    d.accel = -brake_limit;
  }
  return d;
}

// True when the struck agent's bearing fell inside the forward FOV at any of
// the last `window` recorded steps (the final second before impact). Both
// poses come from the same step, so an agent ramming the ego from behind
// never counts as seen just because it now occupies road the ego left.
bool bearing_within_window(const World& world, int other_idx, int window,
                           const SimParams& params) {
  int n = static_cast<int>(world.agent_positions.size());
  for (int k = std::max(0, n - window); k < n; ++k) {
    Vec2 rel = world.agent_positions[k][other_idx] - world.agent_positions[k][0];
    double bearing = wrap_angle(std::atan2(rel.y, rel.x) - world.ego_headings[k]);
    if (std::abs(bearing) <= params.ego.fov_half_angle) return true;
  }
  return false;
}

void detect_collisions(World& world, const SimParams& params) {
  std::vector<std::pair<int, int>> now;
  int n = static_cast<int>(world.agents.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (world.agents[i].kind == AgentKind::Static &&
          world.agents[j].kind == AgentKind::Static) {
        continue;
      }
      if (!boxes_overlap(world.agents[i].box(), world.agents[j].box())) continue;
      now.emplace_back(i, j);
      bool onset = std::find(world.active_contacts.begin(), world.active_contacts.end(),
                             std::make_pair(i, j)) == world.active_contacts.end();
      world.collisions.push_back({world.step_count, i, j, onset});
      if (onset && i == 0 && !world.violation) {
        const Agent& other = world.agents[j];
        int window = static_cast<int>(std::lround(1.0 / params.dt));
        bool seen = bearing_within_window(world, j, window, params);
        if (seen) {
          Violation viol;
          viol.type = ViolationType::Collision;
          viol.step = world.step_count;
          viol.collision = {other.kind, world.agents[0].speed, true};
          world.violation = viol;
        }
      }
    }
  }
  world.active_contacts = std::move(now);
}

void check_out_of_road(World& world) {
  if (world.violation) return;
  const Agent& ego = world.agents[0];
  if (world.map.in_opposite_lane(ego.position)) {
    Violation viol;
    viol.type = ViolationType::OutOfRoad;
    viol.step = world.step_count;
    viol.out_of_road = OutOfRoadKind::WrongLane;
    world.violation = viol;
    return;
  }
  double off = world.map.distance_to_drivable(ego.position);
  if (off > ego.half_extents.y) {
    Violation viol;
    viol.type = ViolationType::OutOfRoad;
    viol.step = world.step_count;
    viol.out_of_road = OutOfRoadKind::OffRoad;
    world.violation = viol;
  }
}

}  // namespace

double weather_friction_multiplier(int weather_index) {
  return kWeatherFriction[std::clamp(weather_index, 0, kWeatherCount - 1)];
}

double weather_sensing_multiplier(int weather_index) {
  return kWeatherSensing[std::clamp(weather_index, 0, kWeatherCount - 1)];
}

World build_world(const SearchSpaceSchema& schema, const ScenarioVector& v,
                  const SimParams& params) {
  if (schema.map_id.empty()) throw SchemaError("schema has no map_id; cannot simulate");
  if (schema.ego_route.points.size() < 2) {
    throw SchemaError("schema needs an ego_route with at least two waypoints");
  }
  if (v.size() != schema.dimension()) {
    throw SchemaError("scenario vector length does not match the schema");
  }

  World world;
  world.map = make_map(schema.map_id);
  world.route = schema.ego_route.resample(1.0);

  FieldReader r{schema, v};
  world.friction = r.get_or("background.road_friction", 1.0);
  if (auto wx = r.get("background.weather_index")) {
    int wi = static_cast<int>(std::llround(*wx));
    world.friction *= weather_friction_multiplier(wi);
    world.sensing_scale = weather_sensing_multiplier(wi);
  }

  Agent ego;
  ego.kind = AgentKind::Ego;
  ego.position = world.route.points.front();
  ego.heading = world.route.heading_at(0.0);
  ego.speed = params.ego.cruise_speed;
  ego.half_extents = params.ego.half_extents;
  world.agents.push_back(ego);

  auto count_blocks = [&](const std::string& prefix) {
    int n = 0;
    while (schema.index_of(prefix + "_" + std::to_string(n) + ".setup.location.x") !=
           SearchSpaceSchema::npos) {
      ++n;
    }
    return n;
  };
  int declared_peds = count_blocks("pedestrian");
  int declared_vehs = count_blocks("vehicle");
  int declared_statics = count_blocks("static");
  int num_peds = static_cast<int>(std::llround(r.get_or("agents.num_pedestrians", declared_peds)));
  int num_vehs = static_cast<int>(std::llround(r.get_or("agents.num_vehicles", declared_vehs)));
  int num_statics = static_cast<int>(std::llround(r.get_or("agents.num_static", declared_statics)));
  num_peds = std::clamp(num_peds, 0, declared_peds);
  num_vehs = std::clamp(num_vehs, 0, declared_vehs);
  num_statics = std::clamp(num_statics, 0, declared_statics);

  for (int i = 0; i < num_peds; ++i) {
    std::string key = "pedestrian_" + std::to_string(i);
    LocalFrame frame = resolve_frame(schema, world.route, key);
    Agent a;
    a.kind = AgentKind::Pedestrian;
    a.type_label = clamp_index(r.get_or(key + ".setup.type", 0), 16);
    a.position = frame.to_world(
        {r.get_or(key + ".setup.location.x", 0), r.get_or(key + ".setup.location.y", 0)});
    a.heading = frame.yaw_to_world(r.get_or(key + ".setup.yaw", 0));
    a.half_extents = kPedestrianSize;
    a.trigger_distance = r.get_or(key + ".trigger_event.trigger_distance", 0);
    a.target_speed = r.get_or(key + ".trigger_event.target_speed", 0);
    a.distance_to_travel = r.get_or(key + ".trigger_event.distance_to_travel", 0);
    clamp_spawn(world, a);
    world.agents.push_back(a);
  }
  for (int i = 0; i < num_vehs; ++i) {
    std::string key = "vehicle_" + std::to_string(i);
    LocalFrame frame = resolve_frame(schema, world.route, key);
    Agent a;
    a.kind = AgentKind::Vehicle;
    a.type_label = clamp_index(r.get_or(key + ".setup.type", 0), 1024);
    a.color_label = clamp_index(r.get_or(key + ".setup.color", 0), 1024);
    a.half_extents = kVehicleSizes[a.type_label % kVehicleTypeCount];
    a.position = frame.to_world(
        {r.get_or(key + ".setup.location.x", 0), r.get_or(key + ".setup.location.y", 0)});
    a.heading = frame.yaw_to_world(r.get_or(key + ".setup.yaw", 0));
    a.speed = r.get_or(key + ".setup.initial_speed", 0);
    a.initial_speed = a.speed;
    a.trigger_distance = r.get_or(key + ".trigger_event.trigger_distance", 0);
    a.target_speed = r.get_or(key + ".trigger_event.target_speed", 0);
    a.distance_to_travel = r.get_or(key + ".trigger_event.distance_to_travel", 0);
    a.waypoint_follower =
        std::llround(r.get_or(key + ".trigger_event.is_waypoint_follower", 0)) != 0;
    a.avoid_collision = std::llround(r.get_or(key + ".trigger_event.avoid_collision", 0)) != 0;
    a.target_point = frame.to_world(
        {r.get_or(key + ".trigger_event.target.x", 0), r.get_or(key + ".trigger_event.target.y", 0)});
    a.target_yaw = frame.yaw_to_world(r.get_or(key + ".trigger_event.target.yaw", 0));
    clamp_spawn(world, a);
    world.agents.push_back(a);
  }
  for (int i = 0; i < num_statics; ++i) {
    std::string key = "static_" + std::to_string(i);
    LocalFrame frame = resolve_frame(schema, world.route, key);
    Agent a;
    a.kind = AgentKind::Static;
    a.type_label = clamp_index(r.get_or(key + ".setup.type", 0), 16);
    a.half_extents = kStaticSizes[a.type_label % kStaticTypeCount];
    a.position = frame.to_world(
        {r.get_or(key + ".setup.location.x", 0), r.get_or(key + ".setup.location.y", 0)});
    a.heading = frame.yaw_to_world(r.get_or(key + ".setup.yaw", 0));
    clamp_spawn(world, a);
    world.agents.push_back(a);
  }

  std::vector<Vec2> row;
  row.reserve(world.agents.size());
  for (const Agent& a : world.agents) row.push_back(a.position);
  world.agent_positions.push_back(std::move(row));
  world.ego_headings.push_back(world.agents[0].heading);
  return world;
}

void step(World& world, const SimParams& params) {
  Agent& ego = world.agents[0];

  // perception from the start-of-step snapshot
  if (ego_detects(world, params)) {
    world.detect_timer += params.dt;
  } else {
    world.detect_timer = 0.0;
  }

  // trigger checks against the ego's current position
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    Agent& a = world.agents[i];
    if (a.kind == AgentKind::Static || a.triggered) continue;
    if ((a.position - ego.position).norm() <= a.trigger_distance) a.triggered = true;
  }

  // all decisions from the same snapshot
  std::vector<Decision> decisions(world.agents.size());
  decisions[0] = decide_ego(world, params);
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    decisions[i] = decide_npc(world, i, params);
  }

  // integrate
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    Agent& a = world.agents[i];
    if (a.kind == AgentKind::Static) continue;
    a.heading = wrap_angle(a.heading + decisions[i].yaw_rate * params.dt);
    a.speed = std::max(0.0, a.speed + decisions[i].accel * params.dt);
    Vec2 delta = heading_vec(a.heading) * (a.speed * params.dt);
    a.position = a.position + delta;
    if (a.triggered && !a.travel_done) {
      a.traveled_since_trigger += delta.norm();
      bool limit_by_travel = !(a.kind == AgentKind::Vehicle && a.waypoint_follower);
      if (limit_by_travel && a.traveled_since_trigger >= a.distance_to_travel) {
        a.travel_done = true;
      }
      if (a.kind == AgentKind::Vehicle && a.waypoint_follower &&
          (a.position - a.target_point).norm() <= params.waypoint_tolerance) {
        a.travel_done = true;
      }
    }
  }

  world.step_count += 1;
  std::vector<Vec2> row;
  row.reserve(world.agents.size());
  for (const Agent& a : world.agents) row.push_back(a.position);
  world.agent_positions.push_back(std::move(row));
  world.ego_headings.push_back(ego.heading);

  detect_collisions(world, params);
  check_out_of_road(world);

  if (!world.violation &&
      (ego.position - world.route.points.back()).norm() <= params.ego.destination_tolerance) {
    world.destination_reached = true;
  }
}

SimulationOutcome run(const SearchSpaceSchema& schema, const ScenarioVector& v,
                      const SimParams& params, std::uint64_t /*rng_seed*/) {
  World world = build_world(schema, v, params);

  SimulationOutcome out;
  out.map_id = schema.map_id;
  out.route = world.route;
  out.spawn_clamped = world.spawn_clamped;
  out.agents.reserve(world.agents.size());
  for (const Agent& a : world.agents) out.agents.push_back({a.kind, a.half_extents});

  auto snapshot = [&]() {
    std::vector<AgentSnapshot> row;
    row.reserve(world.agents.size());
    for (const Agent& a : world.agents) row.push_back({a.position, a.heading, a.speed});
    out.trace.push_back(std::move(row));
  };
  snapshot();

  for (int i = 0; i < params.max_steps; ++i) {
    step(world, params);
    snapshot();
    if (world.violation) {
      out.termination = Termination::Violation;
      break;
    }
    if (world.destination_reached) {
      out.termination = Termination::DestinationReached;
      break;
    }
  }
  out.steps = world.step_count;
  out.violation = world.violation;
  out.collisions = std::move(world.collisions);
  return out;
}

}  // namespace scenfuzz
