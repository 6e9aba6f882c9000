#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scenfuzz/dedup.hpp"
#include "scenfuzz/geometry.hpp"
#include "scenfuzz/grammar.hpp"
#include "scenfuzz/map.hpp"

namespace scenfuzz {

enum class AgentKind { Ego, Vehicle, Pedestrian, Static };

std::string to_string(AgentKind k);

/// Ego controller knobs. The controller is deliberately imperfect: it follows
/// the route with pure pursuit, holds a cruise speed, and brakes in a straight
/// line only after an agent has stayed inside the sensing cone for the full
/// reaction delay. It never swerves.
struct EgoParams {
  double cruise_speed = 6.0;        // m/s
  double max_accel = 3.0;           // m/s^2
  double max_brake = 8.0;           // m/s^2, scaled by friction
  double fov_half_angle = deg2rad(60.0);
  double sensing_range = 30.0;      // m, scaled by weather
  double reaction_delay = 0.3;      // s of continuous detection before braking
  Vec2 half_extents{2.4, 1.0};      // m
  double lookahead_base = 3.0;      // m
  double lookahead_speed_gain = 0.5;
  double min_turn_radius = 4.0;     // m
  double destination_tolerance = 2.0;
};

struct SimParams {
  double dt = 0.1;       // 10 Hz fixed step
  int max_steps = 500;
  EgoParams ego;
  double vehicle_accel = 3.0;
  double vehicle_brake = 6.0;      // m/s^2, scaled by friction
  double pedestrian_accel = 2.5;
  double avoid_horizon = 1.0;      // s lookahead for avoid_collision agents
  double waypoint_tolerance = 1.5; // m
};

struct Agent {
  AgentKind kind = AgentKind::Vehicle;
  Vec2 position;
  double heading = 0.0;  // rad
  double speed = 0.0;    // m/s along heading
  Vec2 half_extents{0.5, 0.5};

  // behavior parameters, fixed at spawn
  int type_label = 0;
  int color_label = 0;
  double initial_speed = 0.0;
  double trigger_distance = 0.0;
  double target_speed = 0.0;
  double distance_to_travel = 0.0;
  bool waypoint_follower = false;
  bool avoid_collision = false;
  Vec2 target_point;
  double target_yaw = 0.0;

  // evolving state
  bool triggered = false;
  double traveled_since_trigger = 0.0;
  bool travel_done = false;

  OrientedBox box() const { return {position, heading, half_extents}; }
};

struct CollisionEvent {
  int step = 0;
  int agent_a = 0;  // lower index; 0 is the ego
  int agent_b = 0;
  bool onset = false;  // first step of this contact
};

enum class OutOfRoadKind { WrongLane, OffRoad };

struct CollisionInfo {
  AgentKind other_kind = AgentKind::Vehicle;
  double ego_speed_at_impact = 0.0;
  bool bearing_in_fov = false;
};

struct Violation {
  ViolationType type = ViolationType::Collision;
  int step = 0;
  CollisionInfo collision;          // type == Collision
  OutOfRoadKind out_of_road = OutOfRoadKind::WrongLane;  // type == OutOfRoad
};

struct World {
  RoadMap map;
  Polyline route;            // resampled ego route
  std::vector<Agent> agents; // agents[0] is the ego
  double friction = 1.0;     // brake-deceleration multiplier
  double sensing_scale = 1.0;
  double detect_timer = 0.0; // s of continuous detection
  int step_count = 0;
  bool spawn_clamped = false;
  bool destination_reached = false;
  std::vector<CollisionEvent> collisions;
  std::optional<Violation> violation;
  std::vector<std::pair<int, int>> active_contacts;
  // per-step pose history for the bearing window at impact; positions are
  // [step][agent] with the ego at index 0
  std::vector<std::vector<Vec2>> agent_positions;
  std::vector<double> ego_headings;
};

enum class Termination { Violation, DestinationReached, Timeout };

std::string to_string(Termination t);

struct AgentSnapshot {
  Vec2 position;
  double heading = 0.0;
  double speed = 0.0;
};

struct AgentMeta {
  AgentKind kind = AgentKind::Vehicle;
  Vec2 half_extents{0.5, 0.5};
};

/// Full record of one simulation: per-step agent states (index 0 is the
/// initial state), termination cause and any violation raised.
struct SimulationOutcome {
  std::vector<AgentMeta> agents;
  std::vector<std::vector<AgentSnapshot>> trace;  // trace[step][agent]
  std::optional<Violation> violation;
  Termination termination = Termination::Timeout;
  int steps = 0;
  bool spawn_clamped = false;
  std::vector<CollisionEvent> collisions;
  std::string map_id;
  Polyline route;
};

/// Instantiates the scenario encoded by v on the schema's map. Location
/// fields are resolved through each object's center transform (relative
/// x = left of the local route direction, negative y = ahead). Throws
/// SchemaError when the schema lacks a map or route.
World build_world(const SearchSpaceSchema& schema, const ScenarioVector& v,
                  const SimParams& params);

/// Advances every agent by one fixed step. Decisions for all agents are made
/// against the same start-of-step snapshot, then integrated together.
void step(World& world, const SimParams& params);

/// Runs a scenario to violation, destination or timeout. rng_seed is part of
/// the interface for reproducibility bookkeeping; the dynamics themselves are
/// noise-free.
SimulationOutcome run(const SearchSpaceSchema& schema, const ScenarioVector& v,
                      const SimParams& params, std::uint64_t rng_seed = 0);

/// Weather lookup tables (index clamped): friction multiplier in [0.6, 1.0]
/// and sensing-range multiplier in [0.7, 1.0].
double weather_friction_multiplier(int weather_index);
double weather_sensing_multiplier(int weather_index);

}  // namespace scenfuzz
