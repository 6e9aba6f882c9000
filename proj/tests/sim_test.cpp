#include <algorithm>
#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "scenfuzz/errors.hpp"
#include "scenfuzz/grammar.hpp"
#include "scenfuzz/sim.hpp"
#include "test_util.hpp"

using namespace scenfuzz;

namespace {

SimParams default_params() { return SimParams{}; }

double max_route_lateral(const SimulationOutcome& outcome) {
  double worst = 0.0;
  for (const auto& row : outcome.trace) {
    double lateral = 0.0;
    outcome.route.project(row[0].position, &lateral);
    worst = std::max(worst, lateral);
  }
  return worst;
}

double min_gap_to_agent(const SimulationOutcome& outcome, std::size_t agent) {
  double best = 1e9;
  for (const auto& row : outcome.trace) {
    OrientedBox ego{row[0].position, row[0].heading, outcome.agents[0].half_extents};
    OrientedBox other{row[agent].position, row[agent].heading,
                      outcome.agents[agent].half_extents};
    best = std::min(best, box_distance(ego, other));
  }
  return best;
}

}  // namespace

TEST(Sim, WeatherTablesStayInRange) {
  EXPECT_DOUBLE_EQ(weather_friction_multiplier(0), 1.0);
  EXPECT_DOUBLE_EQ(weather_sensing_multiplier(0), 1.0);
  for (int i = 0; i < 21; ++i) {
    EXPECT_GE(weather_friction_multiplier(i), 0.6);
    EXPECT_LE(weather_friction_multiplier(i), 1.0);
    EXPECT_GE(weather_sensing_multiplier(i), 0.7);
    EXPECT_LE(weather_sensing_multiplier(i), 1.0);
  }
  // out-of-range indices clamp to the table ends
  EXPECT_DOUBLE_EQ(weather_friction_multiplier(-3), weather_friction_multiplier(0));
  EXPECT_DOUBLE_EQ(weather_friction_multiplier(99), weather_friction_multiplier(20));
  EXPECT_DOUBLE_EQ(weather_sensing_multiplier(99), weather_sensing_multiplier(20));
}

TEST(Sim, EnumStrings) {
  EXPECT_EQ(to_string(AgentKind::Ego), "ego");
  EXPECT_EQ(to_string(AgentKind::Pedestrian), "pedestrian");
  EXPECT_EQ(to_string(Termination::Violation), "violation");
  EXPECT_EQ(to_string(Termination::DestinationReached), "destination_reached");
  EXPECT_EQ(to_string(Termination::Timeout), "timeout");
}

TEST(Sim, BuildWorldRequiresMapRouteAndMatchingVector) {
  SearchSpaceSchema no_map = parse_search_space(R"({"a": [0, 1]})");
  EXPECT_THROW(build_world(no_map, {0.5}, default_params()), SchemaError);

  SearchSpaceSchema no_route = parse_search_space(R"({"map_id": "straight_road", "a": [0, 1]})");
  EXPECT_THROW(build_world(no_route, {0.5}, default_params()), SchemaError);

  SearchSpaceSchema ok = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [20, -1.75]],
    "a": [0, 1]
  })");
  EXPECT_THROW(build_world(ok, {0.5, 0.5}, default_params()), SchemaError);
  EXPECT_NO_THROW(build_world(ok, {0.5}, default_params()));
}

TEST(Sim, EgoSpawnsOnRouteAtCruiseSpeed) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [20, -1.75]]
  })");
  World world = build_world(schema, {}, default_params());
  ASSERT_EQ(world.agents.size(), 1u);
  EXPECT_EQ(world.agents[0].kind, AgentKind::Ego);
  EXPECT_NEAR(world.agents[0].position.x, -50.0, 1e-9);
  EXPECT_NEAR(world.agents[0].position.y, -1.75, 1e-9);
  EXPECT_NEAR(world.agents[0].heading, 0.0, 1e-9);
  EXPECT_DOUBLE_EQ(world.agents[0].speed, default_params().ego.cruise_speed);
}

TEST(Sim, UnobstructedCruiseReachesDestination) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [20, -1.75]],
    "background": {"road_friction": [0.9, 0.9], "weather_index": [0, 0, "int"]}
  })");
  SimulationOutcome outcome = run(schema, {0.9, 0.0}, default_params());
  EXPECT_EQ(outcome.termination, Termination::DestinationReached);
  EXPECT_FALSE(outcome.violation.has_value());
  EXPECT_TRUE(outcome.collisions.empty());
  EXPECT_LT(max_route_lateral(outcome), 0.5);
  // trace holds the initial state plus one row per step
  EXPECT_EQ(outcome.trace.size(), static_cast<std::size_t>(outcome.steps) + 1);
}

TEST(Sim, RightTurnFollowsRouteThroughJunction) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "t_junction",
    "ego_route": [[1.75, -55], [1.75, -5], [2.2, -2.6], [3.2, -1.9], [5, -1.75], [55, -1.75]]
  })");
  SimulationOutcome outcome = run(schema, {}, default_params());
  EXPECT_EQ(outcome.termination, Termination::DestinationReached);
  EXPECT_FALSE(outcome.violation.has_value());
  // pure pursuit smooths the corner but stays close to the route
  EXPECT_LT(max_route_lateral(outcome), 1.5);
  // final heading is east along the exit arm
  double final_heading = outcome.trace.back()[0].heading;
  EXPECT_LT(std::abs(wrap_angle(final_heading)), deg2rad(15.0));
}

TEST(Sim, StandingVehicleAheadStallsTheEgo) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [50, -1.75]],
    "vehicle_0": {
      "setup": {"type": [0, 0, "int"], "location": {"x": [0, 0], "y": [-15, -15]},
                "yaw": [0, 0], "initial_speed": [0, 0]}
    }
  })");
  SimulationOutcome outcome = run(schema, {0, 0, -15, 0, 0}, default_params());
  ASSERT_EQ(outcome.agents.size(), 2u);
  EXPECT_EQ(outcome.termination, Termination::Timeout);
  EXPECT_FALSE(outcome.violation.has_value());
  EXPECT_TRUE(outcome.collisions.empty());
  EXPECT_GT(min_gap_to_agent(outcome, 1), 1.0);
  // stopped for good once the obstacle is inside the sensing cone
  EXPECT_DOUBLE_EQ(outcome.trace.back()[0].speed, 0.0);
}

TEST(Sim, RearEndByNpcIsNotAViolation) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [100, -1.75]],
    "vehicle_0": {
      "setup": {"type": [0, 0, "int"], "location": {"x": [0, 0], "y": [10, 10]},
                "yaw": [0, 0], "initial_speed": [12, 12]},
      "trigger_event": {"trigger_distance": [200, 200], "target_speed": [12, 12],
                        "is_waypoint_follower": [0, 0, "int"], "avoid_collision": [0, 0, "int"],
                        "distance_to_travel": [900, 900],
                        "target": {"x": [0, 0], "y": [0, 0], "yaw": [0, 0]}}
    }
  })");
  ScenarioVector v = {0, 0, 10, 0, 12, 200, 12, 0, 0, 900, 0, 0, 0};
  ASSERT_EQ(v.size(), schema.dimension());
  SimulationOutcome outcome = run(schema, v, default_params());
  // contact happened, but never inside the ego's forward view at onset
  EXPECT_FALSE(outcome.collisions.empty());
  EXPECT_FALSE(outcome.violation.has_value());
  EXPECT_NE(outcome.termination, Termination::Violation);
}

TEST(Sim, LatePedestrianAheadIsACountedCollision) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [50, -1.75]],
    "background": {"road_friction": [0.9, 0.9], "weather_index": [0, 0, "int"]},
    "pedestrian_0": {
      "setup": {"type": [0, 0, "int"], "location": {"x": [0, 0], "y": [-5, -5]},
                "yaw": [0, 0]},
      "trigger_event": {"trigger_distance": [0, 0], "target_speed": [0, 0],
                        "distance_to_travel": [0, 0]}
    }
  })");
  ScenarioVector v = {0.9, 0, 0, 0, -5, 0, 0, 0, 0};
  ASSERT_EQ(v.size(), schema.dimension());
  SimulationOutcome outcome = run(schema, v, default_params());
  EXPECT_EQ(outcome.termination, Termination::Violation);
  ASSERT_TRUE(outcome.violation.has_value());
  EXPECT_EQ(outcome.violation->type, ViolationType::Collision);
  EXPECT_EQ(outcome.violation->collision.other_kind, AgentKind::Pedestrian);
  EXPECT_TRUE(outcome.violation->collision.bearing_in_fov);
  // too close to brake down from cruise: impact speed stays well above zero
  EXPECT_GT(outcome.violation->collision.ego_speed_at_impact, 2.0);
}

TEST(Sim, ObjectPlacementUsesRelativeFrame) {
  // anchor halfway along the route, heading east: local x is left (north),
  // negative local y is ahead (east)
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [50, -1.75]],
    "center_transforms": {"static_0": ["waypoint_ratio", 0.5]},
    "static_0": {
      "setup": {"type": [0, 0, "int"], "location": {"x": [2, 2], "y": [-3, -3]},
                "yaw": [90, 90]}
    }
  })");
  World world = build_world(schema, {0, 2, -3, 90}, default_params());
  ASSERT_EQ(world.agents.size(), 2u);
  EXPECT_NEAR(world.agents[1].position.x, 3.0, 1e-9);   // mid route +3 ahead
  EXPECT_NEAR(world.agents[1].position.y, 0.25, 1e-9);  // 2 left of y=-1.75
  EXPECT_NEAR(world.agents[1].heading, deg2rad(90.0), 1e-9);
}

TEST(Sim, AbsoluteTransformTakesHeadingFromRoute) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "crossing",
    "ego_route": [[-55, -1.75], [55, -1.75]],
    "center_transforms": {"vehicle_0": ["absolute", 15.0, 1.75]},
    "vehicle_0": {
      "setup": {"type": [0, 0, "int"], "location": {"x": [0, 0], "y": [0, 0]},
                "yaw": [180, 180], "initial_speed": [0, 0]}
    }
  })");
  World world = build_world(schema, {0, 0, 0, 180, 0}, default_params());
  ASSERT_EQ(world.agents.size(), 2u);
  EXPECT_NEAR(world.agents[1].position.x, 15.0, 1e-9);
  EXPECT_NEAR(world.agents[1].position.y, 1.75, 1e-9);
  // frame heading is east (route direction at the projection), yaw 180 flips it
  EXPECT_NEAR(std::abs(world.agents[1].heading), deg2rad(180.0), 1e-9);
}

TEST(Sim, AgentCountFieldCapsAtDeclaredBlocks) {
  const char* json = R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [50, -1.75]],
    "agents": {"num_vehicles": [0, 5, "int"]},
    "vehicle_0": {
      "setup": {"type": [0, 0, "int"], "location": {"x": [0, 0], "y": [-20, -20]},
                "yaw": [0, 0], "initial_speed": [0, 0]}
    }
  })";
  SearchSpaceSchema schema = parse_search_space(json);
  World none = build_world(schema, {0, 0, 0, -20, 0, 0}, default_params());
  EXPECT_EQ(none.agents.size(), 1u);
  World capped = build_world(schema, {5, 0, 0, -20, 0, 0}, default_params());
  EXPECT_EQ(capped.agents.size(), 2u);
}

TEST(Sim, OffMapSpawnIsClampedAndFlagged) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [50, -1.75]],
    "static_0": {
      "setup": {"type": [0, 0, "int"], "location": {"x": [0, 0], "y": [-500, -500]},
                "yaw": [0, 0]}
    }
  })");
  SimulationOutcome outcome = run(schema, {0, 0, -500, 0}, default_params());
  EXPECT_TRUE(outcome.spawn_clamped);
}

TEST(Sim, RepeatRunsAreBitwiseIdentical) {
  SearchSpaceSchema schema = parse_search_space(R"({
    "map_id": "straight_road",
    "ego_route": [[-50, -1.75], [50, -1.75]],
    "background": {"road_friction": [0.7, 0.9], "weather_index": [0, 14, "int"]},
    "pedestrian_0": {
      "setup": {"type": [0, 3, "int"], "location": {"x": [-10, 10], "y": [-10, 10]},
                "yaw": [0, 360]},
      "trigger_event": {"trigger_distance": [10, 50], "target_speed": [0, 4],
                        "distance_to_travel": [0, 50]}
    }
  })");
  Rng rng(77);
  for (int i = 0; i < 5; ++i) {
    ScenarioVector v = sample(schema, rng);
    SimulationOutcome a = run(schema, v, default_params());
    SimulationOutcome b = run(schema, v, default_params());
    ASSERT_EQ(a.steps, b.steps);
    ASSERT_EQ(a.termination, b.termination);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t s = 0; s < a.trace.size(); ++s) {
      for (std::size_t k = 0; k < a.trace[s].size(); ++k) {
        ASSERT_EQ(a.trace[s][k].position.x, b.trace[s][k].position.x);
        ASSERT_EQ(a.trace[s][k].position.y, b.trace[s][k].position.y);
        ASSERT_EQ(a.trace[s][k].heading, b.trace[s][k].heading);
        ASSERT_EQ(a.trace[s][k].speed, b.trace[s][k].speed);
      }
    }
  }
}
