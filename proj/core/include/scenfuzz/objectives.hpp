#pragma once

#include <array>
#include <optional>

#include "scenfuzz/dedup.hpp"
#include "scenfuzz/sim.hpp"

namespace scenfuzz {

/// Per-run objective values. All are minimized by the search after sign
/// folding; raw values keep the simulator's units (m, m/s, rad, rad*m).
struct ObjectiveVector {
  double f_collision = -1.0;  // ego speed at impact, -1 when no collision
  double f_object = 0.0;      // closest box distance to any other object
  double f_view = 0.0;        // smallest |bearing| of the nearest object, clamped to the FOV
  double f_wronglane = 0.0;   // shortest directional distance to an opposite lane
  double f_offroad = 0.0;     // shortest directional distance off the drivable region
  double f_deviation = 0.0;   // max heading-error * lateral-deviation along the route
};

struct ObjectiveParams {
  double fov_half_angle = deg2rad(60.0);
  double ray_cap = 100.0;  // m, bound for the directional distance queries
};

ObjectiveVector compute_objectives(const SimulationOutcome& outcome, const RoadMap& map,
                                   const ObjectiveParams& params = {});

/// Which violation family the campaign optimizes for.
using ViolationMode = ViolationType;

struct FitnessWeights {
  std::array<double, 3> w{1.0, 1.0, 1.0};
};

/// The three active objectives with minimization signs folded in:
/// collision mode -> (-f_collision, f_object, f_view),
/// out-of-road mode -> (f_wronglane, f_offroad, -f_deviation).
std::array<double, 3> folded_triple(const ObjectiveVector& obj, ViolationMode mode);

/// Weighted sum of the folded triple; lower is closer to a violation.
double fitness(const ObjectiveVector& obj, const FitnessWeights& weights, ViolationMode mode);

}  // namespace scenfuzz
