#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenfuzz/geometry.hpp"
#include "scenfuzz/rng.hpp"

namespace scenfuzz {

/// A concrete scenario is a flat vector of field values in schema order.
using ScenarioVector = std::vector<double>;

enum class FieldKind { Continuous, Discrete };

struct Distribution {
  enum class Kind { Uniform, Normal };
  Kind kind = Kind::Uniform;
  std::optional<double> mean;  // Normal only; empty means mid-range
  double variance = 0.0;       // Normal only
};

/// One searchable scenario parameter. Document order in the description file
/// defines the index of each field in a ScenarioVector.
struct FieldSpec {
  std::string name;  // dotted path, e.g. "vehicle_0.trigger_event.target_speed"
  FieldKind kind = FieldKind::Continuous;
  double min = 0.0;
  double max = 0.0;
  Distribution dist;

  bool changeable() const { return max > min; }
  double range() const { return max - min; }
};

/// Joint linear constraint sum_i coefficients[i] * field(labels[i]) <= value.
struct LinearConstraint {
  std::vector<double> coefficients;
  std::vector<std::string> labels;
  double value = 0.0;
  std::vector<std::size_t> indices;  // resolved field indices, parallel to labels
};

/// Dense form of a constraint over a full vector: dot(row, v) <= value.
struct ConstraintRow {
  std::vector<double> row;
  double value = 0.0;
};

/// Placement rule mapping an object's relative location fields onto the map.
struct CenterTransform {
  enum class Kind { WaypointRatio, Absolute };
  Kind kind = Kind::WaypointRatio;
  double ratio = 0.0;  // position along the ego route, 0 = start, 1 = end
  Vec2 point;          // Absolute only
};

struct ConstraintViolation {
  std::size_t constraint_index = 0;
  double amount = 0.0;  // lhs - value, positive when violated
};

/// Parsed scenario search space: typed fields, joint linear constraints and
/// the static scene references the simulator needs.
struct SearchSpaceSchema {
  std::vector<FieldSpec> fields;
  std::vector<LinearConstraint> constraints;
  std::map<std::string, CenterTransform> center_transforms;
  std::string map_id;
  Polyline ego_route;

  std::size_t dimension() const { return fields.size(); }
  std::size_t changeable_count() const;
  /// Index of a dotted field path, or npos when absent.
  std::size_t index_of(const std::string& path) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Constraints rewritten over normalized coordinates u in [0,1]^k.
  std::vector<ConstraintRow> normalized_constraints() const;
};

/// Parses a search-space description (JSON text). Throws SchemaError on
/// malformed input: reversed bounds, non-integer discrete bounds, negative
/// variance, unknown constraint labels, coefficient/label length mismatch.
SearchSpaceSchema parse_search_space(const std::string& json_text);

/// Reads and parses a description file. Throws IoError when unreadable.
SearchSpaceSchema load_search_space(const std::string& path);

/// Draws one scenario: each field from its declared distribution (normal draws
/// clamped into [min,max], discrete fields rounded to the nearest integer),
/// then the joint constraints are checked and the whole vector is redrawn on
/// failure. Throws ConstraintUnsatisfiableError after max_attempts rejections.
ScenarioVector sample(const SearchSpaceSchema& schema, Rng& rng, int max_attempts = 1000);

/// Component-wise (v - min) / (max - min); fields with min == max map to 0.
ScenarioVector normalize(const SearchSpaceSchema& schema, const ScenarioVector& v);

/// Inverse of normalize; discrete fields are rounded to the nearest integer.
ScenarioVector denormalize(const SearchSpaceSchema& schema, const ScenarioVector& u);

/// All violated constraints with their violation amount. A constraint is
/// violated when lhs exceeds value by more than 1e-9.
std::vector<ConstraintViolation> check_constraints(const SearchSpaceSchema& schema,
                                                   const ScenarioVector& v);

inline bool constraints_satisfied(const SearchSpaceSchema& schema, const ScenarioVector& v) {
  return check_constraints(schema, v).empty();
}

/// Rounds discrete fields to integers and clips everything to bounds.
ScenarioVector round_and_clip(const SearchSpaceSchema& schema, ScenarioVector v);

}  // namespace scenfuzz
