#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scenfuzz/grammar.hpp"

namespace scenfuzz {

enum class ViolationType { Collision, OutOfRoad };

std::string to_string(ViolationType t);
std::optional<ViolationType> violation_type_from_string(const std::string& s);

/// Distinctness thresholds: th1 is the percentage of changeable fields that
/// must differ, th2 the percentage of a field's range that counts as a
/// difference for continuous fields.
struct UniquenessParams {
  double th1_percent = 10.0;
  double th2_percent = 50.0;
};

/// Number of changeable fields on which a and b differ. Continuous fields
/// differ when |a-b| >= th2% of the field range; discrete fields differ when
/// their rounded values are not identical. Unchangeable fields never differ.
std::size_t fields_differ(const SearchSpaceSchema& schema, const ScenarioVector& a,
                          const ScenarioVector& b, double th2_percent);

/// Minimum differing-field count for two scenarios to be distinct:
/// ceil(th1% * changeable_count).
std::size_t distinctness_threshold(const SearchSpaceSchema& schema, double th1_percent);

struct ArchiveEntry {
  ScenarioVector vector;
  ViolationType kind = ViolationType::Collision;
  int generation = 0;
  std::vector<double> objectives;  // serialized objective values, optional
};

/// Append-only archive of unique violations. Uniqueness is scoped per
/// violation kind: entries of a different kind never block a candidate.
class ViolationArchive {
 public:
  ViolationArchive(const SearchSpaceSchema* schema, UniquenessParams params)
      : schema_(schema), params_(params) {}

  /// True when v is distinct from every archived entry of the same kind.
  bool is_unique(const ScenarioVector& v, ViolationType kind) const;

  /// Inserts when unique; returns whether the entry was added.
  bool insert_if_unique(ArchiveEntry entry);

  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t count_of(ViolationType kind) const;
  const UniquenessParams& params() const { return params_; }
  const SearchSpaceSchema& schema() const { return *schema_; }

 private:
  const SearchSpaceSchema* schema_;
  UniquenessParams params_;
  std::vector<ArchiveEntry> entries_;
};

/// Order-preserving filter used during offspring generation: keeps candidates
/// that are distinct from every archived violation of `kind` and from all
/// pending vectors, including candidates retained earlier in the same call.
/// Returns the retained indices into `candidates`.
std::vector<std::size_t> filter_similar(const std::vector<ScenarioVector>& candidates,
                                        const ViolationArchive& archive, ViolationType kind,
                                        const std::vector<ScenarioVector>& pending);

}  // namespace scenfuzz
