#include "scenfuzz/dedup.hpp"

#include <cmath>

namespace scenfuzz {

std::string to_string(ViolationType t) {
  return t == ViolationType::Collision ? "collision" : "out_of_road";
}

std::optional<ViolationType> violation_type_from_string(const std::string& s) {
  if (s == "collision") return ViolationType::Collision;
  if (s == "out_of_road") return ViolationType::OutOfRoad;
  return std::nullopt;
}

std::size_t fields_differ(const SearchSpaceSchema& schema, const ScenarioVector& a,
                          const ScenarioVector& b, double th2_percent) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    const FieldSpec& f = schema.fields[i];
    if (!f.changeable()) continue;
    if (f.kind == FieldKind::Discrete) {
      if (std::llround(a[i]) != std::llround(b[i])) ++count;
    } else {
      // normalized difference against the field range
      if (std::abs(a[i] - b[i]) / f.range() >= th2_percent / 100.0) ++count;
    }
  }
  return count;
}

std::size_t distinctness_threshold(const SearchSpaceSchema& schema, double th1_percent) {
  return static_cast<std::size_t>(
      std::ceil(th1_percent / 100.0 * static_cast<double>(schema.changeable_count())));
}

bool ViolationArchive::is_unique(const ScenarioVector& v, ViolationType kind) const {
  std::size_t need = distinctness_threshold(*schema_, params_.th1_percent);
  for (const ArchiveEntry& e : entries_) {
    if (e.kind != kind) continue;
    if (fields_differ(*schema_, v, e.vector, params_.th2_percent) < need) return false;
  }
  return true;
}

bool ViolationArchive::insert_if_unique(ArchiveEntry entry) {
  if (!is_unique(entry.vector, entry.kind)) return false;
  entries_.push_back(std::move(entry));
  return true;
}

std::size_t ViolationArchive::count_of(ViolationType kind) const {
  std::size_t n = 0;
  for (const ArchiveEntry& e : entries_) {
    if (e.kind == kind) ++n;
  }
  return n;
}

std::vector<std::size_t> filter_similar(const std::vector<ScenarioVector>& candidates,
                                        const ViolationArchive& archive, ViolationType kind,
                                        const std::vector<ScenarioVector>& pending) {
  const SearchSpaceSchema& schema = archive.schema();
  std::size_t need = distinctness_threshold(schema, archive.params().th1_percent);
  double th2 = archive.params().th2_percent;

  std::vector<std::size_t> kept;
  std::vector<const ScenarioVector*> blockers;
  blockers.reserve(pending.size());
  for (const auto& p : pending) blockers.push_back(&p);

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const ScenarioVector& c = candidates[i];
    if (!archive.is_unique(c, kind)) continue;
    bool distinct = true;
    for (const ScenarioVector* b : blockers) {
      if (fields_differ(schema, c, *b, th2) < need) {
        distinct = false;
        break;
      }
    }
    if (!distinct) continue;
    kept.push_back(i);
    blockers.push_back(&candidates[i]);
  }
  return kept;
}

}  // namespace scenfuzz
