#include "scenfuzz/runlog.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "scenfuzz/errors.hpp"

namespace scenfuzz {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json objectives_to_json(const ObjectiveVector& o) {
  ordered_json j;
  j["f_collision"] = o.f_collision;
  j["f_object"] = o.f_object;
  j["f_view"] = o.f_view;
  j["f_wronglane"] = o.f_wronglane;
  j["f_offroad"] = o.f_offroad;
  j["f_deviation"] = o.f_deviation;
  return j;
}

ObjectiveVector objectives_from_json(const ordered_json& j) {
  ObjectiveVector o;
  o.f_collision = j.at("f_collision").get<double>();
  o.f_object = j.at("f_object").get<double>();
  o.f_view = j.at("f_view").get<double>();
  o.f_wronglane = j.at("f_wronglane").get<double>();
  o.f_offroad = j.at("f_offroad").get<double>();
  o.f_deviation = j.at("f_deviation").get<double>();
  return o;
}

}  // namespace

void write_runlog(const std::string& path, const std::vector<RunLogRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const RunLogRecord& r : records) {
    ordered_json j;
    j["generation"] = r.generation;
    j["index"] = r.index;
    j["vector"] = r.vector;
    j["normalized_vector"] = r.normalized;
    j["objectives"] = objectives_to_json(r.objectives);
    j["fitness"] = r.fitness;
    j["violation_kind"] = r.violation_kind ? ordered_json(to_string(*r.violation_kind))
                                           : ordered_json(nullptr);
    j["unique_flag"] = r.unique_flag;
    j["wall_time_ms"] = r.wall_time_ms;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<RunLogRecord> read_runlog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<RunLogRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": malformed log record");
    }
    try {
      RunLogRecord r;
      r.generation = j.at("generation").get<int>();
      r.index = j.at("index").get<int>();
      r.vector = j.at("vector").get<ScenarioVector>();
      r.normalized = j.at("normalized_vector").get<ScenarioVector>();
      r.objectives = objectives_from_json(j.at("objectives"));
      r.fitness = j.at("fitness").get<double>();
      if (!j.at("violation_kind").is_null()) {
        auto kind = violation_type_from_string(j.at("violation_kind").get<std::string>());
        if (!kind) {
          throw IoError(path + ":" + std::to_string(line_no) + ": unknown violation kind");
        }
        r.violation_kind = *kind;
      }
      r.unique_flag = j.at("unique_flag").get<bool>();
      r.wall_time_ms = j.at("wall_time_ms").get<double>();
      records.push_back(std::move(r));
    } catch (const ordered_json::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_archive(const std::string& path, const ViolationArchive& archive) {
  ordered_json entries = ordered_json::array();
  for (const ArchiveEntry& e : archive.entries()) {
    ordered_json j;
    j["vector"] = e.vector;
    j["kind"] = to_string(e.kind);
    j["generation"] = e.generation;
    j["objectives"] = e.objectives;
    entries.push_back(std::move(j));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << entries.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ArchiveEntry> read_archive_entries(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  ordered_json doc = ordered_json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) throw IoError("malformed archive: " + path);
  std::vector<ArchiveEntry> entries;
  for (const auto& j : doc) {
    try {
      ArchiveEntry e;
      e.vector = j.at("vector").get<ScenarioVector>();
      auto kind = violation_type_from_string(j.at("kind").get<std::string>());
      if (!kind) throw IoError("unknown violation kind in archive: " + path);
      e.kind = *kind;
      e.generation = j.at("generation").get<int>();
      e.objectives = j.at("objectives").get<std::vector<double>>();
      entries.push_back(std::move(e));
    } catch (const ordered_json::exception& e) {
      throw IoError("malformed archive entry in " + path + ": " + e.what());
    }
  }
  return entries;
}

std::vector<int> curve_from_log(const std::vector<RunLogRecord>& records) {
  std::vector<int> curve;
  curve.reserve(records.size());
  int count = 0;
  for (const RunLogRecord& r : records) {
    if (r.unique_flag) ++count;
    curve.push_back(count);
  }
  return curve;
}

void write_curves_csv(const std::string& path,
                      const std::vector<std::pair<std::string, std::vector<int>>>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "simulation";
  std::size_t rows = 0;
  for (const auto& [label, curve] : series) {
    out << ',' << label;
    rows = std::max(rows, curve.size());
  }
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    out << (i + 1);
    for (const auto& [label, curve] : series) {
      const int v = curve.empty() ? 0 : curve[std::min(i, curve.size() - 1)];
      out << ',' << v;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace scenfuzz
