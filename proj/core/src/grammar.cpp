#include "scenfuzz/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "scenfuzz/errors.hpp"

namespace scenfuzz {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kConstraintTol = 1e-9;

bool is_integer_value(double x) { return std::abs(x - std::round(x)) < 1e-12; }

FieldSpec parse_field(const std::string& path, const ojson& arr) {
  if (!arr.is_array() || arr.size() < 2 || arr.size() > 4) {
    throw SchemaError("field '" + path + "': expected [min, max, (distribution), (\"int\")]");
  }
  if (!arr[0].is_number() || !arr[1].is_number()) {
    throw SchemaError("field '" + path + "': bounds must be numbers");
  }
  FieldSpec f;
  f.name = path;
  f.min = arr[0].get<double>();
  f.max = arr[1].get<double>();
  if (f.min > f.max) {
    throw SchemaError("field '" + path + "': min exceeds max");
  }
  for (std::size_t i = 2; i < arr.size(); ++i) {
    const ojson& item = arr[i];
    if (item.is_string()) {
      if (item.get<std::string>() != "int") {
        throw SchemaError("field '" + path + "': unknown tag '" + item.get<std::string>() + "'");
      }
      f.kind = FieldKind::Discrete;
    } else if (item.is_array()) {
      if (item.empty() || !item[0].is_string()) {
        throw SchemaError("field '" + path + "': distribution must start with its name");
      }
      std::string dist = item[0].get<std::string>();
      if (dist == "uniform") {
        f.dist.kind = Distribution::Kind::Uniform;
      } else if (dist == "normal") {
        if (item.size() != 3) {
          throw SchemaError("field '" + path + "': normal takes [\"normal\", mean, variance]");
        }
        f.dist.kind = Distribution::Kind::Normal;
        if (!item[1].is_null()) {
          if (!item[1].is_number()) throw SchemaError("field '" + path + "': mean must be a number or null");
          f.dist.mean = item[1].get<double>();
        }
        if (!item[2].is_number()) throw SchemaError("field '" + path + "': variance must be a number");
        f.dist.variance = item[2].get<double>();
        if (f.dist.variance < 0.0) throw SchemaError("field '" + path + "': negative variance");
      } else {
        throw SchemaError("field '" + path + "': unknown distribution '" + dist + "'");
      }
    } else {
      throw SchemaError("field '" + path + "': unexpected element in field spec");
    }
  }
  if (f.kind == FieldKind::Discrete && (!is_integer_value(f.min) || !is_integer_value(f.max))) {
    throw SchemaError("field '" + path + "': discrete bounds must be integers");
  }
  return f;
}

void flatten_fields(const std::string& prefix, const ojson& node, std::vector<FieldSpec>& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
      flatten_fields(path, it.value(), out);
    }
  } else if (node.is_array()) {
    out.push_back(parse_field(prefix, node));
  } else {
    throw SchemaError("field '" + prefix + "': expected object or range array");
  }
}

CenterTransform parse_center_transform(const std::string& key, const ojson& arr) {
  if (!arr.is_array() || arr.empty() || !arr[0].is_string()) {
    throw SchemaError("center transform '" + key + "': expected [kind, ...]");
  }
  CenterTransform ct;
  std::string kind = arr[0].get<std::string>();
  if (kind == "waypoint_ratio") {
    if (arr.size() != 2 || !arr[1].is_number()) {
      throw SchemaError("center transform '" + key + "': waypoint_ratio takes one number");
    }
    ct.kind = CenterTransform::Kind::WaypointRatio;
    ct.ratio = arr[1].get<double>();
    if (ct.ratio < 0.0 || ct.ratio > 1.0) {
      throw SchemaError("center transform '" + key + "': ratio outside [0,1]");
    }
  } else if (kind == "absolute") {
    if (arr.size() != 3 || !arr[1].is_number() || !arr[2].is_number()) {
      throw SchemaError("center transform '" + key + "': absolute takes x and y");
    }
    ct.kind = CenterTransform::Kind::Absolute;
    ct.point = {arr[1].get<double>(), arr[2].get<double>()};
  } else {
    throw SchemaError("center transform '" + key + "': unknown kind '" + kind + "'");
  }
  return ct;
}

}  // namespace

std::size_t SearchSpaceSchema::changeable_count() const {
  return static_cast<std::size_t>(
      std::count_if(fields.begin(), fields.end(), [](const FieldSpec& f) { return f.changeable(); }));
}

std::size_t SearchSpaceSchema::index_of(const std::string& path) const {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == path) return i;
  }
  return npos;
}

std::vector<ConstraintRow> SearchSpaceSchema::normalized_constraints() const {
  // v_i = min_i + u_i * range_i turns sum c_i v_i <= b into
  // sum (c_i * range_i) u_i <= b - sum c_i min_i.
  std::vector<ConstraintRow> rows;
  rows.reserve(constraints.size());
  for (const auto& c : constraints) {
    ConstraintRow r;
    r.row.assign(fields.size(), 0.0);
    r.value = c.value;
    for (std::size_t j = 0; j < c.indices.size(); ++j) {
      std::size_t idx = c.indices[j];
      r.row[idx] += c.coefficients[j] * fields[idx].range();
      r.value -= c.coefficients[j] * fields[idx].min;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

SearchSpaceSchema parse_search_space(const std::string& json_text) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("search space is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("search space root must be an object");

  SearchSpaceSchema schema;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key == "map_id") {
      if (!it.value().is_string()) throw SchemaError("map_id must be a string");
      schema.map_id = it.value().get<std::string>();
    } else if (key == "ego_route") {
      if (!it.value().is_array() || it.value().size() < 2) {
        throw SchemaError("ego_route must list at least two [x, y] waypoints");
      }
      for (const auto& wp : it.value()) {
        if (!wp.is_array() || wp.size() != 2 || !wp[0].is_number() || !wp[1].is_number()) {
          throw SchemaError("ego_route waypoints must be [x, y] pairs");
        }
        schema.ego_route.points.push_back({wp[0].get<double>(), wp[1].get<double>()});
      }
    } else if (key == "center_transforms") {
      if (!it.value().is_object()) throw SchemaError("center_transforms must be an object");
      for (auto ct = it.value().begin(); ct != it.value().end(); ++ct) {
        schema.center_transforms[ct.key()] = parse_center_transform(ct.key(), ct.value());
      }
    } else if (key == "customized_constraints") {
      // resolved after all fields are known
    } else {
      flatten_fields(key, it.value(), schema.fields);
    }
  }

  if (doc.contains("customized_constraints")) {
    const ojson& arr = doc["customized_constraints"];
    if (!arr.is_array()) throw SchemaError("customized_constraints must be an array");
    for (std::size_t ci = 0; ci < arr.size(); ++ci) {
      const ojson& c = arr[ci];
      if (!c.is_object() || !c.contains("coefficients") || !c.contains("labels") ||
          !c.contains("value")) {
        throw SchemaError("constraint " + std::to_string(ci) +
                          ": needs coefficients, labels and value");
      }
      LinearConstraint lc;
      for (const auto& x : c["coefficients"]) {
        if (!x.is_number()) throw SchemaError("constraint " + std::to_string(ci) + ": coefficients must be numbers");
        lc.coefficients.push_back(x.get<double>());
      }
      for (const auto& l : c["labels"]) {
        if (!l.is_string()) throw SchemaError("constraint " + std::to_string(ci) + ": labels must be strings");
        lc.labels.push_back(l.get<std::string>());
      }
      if (!c["value"].is_number()) throw SchemaError("constraint " + std::to_string(ci) + ": value must be a number");
      lc.value = c["value"].get<double>();
      if (lc.coefficients.size() != lc.labels.size()) {
        throw SchemaError("constraint " + std::to_string(ci) +
                          ": coefficients and labels differ in length");
      }
      if (lc.coefficients.empty()) {
        throw SchemaError("constraint " + std::to_string(ci) + ": empty");
      }
      for (const auto& label : lc.labels) {
        std::size_t idx = schema.index_of(label);
        if (idx == SearchSpaceSchema::npos) {
          throw SchemaError("constraint " + std::to_string(ci) + ": unknown label '" + label + "'");
        }
        lc.indices.push_back(idx);
      }
      schema.constraints.push_back(std::move(lc));
    }
  }
  return schema;
}

SearchSpaceSchema load_search_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open search space file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_search_space(buf.str());
}

ScenarioVector round_and_clip(const SearchSpaceSchema& schema, ScenarioVector v) {
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    const FieldSpec& f = schema.fields[i];
    if (f.kind == FieldKind::Discrete) v[i] = std::round(v[i]);
    v[i] = std::clamp(v[i], f.min, f.max);
  }
  return v;
}

ScenarioVector sample(const SearchSpaceSchema& schema, Rng& rng, int max_attempts) {
  ScenarioVector v(schema.dimension());
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t i = 0; i < schema.fields.size(); ++i) {
      const FieldSpec& f = schema.fields[i];
      double x;
      if (f.dist.kind == Distribution::Kind::Normal) {
        double mean = f.dist.mean ? *f.dist.mean : 0.5 * (f.min + f.max);
        double sd = std::sqrt(f.dist.variance);
        x = sd > 0.0 ? std::normal_distribution<double>(mean, sd)(rng) : mean;
      } else {
        x = std::uniform_real_distribution<double>(f.min, f.max)(rng);
      }
      if (f.kind == FieldKind::Discrete) x = std::round(x);
      v[i] = std::clamp(x, f.min, f.max);
    }
    if (constraints_satisfied(schema, v)) return v;
  }
  throw ConstraintUnsatisfiableError("rejection sampling failed after " +
                                     std::to_string(max_attempts) + " attempts");
}

ScenarioVector normalize(const SearchSpaceSchema& schema, const ScenarioVector& v) {
  ScenarioVector u(schema.dimension());
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    const FieldSpec& f = schema.fields[i];
    u[i] = f.changeable() ? (v[i] - f.min) / f.range() : 0.0;
  }
  return u;
}

ScenarioVector denormalize(const SearchSpaceSchema& schema, const ScenarioVector& u) {
  ScenarioVector v(schema.dimension());
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    const FieldSpec& f = schema.fields[i];
    double x = f.min + u[i] * f.range();
    if (f.kind == FieldKind::Discrete) x = std::round(x);
    v[i] = std::clamp(x, f.min, f.max);
  }
  return v;
}

std::vector<ConstraintViolation> check_constraints(const SearchSpaceSchema& schema,
                                                   const ScenarioVector& v) {
  std::vector<ConstraintViolation> out;
  for (std::size_t ci = 0; ci < schema.constraints.size(); ++ci) {
    const LinearConstraint& c = schema.constraints[ci];
    double lhs = 0.0;
    for (std::size_t j = 0; j < c.indices.size(); ++j) {
      lhs += c.coefficients[j] * v[c.indices[j]];
    }
    if (lhs > c.value + kConstraintTol) {
      out.push_back({ci, lhs - c.value});
    }
  }
  return out;
}

}  // namespace scenfuzz
