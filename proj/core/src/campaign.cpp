#include "scenfuzz/campaign.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>

#include <nlohmann/json.hpp>

#include "scenfuzz/errors.hpp"
#include "scenfuzz/map.hpp"
#include "scenfuzz/objectives.hpp"

namespace scenfuzz {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Accounting a) {
  return a == Accounting::IncludeSeedStage ? "include_seed_stage" : "exclude_seed_stage";
}

std::optional<Accounting> accounting_from_string(const std::string& s) {
  if (s == "include_seed_stage") return Accounting::IncludeSeedStage;
  if (s == "exclude_seed_stage") return Accounting::ExcludeSeedStage;
  return std::nullopt;
}

namespace {

bool known_method(const std::string& m) {
  return search_variant_from_string(m).has_value() || baseline_from_string(m).has_value();
}

void require_keys(const ordered_json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError("unknown key '" + key + "' in " + where);
    }
  }
}

// Wrong-typed values surface as json type errors; rethrow them as config
// errors so the caller sees one exception family for one input file.
template <typename T>
T read_value(const ordered_json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const ordered_json::exception& e) {
    throw SchemaError("config value '" + std::string(key) + "': " + e.what());
  }
}

template <typename T>
void read_into(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = read_value<T>(j, key);
}

}  // namespace

CampaignConfig load_campaign_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  ordered_json j = ordered_json::parse(in, nullptr, false);
  if (j.is_discarded()) throw SchemaError("config is not valid JSON: " + path);
  if (!j.is_object()) throw SchemaError("config root must be an object: " + path);

  require_keys(j,
               {"schema_path", "method", "violation_mode", "budget", "seed_collection", "th1",
                "th2", "weights", "repetitions", "rng_seed", "accounting", "population_size",
                "ga", "surrogate", "baseline", "sim", "threads"},
               "config");

  CampaignConfig config;
  config.ga.generation_to_use_nn = -1;  // from the end of the seed stage

  if (!j.contains("schema_path")) throw SchemaError("config requires schema_path");
  config.schema_path = read_value<std::string>(j, "schema_path");
  // Relative schema paths are anchored at the config file.
  std::filesystem::path schema_file(config.schema_path);
  if (schema_file.is_relative()) {
    config.schema_path = (std::filesystem::path(path).parent_path() / schema_file).string();
  }

  read_into(j, "method", config.method);
  if (!known_method(config.method)) throw SchemaError("unknown method: " + config.method);

  if (j.contains("violation_mode")) {
    auto mode = violation_type_from_string(read_value<std::string>(j, "violation_mode"));
    if (!mode) {
      throw SchemaError("unknown violation_mode: " + j.at("violation_mode").dump());
    }
    config.violation_mode = *mode;
  }

  read_into(j, "budget", config.budget);
  if (config.budget <= 0) throw SchemaError("budget must be positive");

  if (j.contains("seed_collection")) {
    const ordered_json& sc = j.at("seed_collection");
    require_keys(sc, {"method", "budget"}, "seed_collection");
    read_into(sc, "method", config.seed_collection.method);
    read_into(sc, "budget", config.seed_collection.budget);
    if (!known_method(config.seed_collection.method)) {
      throw SchemaError("unknown seed_collection method: " + config.seed_collection.method);
    }
    if (config.seed_collection.budget < 0) {
      throw SchemaError("seed_collection budget must be non-negative");
    }
  }

  read_into(j, "th1", config.uniqueness.th1_percent);
  read_into(j, "th2", config.uniqueness.th2_percent);

  if (j.contains("weights")) {
    auto w = read_value<std::vector<double>>(j, "weights");
    if (w.size() != 3) throw SchemaError("weights must have three entries");
    config.weights.w = {w[0], w[1], w[2]};
  }

  read_into(j, "repetitions", config.repetitions);
  if (config.repetitions < 1) throw SchemaError("repetitions must be >= 1");
  read_into(j, "rng_seed", config.rng_seed);

  if (j.contains("accounting")) {
    auto acc = accounting_from_string(read_value<std::string>(j, "accounting"));
    if (!acc) throw SchemaError("unknown accounting: " + j.at("accounting").dump());
    config.accounting = *acc;
  }

  read_into(j, "population_size", config.ga.pop_size);
  if (config.ga.pop_size < 2) throw SchemaError("population_size must be >= 2");

  if (j.contains("ga")) {
    const ordered_json& g = j.at("ga");
    require_keys(g,
                 {"eta_crossover", "p_crossover", "eta_mutation", "mutation_rate",
                  "candidate_multiplier", "max_mating_iter", "generation_to_use_nn",
                  "sample_max_attempts"},
                 "ga");
    read_into(g, "eta_crossover", config.ga.eta_crossover);
    read_into(g, "p_crossover", config.ga.p_crossover);
    read_into(g, "eta_mutation", config.ga.eta_mutation);
    read_into(g, "mutation_rate", config.ga.mutation_rate);
    read_into(g, "candidate_multiplier", config.ga.candidate_multiplier);
    read_into(g, "max_mating_iter", config.ga.max_mating_iter);
    read_into(g, "generation_to_use_nn", config.ga.generation_to_use_nn);
    read_into(g, "sample_max_attempts", config.ga.sample_max_attempts);
  }

  if (j.contains("surrogate")) {
    const ordered_json& s = j.at("surrogate");
    require_keys(s,
                 {"hidden", "epochs", "batch_size", "learning_rate", "th_conf2", "n_steps",
                  "lambda", "epsilon"},
                 "surrogate");
    read_into(s, "hidden", config.surrogate.train.hidden);
    read_into(s, "epochs", config.surrogate.train.epochs);
    read_into(s, "batch_size", config.surrogate.train.batch_size);
    read_into(s, "learning_rate", config.surrogate.train.learning_rate);
    read_into(s, "th_conf2", config.surrogate.th_conf2);
    read_into(s, "n_steps", config.surrogate.n_steps);
    read_into(s, "lambda", config.surrogate.lambda);
    read_into(s, "epsilon", config.surrogate.epsilon);
  }

  if (j.contains("baseline")) {
    const ordered_json& b = j.at("baseline");
    require_keys(b,
                 {"pretrain_samples", "regressor_hidden", "regressor_epochs",
                  "regressor_batch_size", "dt_outer_iterations", "min_samples_split_fraction",
                  "min_impurity_decrease", "region_sample_attempts", "avfuzzer_population",
                  "avfuzzer_local_generations", "avfuzzer_stagnation_window"},
                 "baseline");
    read_into(b, "pretrain_samples", config.baseline.pretrain_samples);
    read_into(b, "regressor_hidden", config.baseline.regressor.hidden);
    read_into(b, "regressor_epochs", config.baseline.regressor.epochs);
    read_into(b, "regressor_batch_size", config.baseline.regressor.batch_size);
    read_into(b, "dt_outer_iterations", config.baseline.dt_outer_iterations);
    read_into(b, "min_samples_split_fraction", config.baseline.tree.min_samples_split_fraction);
    read_into(b, "min_impurity_decrease", config.baseline.tree.min_impurity_decrease);
    read_into(b, "region_sample_attempts", config.baseline.region_sample_attempts);
    read_into(b, "avfuzzer_population", config.baseline.avfuzzer_population);
    read_into(b, "avfuzzer_local_generations", config.baseline.avfuzzer_local_generations);
    read_into(b, "avfuzzer_stagnation_window", config.baseline.avfuzzer_stagnation_window);
  }

  if (j.contains("sim")) {
    const ordered_json& s = j.at("sim");
    require_keys(s,
                 {"dt", "max_steps", "cruise_speed", "max_accel", "max_brake", "fov_deg",
                  "sensing_range", "reaction_delay", "min_turn_radius"},
                 "sim");
    read_into(s, "dt", config.sim.dt);
    read_into(s, "max_steps", config.sim.max_steps);
    read_into(s, "cruise_speed", config.sim.ego.cruise_speed);
    read_into(s, "max_accel", config.sim.ego.max_accel);
    read_into(s, "max_brake", config.sim.ego.max_brake);
    if (s.contains("fov_deg")) {
      config.sim.ego.fov_half_angle = deg2rad(read_value<double>(s, "fov_deg"));
    }
    read_into(s, "sensing_range", config.sim.ego.sensing_range);
    read_into(s, "reaction_delay", config.sim.ego.reaction_delay);
    read_into(s, "min_turn_radius", config.sim.ego.min_turn_radius);
  }

  read_into(j, "threads", config.threads);
  if (config.threads < 1) throw SchemaError("threads must be >= 1");
  return config;
}

Evaluator make_simulator_evaluator(const SearchSpaceSchema& schema,
                                   const CampaignConfig& config) {
  const SearchSpaceSchema* schema_ptr = &schema;
  const SimParams sim_params = config.sim;
  const FitnessWeights weights = config.weights;
  const ViolationMode mode = config.violation_mode;
  const RoadMap map = make_map(schema.map_id);
  ObjectiveParams oparams;
  oparams.fov_half_angle = sim_params.ego.fov_half_angle;

  return [schema_ptr, sim_params, weights, mode, map, oparams](const ScenarioVector& v,
                                                               std::uint64_t seed) {
    SimulationOutcome outcome = run(*schema_ptr, v, sim_params, seed);
    Evaluation e;
    e.objectives = compute_objectives(outcome, map, oparams);
    e.fitness = fitness(e.objectives, weights, mode);
    if (outcome.violation) e.violation = outcome.violation->type;
    e.sim_time_ms = outcome.steps * sim_params.dt * 1000.0;
    return e;
  };
}

namespace {

void run_stage(SearchSession& session, const Evaluator& evaluator, const CampaignConfig& config,
               const std::string& method, int budget, std::uint64_t seed, int nn_gate) {
  SearchOptions opts;
  opts.mode = config.violation_mode;
  opts.uniqueness = config.uniqueness;
  opts.ga = config.ga;
  opts.ga.generation_to_use_nn = nn_gate;
  opts.surrogate = config.surrogate;
  opts.seed = seed;
  opts.threads = config.threads;

  if (auto variant = search_variant_from_string(method)) {
    opts.variant = *variant;
    run_search(session, evaluator, opts, budget);
  } else if (auto baseline = baseline_from_string(method)) {
    run_baseline(session, evaluator, opts, *baseline, config.baseline, budget);
  } else {
    throw SchemaError("unknown method: " + method);
  }
}

}  // namespace

RepetitionResult run_repetition(const SearchSpaceSchema& schema, const CampaignConfig& config,
                                int repetition) {
  SearchSession session(schema, config.uniqueness);
  Evaluator evaluator = make_simulator_evaluator(schema, config);
  const std::uint64_t rep_seed =
      derive_seed(config.rng_seed, 0xca3b, static_cast<std::uint64_t>(repetition));

  if (config.seed_collection.budget > 0) {
    // The NN gate is irrelevant during seed collection; pass a gate that can
    // never activate within the stage.
    run_stage(session, evaluator, config, config.seed_collection.method,
              config.seed_collection.budget, rep_seed,
              config.ga.generation_to_use_nn < 0 ? session.generation + config.budget
                                                 : config.ga.generation_to_use_nn);
  }

  RepetitionResult result;
  result.seed_stage_records = session.log.size();

  const int nn_gate = config.ga.generation_to_use_nn < 0 ? session.generation - 1
                                                         : config.ga.generation_to_use_nn;
  run_stage(session, evaluator, config, config.method, config.budget, rep_seed, nn_gate);

  result.log = std::move(session.log);
  result.archive.assign(session.archive.entries().begin(), session.archive.entries().end());

  const std::size_t start = config.accounting == Accounting::ExcludeSeedStage
                                ? result.seed_stage_records
                                : 0;
  int uniques = 0;
  for (std::size_t i = start; i < result.log.size(); ++i) {
    const RunLogRecord& r = result.log[i];
    const bool target_kind = r.violation_kind && *r.violation_kind == config.violation_mode;
    if (target_kind) {
      ++result.violating_records;
      if (r.unique_flag) ++uniques;
    }
    result.curve.push_back(uniques);
  }
  result.unique_count = uniques;
  result.unique_percentage =
      result.violating_records > 0
          ? 100.0 * static_cast<double>(uniques) / static_cast<double>(result.violating_records)
          : 100.0;
  return result;
}

CampaignResult run_campaign(const SearchSpaceSchema& schema, const CampaignConfig& config) {
  CampaignResult out;
  out.repetitions.resize(config.repetitions);
  if (config.threads > 1 && config.repetitions > 1) {
    // Repetitions are independent; spread them over threads and keep each
    // repetition single-threaded so results never depend on the schedule.
    CampaignConfig rep_config = config;
    rep_config.threads = 1;
    std::vector<std::future<RepetitionResult>> futures;
    futures.reserve(config.repetitions);
    for (int r = 0; r < config.repetitions; ++r) {
      futures.push_back(std::async(std::launch::async, [&schema, rep_config, r]() {
        return run_repetition(schema, rep_config, r);
      }));
    }
    for (int r = 0; r < config.repetitions; ++r) out.repetitions[r] = futures[r].get();
  } else {
    for (int r = 0; r < config.repetitions; ++r) {
      out.repetitions[r] = run_repetition(schema, config, r);
    }
  }
  return out;
}

RunSummary summarize(const CampaignConfig& config, const CampaignResult& result) {
  RunSummary s;
  s.method = config.method;
  s.mode = config.violation_mode;
  s.accounting = config.accounting;
  s.budget = config.budget;
  s.seed_budget = config.seed_collection.budget;
  for (const RepetitionResult& rep : result.repetitions) {
    s.unique_counts.push_back(rep.unique_count);
    s.unique_percentages.push_back(rep.unique_percentage);
    s.violating_counts.push_back(rep.violating_records);
  }
  return s;
}

void write_run_summary(const std::string& path, const RunSummary& s) {
  ordered_json j;
  j["method"] = s.method;
  j["violation_mode"] = to_string(s.mode);
  j["accounting"] = to_string(s.accounting);
  j["budget"] = s.budget;
  j["seed_budget"] = s.seed_budget;
  j["unique_counts"] = s.unique_counts;
  j["unique_percentages"] = s.unique_percentages;
  j["violating_counts"] = s.violating_counts;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

RunSummary read_run_summary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  ordered_json j = ordered_json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed summary: " + path);
  RunSummary s;
  try {
    s.method = j.at("method").get<std::string>();
    auto mode = violation_type_from_string(j.at("violation_mode").get<std::string>());
    auto acc = accounting_from_string(j.at("accounting").get<std::string>());
    if (!mode || !acc) throw IoError("malformed summary: " + path);
    s.mode = *mode;
    s.accounting = *acc;
    s.budget = j.at("budget").get<int>();
    s.seed_budget = j.at("seed_budget").get<int>();
    s.unique_counts = j.at("unique_counts").get<std::vector<int>>();
    s.unique_percentages = j.at("unique_percentages").get<std::vector<double>>();
    s.violating_counts = j.at("violating_counts").get<std::vector<int>>();
  } catch (const ordered_json::exception& e) {
    throw IoError("malformed summary " + path + ": " + e.what());
  }
  return s;
}

ComparisonReport compare_summaries(const std::vector<RunSummary>& runs,
                                   std::uint64_t bootstrap_seed) {
  ComparisonReport report;
  report.runs = runs;
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      std::vector<double> xa(runs[a].unique_counts.begin(), runs[a].unique_counts.end());
      std::vector<double> xb(runs[b].unique_counts.begin(), runs[b].unique_counts.end());
      PairComparison pair;
      pair.method_a = runs[a].method;
      pair.method_b = runs[b].method;
      pair.p_value = ranksum_test(xa, xb).p_value;
      pair.a12 = a12_bootstrap(xa, xb, 10000, derive_seed(bootstrap_seed, a, b));
      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

void write_comparison(const std::string& path, const ComparisonReport& report) {
  ordered_json j;
  ordered_json methods = ordered_json::array();
  for (const RunSummary& s : report.runs) {
    ordered_json m;
    m["method"] = s.method;
    m["unique_counts"] = s.unique_counts;
    m["unique_percentages"] = s.unique_percentages;
    methods.push_back(std::move(m));
  }
  j["methods"] = std::move(methods);
  ordered_json pairs = ordered_json::array();
  for (const PairComparison& p : report.pairs) {
    ordered_json e;
    e["method_a"] = p.method_a;
    e["method_b"] = p.method_b;
    e["p_value"] = p.p_value;
    e["a12"] = p.a12.estimate;
    e["a12_ci"] = {p.a12.lo, p.a12.hi};
    pairs.push_back(std::move(e));
  }
  j["pairs"] = std::move(pairs);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<SweepCell> sweep_thresholds(const SearchSpaceSchema& schema,
                                        const std::vector<RunLogRecord>& log, ViolationMode mode,
                                        const std::vector<double>& th2_grid,
                                        const std::vector<double>& th1_grid) {
  std::vector<SweepCell> cells;
  for (double th2 : th2_grid) {
    for (double th1 : th1_grid) {
      ViolationArchive archive(&schema, UniquenessParams{th1, th2});
      for (const RunLogRecord& r : log) {
        if (!r.violation_kind || *r.violation_kind != mode) continue;
        ArchiveEntry entry;
        entry.vector = r.vector;
        entry.kind = *r.violation_kind;
        entry.generation = r.generation;
        archive.insert_if_unique(std::move(entry));
      }
      cells.push_back({th2, th1, static_cast<int>(archive.count_of(mode))});
    }
  }
  return cells;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "th2,th1,unique_violations\n";
  for (const SweepCell& c : cells) {
    out << c.th2 << ',' << c.th1 << ',' << c.unique_count << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_trace(const std::string& path, const SimulationOutcome& outcome) {
  ordered_json j;
  j["map_id"] = outcome.map_id;
  j["termination"] = to_string(outcome.termination);
  j["steps"] = outcome.steps;
  j["spawn_clamped"] = outcome.spawn_clamped;
  if (outcome.violation) {
    ordered_json v;
    v["type"] = to_string(outcome.violation->type);
    v["step"] = outcome.violation->step;
    j["violation"] = std::move(v);
  } else {
    j["violation"] = nullptr;
  }
  ordered_json agents = ordered_json::array();
  for (const AgentMeta& meta : outcome.agents) {
    ordered_json a;
    a["kind"] = to_string(meta.kind);
    a["half_extents"] = {meta.half_extents.x, meta.half_extents.y};
    agents.push_back(std::move(a));
  }
  j["agents"] = std::move(agents);
  ordered_json trace = ordered_json::array();
  for (const auto& step_row : outcome.trace) {
    ordered_json row = ordered_json::array();
    for (const AgentSnapshot& snap : step_row) {
      row.push_back({snap.position.x, snap.position.y, snap.heading, snap.speed});
    }
    trace.push_back(std::move(row));
  }
  j["trace"] = std::move(trace);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump() << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace scenfuzz
