#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scenfuzz/baselines.hpp"
#include "scenfuzz/evolve.hpp"
#include "scenfuzz/runlog.hpp"
#include "scenfuzz/sim.hpp"
#include "scenfuzz/stats.hpp"

namespace scenfuzz {

/// Whether the reported metrics and curves count the seed-collection
/// simulations or start at the main stage.
enum class Accounting { IncludeSeedStage, ExcludeSeedStage };

std::string to_string(Accounting a);
std::optional<Accounting> accounting_from_string(const std::string& s);

struct SeedCollectionConfig {
  std::string method = "GA-UN";
  int budget = 500;
};

struct CampaignConfig {
  std::string schema_path;
  std::string method = "GA-UN-NN-GRAD";
  ViolationMode violation_mode = ViolationType::Collision;
  int budget = 500;  // simulations of the main stage
  SeedCollectionConfig seed_collection;
  UniquenessParams uniqueness;  // th1 = 10, th2 = 50
  FitnessWeights weights;
  int repetitions = 1;
  std::uint64_t rng_seed = 0;
  Accounting accounting = Accounting::ExcludeSeedStage;
  GaParams ga;  // generation_to_use_nn < 0 means "from the end of the seed stage"
  SurrogateSearchParams surrogate;
  BaselineParams baseline;
  SimParams sim;
  int threads = 1;
};

/// Loads and validates a config file; relative schema paths resolve against
/// the config file's directory. Unknown keys and malformed values raise
/// SchemaError.
CampaignConfig load_campaign_config(const std::string& path);

/// Hooks the deterministic simulator and objective computation into the
/// search loop. The returned closure is safe to call from multiple threads.
Evaluator make_simulator_evaluator(const SearchSpaceSchema& schema, const CampaignConfig& config);

struct RepetitionResult {
  std::vector<RunLogRecord> log;
  std::vector<ArchiveEntry> archive;
  std::size_t seed_stage_records = 0;
  // Accounted metrics (seed stage included or not per config), scoped to the
  // configured violation kind.
  int unique_count = 0;
  int violating_records = 0;
  double unique_percentage = 100.0;  // 100 when nothing violated
  std::vector<int> curve;            // cumulative uniques per accounted simulation
};

/// Runs the two-stage campaign once. Repetition index feeds the seed
/// derivation so repetitions are independent but reproducible.
RepetitionResult run_repetition(const SearchSpaceSchema& schema, const CampaignConfig& config,
                                int repetition);

struct CampaignResult {
  std::vector<RepetitionResult> repetitions;
};

CampaignResult run_campaign(const SearchSpaceSchema& schema, const CampaignConfig& config);

/// Per-run aggregate written to stats.json.
struct RunSummary {
  std::string method;
  ViolationMode mode = ViolationType::Collision;
  Accounting accounting = Accounting::ExcludeSeedStage;
  int budget = 0;
  int seed_budget = 0;
  std::vector<int> unique_counts;          // one per repetition
  std::vector<double> unique_percentages;  // one per repetition
  std::vector<int> violating_counts;       // one per repetition
};

RunSummary summarize(const CampaignConfig& config, const CampaignResult& result);
void write_run_summary(const std::string& path, const RunSummary& summary);
RunSummary read_run_summary(const std::string& path);

struct PairComparison {
  std::string method_a;
  std::string method_b;
  double p_value = 1.0;
  A12Interval a12;  // P(a > b) on unique counts
};

struct ComparisonReport {
  std::vector<RunSummary> runs;
  std::vector<PairComparison> pairs;  // all ordered pairs a < b
};

ComparisonReport compare_summaries(const std::vector<RunSummary>& runs,
                                   std::uint64_t bootstrap_seed = 0);
void write_comparison(const std::string& path, const ComparisonReport& report);

/// Replays a logged violation stream through the archive at each (th2, th1)
/// combination and reports the unique count per cell.
struct SweepCell {
  double th2 = 0.0;
  double th1 = 0.0;
  int unique_count = 0;
};

std::vector<SweepCell> sweep_thresholds(const SearchSpaceSchema& schema,
                                        const std::vector<RunLogRecord>& log, ViolationMode mode,
                                        const std::vector<double>& th2_grid = {5, 10, 20},
                                        const std::vector<double>& th1_grid = {25, 50, 75});

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells);

/// Full kinematic trace of one re-simulated scenario, for inspection.
void write_trace(const std::string& path, const SimulationOutcome& outcome);

}  // namespace scenfuzz
