#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scenfuzz/dedup.hpp"
#include "scenfuzz/grammar.hpp"
#include "scenfuzz/mlp.hpp"
#include "scenfuzz/objectives.hpp"
#include "scenfuzz/surrogate.hpp"

namespace scenfuzz {

/// Search strategies of the main fuzzing family. The -UN suffix adds
/// duplicate elimination against the violation archive, -NN-GRAD adds the
/// confidence model with constrained gradient-guided mutation.
enum class SearchVariant { Random, RandomUnNnGrad, Ga, GaUn, GaUnNn, GaUnNnGrad };

std::string to_string(SearchVariant v);
std::optional<SearchVariant> search_variant_from_string(const std::string& s);

bool variant_uses_dedup(SearchVariant v);
bool variant_uses_nn(SearchVariant v);
bool variant_uses_grad(SearchVariant v);
bool variant_samples_candidates(SearchVariant v);

struct GaParams {
  int pop_size = 50;
  double eta_crossover = 5.0;
  double p_crossover = 0.8;   // per-field crossover probability
  double eta_mutation = 5.0;
  double mutation_rate = 0.0;  // <= 0 selects the 5/k default
  int candidate_multiplier = 5;
  int max_mating_iter = 5;
  int generation_to_use_nn = 10;  // model kicks in on later generations
  int sample_max_attempts = 1000;
};

struct SurrogateSearchParams {
  MlpTrainParams train;  // hidden 150, 30 epochs, batch 200
  double th_conf2 = 0.9;
  int n_steps = 255;
  double lambda = 1.0 / 255.0;
  double epsilon = 1.0;
};

struct Evaluation {
  ObjectiveVector objectives;
  double fitness = 0.0;
  std::optional<ViolationType> violation;
  double sim_time_ms = 0.0;  // simulated duration, deterministic
};

/// Scenario evaluation hook: campaign wires the simulator in here; tests may
/// substitute closed-form landscapes.
using Evaluator = std::function<Evaluation(const ScenarioVector&, std::uint64_t seed)>;

struct Individual {
  ScenarioVector vector;
  Evaluation eval;
};

/// One line of the append-only evaluation log.
struct RunLogRecord {
  int generation = 0;
  int index = 0;  // within the generation
  ScenarioVector vector;
  ScenarioVector normalized;
  ObjectiveVector objectives;
  double fitness = 0.0;
  std::optional<ViolationType> violation_kind;
  bool unique_flag = false;
  double wall_time_ms = 0.0;
};

struct SearchOptions {
  SearchVariant variant = SearchVariant::GaUn;
  ViolationMode mode = ViolationType::Collision;
  UniquenessParams uniqueness;
  GaParams ga;
  SurrogateSearchParams surrogate;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Mutable search state threaded through stages: the archive, the current
/// population, every evaluated individual, the log and generation counter all
/// persist across run_search calls so a seed-collection stage can hand over
/// to the main method.
struct SearchSession {
  explicit SearchSession(const SearchSpaceSchema& schema, UniquenessParams uniq)
      : schema(&schema), archive(&schema, uniq) {}

  const SearchSpaceSchema* schema;
  ViolationArchive archive;
  std::vector<Individual> population;
  std::vector<Individual> all_evaluated;
  std::vector<RunLogRecord> log;
  int generation = 0;
  int evaluations = 0;
};

// --- genetic operators ---------------------------------------------------

/// Binary tournament with replacement: the population is duplicated twice and
/// randomly paired; each pair's lower-fitness member wins. Winners come out
/// in randomized order and are consumed pairwise as parents. Repeats rounds
/// until `count` winners exist.
std::vector<std::size_t> tournament_select(const std::vector<double>& fitness_values,
                                           std::size_t count, Rng& rng);

/// Simulated binary crossover, applied per field with probability p_field.
/// Children are rounded (discrete fields) and clipped to bounds.
std::pair<ScenarioVector, ScenarioVector> sbx_crossover(const ScenarioVector& a,
                                                        const ScenarioVector& b,
                                                        const SearchSpaceSchema& schema,
                                                        double eta, double p_field, Rng& rng);

/// Bounded polynomial mutation, applied per field with probability `rate`.
ScenarioVector polynomial_mutate(const ScenarioVector& v, const SearchSpaceSchema& schema,
                                 double rate, double eta, Rng& rng);

/// Keeps the `keep` lowest-fitness members of a combined population; ties
/// resolve by insertion order. Returns indices in ascending fitness order.
std::vector<std::size_t> survival(const std::vector<double>& fitness_values, std::size_t keep);

/// Fills `candidates` toward `target` with freshly sampled vectors; with
/// dedup active every sample must stay distinct from the archive and from the
/// pending list. Gives up on a slot after max_attempts draws.
void top_up_with_samples(std::vector<ScenarioVector>& candidates, std::size_t target,
                         const SearchSpaceSchema& schema, const ViolationArchive& archive,
                         ViolationType kind, bool use_dedup, int max_attempts, Rng& rng);

// --- orchestration --------------------------------------------------------

/// Evaluates vectors (in parallel when options.threads > 1), merges results
/// in index order, assigns unique flags against the session archive and
/// appends log records. Consumes at most `remaining` evaluations; returns the
/// evaluated individuals.
std::vector<Individual> evaluate_batch(SearchSession& session,
                                       const std::vector<ScenarioVector>& vectors,
                                       const Evaluator& evaluator, const SearchOptions& options,
                                       int generation, int& remaining);

/// Runs one search stage for `budget` evaluations, extending the session.
/// Implements the constrained evolutionary loop: filtered mating (or fresh
/// sampling for the RANDOM family), sampling top-up, optional confidence
/// model ranking plus gradient mutation, then lowest-fitness survival.
void run_search(SearchSession& session, const Evaluator& evaluator, const SearchOptions& options,
                int budget);

}  // namespace scenfuzz
