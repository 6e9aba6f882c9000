#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scenfuzz/dtree.hpp"
#include "scenfuzz/evolve.hpp"
#include "scenfuzz/mlp.hpp"
#include "scenfuzz/pareto.hpp"

namespace scenfuzz {

/// Comparison methods. The NSGA2 family ranks by Pareto front and crowding
/// over the active objective triple; the SM variants filter offspring through
/// per-objective regression surrogates, DT gates generation through decision
/// tree regions, and the fuzzer alternates global and local single-objective
/// GAs with restarts.
enum class BaselineMethod { Nsga2Sm, Nsga2UnSmA, Nsga2Dt, AvFuzzer };

std::string to_string(BaselineMethod m);
std::optional<BaselineMethod> baseline_from_string(const std::string& s);

struct BaselineParams {
  // SM family: extra simulations spent on surrogate pretraining, and the
  // regression net shape (one hidden layer, 100 units, 200 epochs).
  int pretrain_samples = 1000;
  MlpTrainParams regressor{100, 200, 200, 1e-3};

  // DT: outer tree-refit iterations sharing the budget evenly, and region
  // sampling effort.
  int dt_outer_iterations = 5;
  DecisionTreeParams tree;
  int region_sample_attempts = 1000;

  // Fuzzer: tiny populations, a local exploitation phase, and restarts.
  int avfuzzer_population = 4;
  int avfuzzer_local_generations = 5;
  int avfuzzer_stagnation_window = 5;
};

/// True when the newest entry fails to improve on the running average of the
/// previous `window` entries. Requires at least window+1 entries. Fitness is
/// minimized, so "latest >= mean of the window" means progress stalled.
bool avfuzzer_stagnated(const std::vector<double>& best_history, int window = 5);

/// Runs one baseline for `budget` evaluations, extending the session exactly
/// like run_search does (same log schema, same archive accounting).
void run_baseline(SearchSession& session, const Evaluator& evaluator,
                  const SearchOptions& options, BaselineMethod method,
                  const BaselineParams& params, int budget);

}  // namespace scenfuzz
