#include "scenfuzz/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace scenfuzz {

std::string to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::Nsga2Sm: return "NSGA2-SM";
    case BaselineMethod::Nsga2UnSmA: return "NSGA2-UN-SM-A";
    case BaselineMethod::Nsga2Dt: return "NSGA2-DT";
    case BaselineMethod::AvFuzzer: return "AV-FUZZER";
  }
  return "?";
}

std::optional<BaselineMethod> baseline_from_string(const std::string& s) {
  if (s == "NSGA2-SM") return BaselineMethod::Nsga2Sm;
  if (s == "NSGA2-UN-SM-A") return BaselineMethod::Nsga2UnSmA;
  if (s == "NSGA2-DT") return BaselineMethod::Nsga2Dt;
  if (s == "AV-FUZZER") return BaselineMethod::AvFuzzer;
  return std::nullopt;
}

bool avfuzzer_stagnated(const std::vector<double>& best_history, int window) {
  if (window <= 0) return false;
  if (best_history.size() < static_cast<std::size_t>(window) + 1) return false;
  const double latest = best_history.back();
  double mean = 0.0;
  for (std::size_t i = best_history.size() - 1 - window; i + 1 < best_history.size(); ++i) {
    mean += best_history[i];
  }
  mean /= static_cast<double>(window);
  return latest >= mean;
}

namespace {

std::vector<std::array<double, 3>> fold_all(const std::vector<Individual>& pop,
                                            ViolationMode mode) {
  std::vector<std::array<double, 3>> out;
  out.reserve(pop.size());
  for (const Individual& ind : pop) out.push_back(folded_triple(ind.eval.objectives, mode));
  return out;
}

double effective_rate(const GaParams& ga, const SearchSpaceSchema& schema) {
  return ga.mutation_rate > 0.0
             ? ga.mutation_rate
             : 5.0 / static_cast<double>(std::max<std::size_t>(schema.dimension(), 1));
}

// Offspring generation under rank-crowding parent selection. Children that
// break a constraint are dropped; the shortfall is covered by fresh samples.
std::vector<ScenarioVector> nsga2_mating(const std::vector<Individual>& population,
                                         const ParetoRanking& ranking, std::size_t target,
                                         const SearchSpaceSchema& schema, const GaParams& ga,
                                         Rng& rng) {
  std::vector<ScenarioVector> candidates;
  candidates.reserve(target);
  if (population.empty()) return candidates;
  const double rate = effective_rate(ga, schema);
  for (int iter = 0; iter < ga.max_mating_iter && candidates.size() < target; ++iter) {
    std::size_t need = target - candidates.size();
    std::size_t n_parents = (need + 1) / 2 * 2;
    std::vector<std::size_t> parents =
        rank_crowding_tournament(ranking, population.size(), n_parents, rng);
    for (std::size_t i = 0; i + 1 < parents.size() && candidates.size() < target; i += 2) {
      auto [c1, c2] = sbx_crossover(population[parents[i]].vector,
                                    population[parents[i + 1]].vector, schema,
                                    ga.eta_crossover, ga.p_crossover, rng);
      for (ScenarioVector* child : {&c1, &c2}) {
        if (candidates.size() >= target) break;
        ScenarioVector mutated = polynomial_mutate(*child, schema, rate, ga.eta_mutation, rng);
        if (constraints_satisfied(schema, mutated)) candidates.push_back(std::move(mutated));
      }
    }
  }
  return candidates;
}

std::vector<Individual> select_by_indices(const std::vector<Individual>& pool,
                                          const std::vector<std::size_t>& indices) {
  std::vector<Individual> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(pool[i]);
  return out;
}

// --- surrogate-filtered NSGA-II (SM and UN-SM-A) ---------------------------

struct ObjectiveSurrogate {
  std::array<Mlp, 3> nets;

  std::array<double, 3> predict(const std::vector<double>& x) const {
    return {nets[0].forward(x), nets[1].forward(x), nets[2].forward(x)};
  }
};

ObjectiveSurrogate train_surrogate(const std::vector<Individual>& data,
                                   const SearchSpaceSchema& schema, ViolationMode mode,
                                   const MlpTrainParams& params, std::uint64_t seed) {
  std::vector<std::vector<double>> xs;
  xs.reserve(data.size());
  for (const Individual& ind : data) xs.push_back(normalize(schema, ind.vector));
  ObjectiveSurrogate model;
  for (int m = 0; m < 3; ++m) {
    std::vector<double> y;
    y.reserve(data.size());
    for (const Individual& ind : data) y.push_back(folded_triple(ind.eval.objectives, mode)[m]);
    model.nets[m] = train_regressor(xs, y, params, derive_seed(seed, 0x534d, m));
  }
  return model;
}

void run_nsga2_sm(SearchSession& session, const Evaluator& evaluator,
                  const SearchOptions& options, const BaselineParams& params,
                  bool unique_archive, int budget) {
  const SearchSpaceSchema& schema = *session.schema;
  const GaParams& ga = options.ga;
  Rng rng(derive_seed(options.seed, 0xba5e, session.generation));
  int remaining = budget;

  // Pretraining stage: plain samples evaluated to seed the regressors.
  if (session.all_evaluated.empty() && remaining > 0) {
    std::vector<ScenarioVector> pre;
    std::size_t n = std::min<std::size_t>(params.pretrain_samples, remaining);
    top_up_with_samples(pre, n, schema, session.archive, options.mode, false,
                        ga.sample_max_attempts, rng);
    evaluate_batch(session, pre, evaluator, options, session.generation, remaining);
    session.generation += 1;
  }
  if (session.population.empty() && !session.all_evaluated.empty()) {
    auto triples = fold_all(session.all_evaluated, options.mode);
    session.population = select_by_indices(
        session.all_evaluated,
        rank_crowding_survival(triples, std::min<std::size_t>(ga.pop_size, triples.size())));
  }

  ObjectiveSurrogate model = train_surrogate(session.all_evaluated, schema, options.mode,
                                             params.regressor,
                                             derive_seed(options.seed, 0x5347, 0));

  while (remaining > 0 && !session.population.empty()) {
    const int generation = session.generation;
    if (unique_archive) {
      // Incremental variant: refit on everything seen so far each generation.
      model = train_surrogate(session.all_evaluated, schema, options.mode, params.regressor,
                              derive_seed(options.seed, 0x5347, generation));
    }

    ParetoRanking parent_ranking = nondominated_sort(fold_all(session.population, options.mode));
    const std::size_t target = static_cast<std::size_t>(ga.pop_size) * ga.candidate_multiplier;
    std::vector<ScenarioVector> candidates =
        nsga2_mating(session.population, parent_ranking, target, schema, ga, rng);
    if (unique_archive) {
      std::vector<std::size_t> kept =
          filter_similar(candidates, session.archive, options.mode, {});
      std::vector<ScenarioVector> filtered;
      filtered.reserve(kept.size());
      for (std::size_t i : kept) filtered.push_back(std::move(candidates[i]));
      candidates = std::move(filtered);
      top_up_with_samples(candidates, target, schema, session.archive, options.mode, true,
                          ga.sample_max_attempts, rng);
    } else {
      top_up_with_samples(candidates, target, schema, session.archive, options.mode, false,
                          ga.sample_max_attempts, rng);
    }
    if (candidates.empty()) break;

    // Rank candidates on predicted objectives; only the best predicted slice
    // reaches the simulator.
    std::vector<std::array<double, 3>> predicted(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      predicted[i] = model.predict(normalize(schema, candidates[i]));
    }
    std::vector<std::size_t> picked = rank_crowding_survival(
        predicted, std::min<std::size_t>(ga.pop_size, predicted.size()));
    std::vector<ScenarioVector> offspring;
    offspring.reserve(picked.size());
    for (std::size_t i : picked) offspring.push_back(std::move(candidates[i]));

    std::vector<Individual> evaluated =
        evaluate_batch(session, offspring, evaluator, options, generation, remaining);
    session.generation += 1;

    std::vector<Individual> combined = session.population;
    combined.insert(combined.end(), evaluated.begin(), evaluated.end());
    session.population = select_by_indices(
        combined, rank_crowding_survival(fold_all(combined, options.mode),
                                         std::min<std::size_t>(ga.pop_size, combined.size())));
  }
}

// --- decision-tree gated NSGA-II -------------------------------------------

bool in_critical_region(const DecisionTree& tree, const std::vector<int>& critical,
                        const ScenarioVector& normalized) {
  if (critical.empty()) return true;  // whole box
  int leaf = tree.leaf_of(normalized);
  return std::find(critical.begin(), critical.end(), leaf) != critical.end();
}

void region_top_up(std::vector<ScenarioVector>& candidates, std::size_t target,
                   const SearchSpaceSchema& schema, const DecisionTree& tree,
                   const std::vector<int>& critical, int max_attempts, Rng& rng) {
  while (candidates.size() < target) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      ScenarioVector v = sample(schema, rng, max_attempts);
      if (!in_critical_region(tree, critical, normalize(schema, v))) continue;
      candidates.push_back(std::move(v));
      placed = true;
    }
    if (!placed) break;  // region too small to hit by sampling
  }
}

void run_nsga2_dt(SearchSession& session, const Evaluator& evaluator,
                  const SearchOptions& options, const BaselineParams& params, int budget) {
  const SearchSpaceSchema& schema = *session.schema;
  const GaParams& ga = options.ga;
  Rng rng(derive_seed(options.seed, 0xd7d7, session.generation));

  const int outer = std::max(1, params.dt_outer_iterations);
  int remaining = budget;
  for (int it = 0; it < outer && remaining > 0; ++it) {
    // Even budget split; earlier iterations absorb the remainder.
    int slice = budget / outer + (it < budget % outer ? 1 : 0);
    slice = std::min(slice, remaining);
    if (slice <= 0) continue;

    DecisionTree tree;
    std::vector<int> critical;
    if (!session.all_evaluated.empty()) {
      std::vector<ScenarioVector> xs;
      std::vector<int> labels;
      xs.reserve(session.all_evaluated.size());
      for (const Individual& ind : session.all_evaluated) {
        xs.push_back(normalize(schema, ind.vector));
        labels.push_back(ind.eval.violation ? 1 : 0);
      }
      tree.fit(xs, labels, params.tree);
      critical = tree.critical_leaves();
      if (critical.empty()) {
        std::cerr << "nsga2-dt: tree produced no above-average leaf; "
                     "treating the whole space as critical\n";
      }
    }

    // Seed the inner population from evaluated points inside the region.
    std::vector<Individual> seeds;
    for (const Individual& ind : session.all_evaluated) {
      if (in_critical_region(tree, critical, normalize(schema, ind.vector))) {
        seeds.push_back(ind);
      }
    }
    std::vector<Individual> population;
    if (seeds.size() > static_cast<std::size_t>(ga.pop_size)) {
      population = select_by_indices(
          seeds, rank_crowding_survival(fold_all(seeds, options.mode), ga.pop_size));
    } else {
      population = std::move(seeds);
    }
    if (population.size() < static_cast<std::size_t>(ga.pop_size)) {
      std::vector<ScenarioVector> fresh;
      region_top_up(fresh, ga.pop_size - population.size(), schema, tree, critical,
                    params.region_sample_attempts, rng);
      int inner_remaining = slice;
      std::vector<Individual> evaluated =
          evaluate_batch(session, fresh, evaluator, options, session.generation,
                         inner_remaining);
      session.generation += 1;
      remaining -= slice - inner_remaining;
      slice = inner_remaining;
      population.insert(population.end(), evaluated.begin(), evaluated.end());
    }
    if (population.empty()) break;

    int inner_remaining = slice;
    while (inner_remaining > 0) {
      ParetoRanking ranking = nondominated_sort(fold_all(population, options.mode));
      std::vector<ScenarioVector> candidates = nsga2_mating(
          population, ranking, static_cast<std::size_t>(ga.pop_size), schema, ga, rng);
      // Candidates that leave the critical region are discarded unsimulated.
      std::vector<ScenarioVector> inside;
      inside.reserve(candidates.size());
      for (ScenarioVector& c : candidates) {
        if (in_critical_region(tree, critical, normalize(schema, c))) {
          inside.push_back(std::move(c));
        }
      }
      region_top_up(inside, static_cast<std::size_t>(ga.pop_size), schema, tree, critical,
                    params.region_sample_attempts, rng);
      if (inside.empty()) break;

      std::vector<Individual> evaluated =
          evaluate_batch(session, inside, evaluator, options, session.generation,
                         inner_remaining);
      session.generation += 1;

      std::vector<Individual> combined = population;
      combined.insert(combined.end(), evaluated.begin(), evaluated.end());
      population = select_by_indices(
          combined, rank_crowding_survival(fold_all(combined, options.mode),
                                           std::min<std::size_t>(ga.pop_size, combined.size())));
    }
    remaining -= slice - inner_remaining;
    session.population = population;
  }
}

// --- global/local fuzzer with restarts --------------------------------------

void run_avfuzzer(SearchSession& session, const Evaluator& evaluator,
                  const SearchOptions& options, const BaselineParams& params, int budget) {
  const SearchSpaceSchema& schema = *session.schema;
  GaParams ga = options.ga;
  ga.pop_size = params.avfuzzer_population;
  if (ga.mutation_rate <= 0.0) {
    ga.mutation_rate = 1.0 / static_cast<double>(std::max<std::size_t>(schema.dimension(), 1));
  }
  Rng rng(derive_seed(options.seed, 0xaf22, session.generation));
  int remaining = budget;

  auto run_plain_generation = [&](std::vector<Individual>& population) {
    std::vector<double> fitness_values(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
      fitness_values[i] = population[i].eval.fitness;
    }
    std::vector<ScenarioVector> candidates;
    const std::size_t target = static_cast<std::size_t>(ga.pop_size);
    for (int iter = 0; iter < ga.max_mating_iter && candidates.size() < target; ++iter) {
      std::size_t need = target - candidates.size();
      std::size_t n_parents = (need + 1) / 2 * 2;
      std::vector<std::size_t> parents = tournament_select(fitness_values, n_parents, rng);
      for (std::size_t i = 0; i + 1 < parents.size() && candidates.size() < target; i += 2) {
        auto [c1, c2] = sbx_crossover(population[parents[i]].vector,
                                      population[parents[i + 1]].vector, schema,
                                      ga.eta_crossover, ga.p_crossover, rng);
        for (ScenarioVector* child : {&c1, &c2}) {
          if (candidates.size() >= target) break;
          ScenarioVector mutated =
              polynomial_mutate(*child, schema, ga.mutation_rate, ga.eta_mutation, rng);
          if (constraints_satisfied(schema, mutated)) candidates.push_back(std::move(mutated));
        }
      }
    }
    top_up_with_samples(candidates, target, schema, session.archive, options.mode, false,
                        ga.sample_max_attempts, rng);
    std::vector<Individual> evaluated =
        evaluate_batch(session, candidates, evaluator, options, session.generation, remaining);
    session.generation += 1;

    std::vector<Individual> combined = population;
    combined.insert(combined.end(), evaluated.begin(), evaluated.end());
    std::vector<double> combined_fitness(combined.size());
    for (std::size_t i = 0; i < combined.size(); ++i) {
      combined_fitness[i] = combined[i].eval.fitness;
    }
    population = select_by_indices(combined, survival(combined_fitness, ga.pop_size));
  };

  auto best_fitness = [](const std::vector<Individual>& population) {
    double best = std::numeric_limits<double>::infinity();
    for (const Individual& ind : population) best = std::min(best, ind.eval.fitness);
    return best;
  };

  // Bootstrap the global population.
  std::vector<Individual> global_pop;
  {
    std::vector<ScenarioVector> init;
    top_up_with_samples(init, static_cast<std::size_t>(ga.pop_size), schema, session.archive,
                        options.mode, false, ga.sample_max_attempts, rng);
    global_pop = evaluate_batch(session, init, evaluator, options, session.generation, remaining);
    session.generation += 1;
  }
  std::vector<double> history;
  if (!global_pop.empty()) history.push_back(best_fitness(global_pop));

  while (remaining > 0 && !global_pop.empty()) {
    if (avfuzzer_stagnated(history, params.avfuzzer_stagnation_window)) {
      // Local exploitation around the incumbent best, then a diversified
      // restart of the global population.
      const Individual* best = &global_pop.front();
      for (const Individual& ind : global_pop) {
        if (ind.eval.fitness < best->eval.fitness) best = &ind;
      }
      std::vector<ScenarioVector> local_seeds;
      for (int i = 0; i < ga.pop_size; ++i) {
        ScenarioVector mutated =
            polynomial_mutate(best->vector, schema, ga.mutation_rate, ga.eta_mutation, rng);
        if (!constraints_satisfied(schema, mutated)) mutated = best->vector;
        local_seeds.push_back(std::move(mutated));
      }
      std::vector<Individual> local_pop = evaluate_batch(session, local_seeds, evaluator,
                                                         options, session.generation, remaining);
      session.generation += 1;
      for (int g = 0; g < params.avfuzzer_local_generations && remaining > 0 &&
                      !local_pop.empty();
           ++g) {
        run_plain_generation(local_pop);
      }
      if (remaining <= 0) break;

      // Farthest-point restart: among a sampled pool, greedily keep the
      // vectors with the largest minimum distance to everything seen so far.
      std::vector<ScenarioVector> pool;
      top_up_with_samples(pool, static_cast<std::size_t>(ga.pop_size) * 25, schema,
                          session.archive, options.mode, false, ga.sample_max_attempts, rng);
      std::vector<ScenarioVector> kept_norm;
      std::vector<ScenarioVector> restart;
      std::vector<double> min_dist(pool.size(), std::numeric_limits<double>::infinity());
      std::vector<ScenarioVector> pool_norm(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) pool_norm[i] = normalize(schema, pool[i]);
      for (const Individual& ind : session.all_evaluated) {
        ScenarioVector n = normalize(schema, ind.vector);
        for (std::size_t i = 0; i < pool.size(); ++i) {
          double d2 = 0.0;
          for (std::size_t f = 0; f < n.size(); ++f) {
            double diff = pool_norm[i][f] - n[f];
            d2 += diff * diff;
          }
          min_dist[i] = std::min(min_dist[i], d2);
        }
      }
      while (restart.size() < static_cast<std::size_t>(ga.pop_size) && !pool.empty()) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < pool.size(); ++i) {
          if (min_dist[i] > min_dist[far]) far = i;
        }
        restart.push_back(pool[far]);
        ScenarioVector chosen = pool_norm[far];
        pool.erase(pool.begin() + far);
        pool_norm.erase(pool_norm.begin() + far);
        min_dist.erase(min_dist.begin() + far);
        for (std::size_t i = 0; i < pool.size(); ++i) {
          double d2 = 0.0;
          for (std::size_t f = 0; f < chosen.size(); ++f) {
            double diff = pool_norm[i][f] - chosen[f];
            d2 += diff * diff;
          }
          min_dist[i] = std::min(min_dist[i], d2);
        }
      }
      global_pop = evaluate_batch(session, restart, evaluator, options, session.generation,
                                  remaining);
      session.generation += 1;
      history.clear();
      if (!global_pop.empty()) history.push_back(best_fitness(global_pop));
      continue;
    }

    run_plain_generation(global_pop);
    if (global_pop.empty()) break;
    history.push_back(best_fitness(global_pop));
  }
  session.population = global_pop;
}

}  // namespace

void run_baseline(SearchSession& session, const Evaluator& evaluator,
                  const SearchOptions& options, BaselineMethod method,
                  const BaselineParams& params, int budget) {
  switch (method) {
    case BaselineMethod::Nsga2Sm:
      run_nsga2_sm(session, evaluator, options, params, false, budget);
      break;
    case BaselineMethod::Nsga2UnSmA:
      run_nsga2_sm(session, evaluator, options, params, true, budget);
      break;
    case BaselineMethod::Nsga2Dt:
      run_nsga2_dt(session, evaluator, options, params, budget);
      break;
    case BaselineMethod::AvFuzzer:
      run_avfuzzer(session, evaluator, options, params, budget);
      break;
  }
}

}  // namespace scenfuzz
