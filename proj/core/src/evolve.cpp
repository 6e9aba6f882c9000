#include "scenfuzz/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "scenfuzz/errors.hpp"

namespace scenfuzz {

std::string to_string(SearchVariant v) {
  switch (v) {
    case SearchVariant::Random: return "RANDOM";
    case SearchVariant::RandomUnNnGrad: return "RANDOM-UN-NN-GRAD";
    case SearchVariant::Ga: return "GA";
    case SearchVariant::GaUn: return "GA-UN";
    case SearchVariant::GaUnNn: return "GA-UN-NN";
    case SearchVariant::GaUnNnGrad: return "GA-UN-NN-GRAD";
  }
  return "unknown";
}

std::optional<SearchVariant> search_variant_from_string(const std::string& s) {
  if (s == "RANDOM") return SearchVariant::Random;
  if (s == "RANDOM-UN-NN-GRAD") return SearchVariant::RandomUnNnGrad;
  if (s == "GA") return SearchVariant::Ga;
  if (s == "GA-UN") return SearchVariant::GaUn;
  if (s == "GA-UN-NN") return SearchVariant::GaUnNn;
  if (s == "GA-UN-NN-GRAD") return SearchVariant::GaUnNnGrad;
  return std::nullopt;
}

bool variant_uses_dedup(SearchVariant v) {
  return v == SearchVariant::GaUn || v == SearchVariant::GaUnNn ||
         v == SearchVariant::GaUnNnGrad || v == SearchVariant::RandomUnNnGrad;
}

bool variant_uses_nn(SearchVariant v) {
  return v == SearchVariant::GaUnNn || v == SearchVariant::GaUnNnGrad ||
         v == SearchVariant::RandomUnNnGrad;
}

bool variant_uses_grad(SearchVariant v) {
  return v == SearchVariant::GaUnNnGrad || v == SearchVariant::RandomUnNnGrad;
}

bool variant_samples_candidates(SearchVariant v) {
  return v == SearchVariant::Random || v == SearchVariant::RandomUnNnGrad;
}

std::vector<std::size_t> tournament_select(const std::vector<double>& fitness_values,
                                           std::size_t count, Rng& rng) {
  const std::size_t n = fitness_values.size();
  std::vector<std::size_t> winners;
  winners.reserve(count);
  std::vector<std::size_t> pool(2 * n);
  while (winners.size() < count) {
    for (std::size_t i = 0; i < n; ++i) {
      pool[2 * i] = i;
      pool[2 * i + 1] = i;
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i + 1 < pool.size() && winners.size() < count; i += 2) {
      std::size_t a = pool[i], b = pool[i + 1];
      winners.push_back(fitness_values[b] < fitness_values[a] ? b : a);
    }
    if (n == 0) throw SchemaError("tournament selection over an empty population");
  }
  return winners;
}

std::pair<ScenarioVector, ScenarioVector> sbx_crossover(const ScenarioVector& a,
                                                        const ScenarioVector& b,
                                                        const SearchSpaceSchema& schema,
                                                        double eta, double p_field, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ScenarioVector c1 = a, c2 = b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (u01(rng) >= p_field) continue;
    if (std::abs(a[i] - b[i]) < 1e-14) continue;  // identical genes cross to themselves
    double u = u01(rng);
    double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                           : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
    c1[i] = 0.5 * ((1.0 + beta) * a[i] + (1.0 - beta) * b[i]);
    c2[i] = 0.5 * ((1.0 - beta) * a[i] + (1.0 + beta) * b[i]);
  }
  return {round_and_clip(schema, std::move(c1)), round_and_clip(schema, std::move(c2))};
}

ScenarioVector polynomial_mutate(const ScenarioVector& v, const SearchSpaceSchema& schema,
                                 double rate, double eta, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ScenarioVector out = v;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (u01(rng) >= rate) continue;
    const FieldSpec& f = schema.fields[i];
    if (!f.changeable()) continue;
    double y = out[i];
    double delta1 = (y - f.min) / f.range();
    double delta2 = (f.max - y) / f.range();
    double rnd = u01(rng);
    double mut_pow = 1.0 / (eta + 1.0);
    double deltaq;
    if (rnd <= 0.5) {
      double xy = 1.0 - delta1;
      double val = 2.0 * rnd + (1.0 - 2.0 * rnd) * std::pow(xy, eta + 1.0);
      deltaq = std::pow(val, mut_pow) - 1.0;
    } else {
      double xy = 1.0 - delta2;
      double val = 2.0 * (1.0 - rnd) + 2.0 * (rnd - 0.5) * std::pow(xy, eta + 1.0);
      deltaq = 1.0 - std::pow(val, mut_pow);
    }
    out[i] = y + deltaq * f.range();
  }
  return round_and_clip(schema, std::move(out));
}

std::vector<std::size_t> survival(const std::vector<double>& fitness_values, std::size_t keep) {
  std::vector<std::size_t> order(fitness_values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fitness_values[a] < fitness_values[b];
  });
  order.resize(std::min(keep, order.size()));
  return order;
}

std::vector<Individual> evaluate_batch(SearchSession& session,
                                       const std::vector<ScenarioVector>& vectors,
                                       const Evaluator& evaluator, const SearchOptions& options,
                                       int generation, int& remaining) {
  std::size_t n = std::min(vectors.size(), static_cast<std::size_t>(std::max(remaining, 0)));
  std::vector<Evaluation> evals(n);

  if (options.threads > 1 && n > 1) {
    std::size_t chunk = (n + options.threads - 1) / options.threads;
    std::vector<std::future<void>> futures;
    for (std::size_t start = 0; start < n; start += chunk) {
      std::size_t end = std::min(n, start + chunk);
      futures.push_back(std::async(std::launch::async, [&, start, end]() {
        for (std::size_t i = start; i < end; ++i) {
          evals[i] = evaluator(vectors[i],
                               derive_seed(options.seed, static_cast<std::uint64_t>(generation), i));
        }
      }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      evals[i] =
          evaluator(vectors[i], derive_seed(options.seed, static_cast<std::uint64_t>(generation), i));
    }
  }

  // merge strictly in candidate index order
  std::vector<Individual> evaluated;
  evaluated.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Individual ind{vectors[i], evals[i]};

    RunLogRecord rec;
    rec.generation = generation;
    rec.index = static_cast<int>(i);
    rec.vector = ind.vector;
    rec.normalized = normalize(*session.schema, ind.vector);
    rec.objectives = ind.eval.objectives;
    rec.fitness = ind.eval.fitness;
    rec.violation_kind = ind.eval.violation;
    rec.wall_time_ms = ind.eval.sim_time_ms;
    rec.unique_flag = false;
    if (ind.eval.violation) {
      ArchiveEntry entry;
      entry.vector = ind.vector;
      entry.kind = *ind.eval.violation;
      entry.generation = generation;
      const ObjectiveVector& o = ind.eval.objectives;
      entry.objectives = {o.f_collision, o.f_object, o.f_view,
                          o.f_wronglane, o.f_offroad, o.f_deviation};
      rec.unique_flag = session.archive.insert_if_unique(std::move(entry));
    }
    session.log.push_back(std::move(rec));
    session.all_evaluated.push_back(ind);
    evaluated.push_back(std::move(ind));
  }
  remaining -= static_cast<int>(n);
  session.evaluations += static_cast<int>(n);
  return evaluated;
}

void top_up_with_samples(std::vector<ScenarioVector>& candidates, std::size_t target,
                         const SearchSpaceSchema& schema, const ViolationArchive& archive,
                         ViolationType kind, bool use_dedup, int max_attempts, Rng& rng) {
  std::size_t need_fields = distinctness_threshold(schema, archive.params().th1_percent);
  double th2 = archive.params().th2_percent;
  while (candidates.size() < target) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      ScenarioVector v = sample(schema, rng, max_attempts);
      if (use_dedup) {
        if (!archive.is_unique(v, kind)) continue;
        bool distinct = true;
        for (const ScenarioVector& c : candidates) {
          if (fields_differ(schema, v, c, th2) < need_fields) {
            distinct = false;
            break;
          }
        }
        if (!distinct) continue;
      }
      candidates.push_back(std::move(v));
      placed = true;
    }
    if (!placed) break;  // space saturated at these thresholds
  }
}

namespace {

std::vector<ScenarioVector> generate_candidates(SearchSession& session,
                                                const SearchOptions& options, std::size_t target,
                                                Rng& rng) {
  const SearchSpaceSchema& schema = *session.schema;
  const GaParams& ga = options.ga;
  const bool use_dedup = variant_uses_dedup(options.variant);
  std::vector<ScenarioVector> candidates;
  candidates.reserve(target);

  if (!variant_samples_candidates(options.variant) && !session.population.empty()) {
    std::vector<double> fitness_values(session.population.size());
    for (std::size_t i = 0; i < session.population.size(); ++i) {
      fitness_values[i] = session.population[i].eval.fitness;
    }
    double rate = ga.mutation_rate > 0.0
                      ? ga.mutation_rate
                      : 5.0 / static_cast<double>(std::max<std::size_t>(schema.dimension(), 1));
    for (int iter = 0; iter < ga.max_mating_iter && candidates.size() < target; ++iter) {
      std::size_t need = target - candidates.size();
      std::size_t n_parents = (need + 1) / 2 * 2;
      std::vector<std::size_t> parents = tournament_select(fitness_values, n_parents, rng);
      std::vector<ScenarioVector> children;
      children.reserve(n_parents);
      for (std::size_t i = 0; i + 1 < parents.size(); i += 2) {
        auto [c1, c2] = sbx_crossover(session.population[parents[i]].vector,
                                      session.population[parents[i + 1]].vector, schema,
                                      ga.eta_crossover, ga.p_crossover, rng);
        children.push_back(polynomial_mutate(c1, schema, rate, ga.eta_mutation, rng));
        if (children.size() < need) {
          children.push_back(polynomial_mutate(c2, schema, rate, ga.eta_mutation, rng));
        }
      }
      // joint constraints are enforced at generation time
      std::vector<ScenarioVector> feasible;
      feasible.reserve(children.size());
      for (auto& c : children) {
        if (constraints_satisfied(schema, c)) feasible.push_back(std::move(c));
      }
      if (use_dedup) {
        for (std::size_t idx :
             filter_similar(feasible, session.archive, options.mode, candidates)) {
          candidates.push_back(feasible[idx]);
        }
      } else {
        for (auto& c : feasible) candidates.push_back(std::move(c));
        if (candidates.size() > target) candidates.resize(target);
      }
    }
  }

  top_up_with_samples(candidates, target, schema, session.archive, options.mode, use_dedup,
                      ga.sample_max_attempts, rng);
  return candidates;
}

}  // namespace

void run_search(SearchSession& session, const Evaluator& evaluator, const SearchOptions& options,
                int budget) {
  const SearchSpaceSchema& schema = *session.schema;
  const GaParams& ga = options.ga;
  const bool use_dedup = variant_uses_dedup(options.variant);
  const bool use_nn = variant_uses_nn(options.variant);
  Rng rng(derive_seed(options.seed, 0xe701, static_cast<std::uint64_t>(session.generation)));
  int remaining = budget;

  if (session.population.empty() && remaining > 0) {
    std::vector<ScenarioVector> init;
    top_up_with_samples(init, static_cast<std::size_t>(ga.pop_size), schema, session.archive,
                        options.mode, use_dedup, ga.sample_max_attempts, rng);
    session.population = evaluate_batch(session, init, evaluator, options, session.generation,
                                        remaining);
    session.generation += 1;
  }

  while (remaining > 0) {
    const int generation = session.generation;
    const bool nn_active =
        use_nn && generation > ga.generation_to_use_nn && !session.all_evaluated.empty();
    const std::size_t target = nn_active
        ? static_cast<std::size_t>(ga.pop_size) * ga.candidate_multiplier
        : static_cast<std::size_t>(ga.pop_size);

    std::vector<ScenarioVector> candidates = generate_candidates(session, options, target, rng);
    if (candidates.empty()) break;  // nothing distinct left to try

    std::vector<ScenarioVector> offspring;
    if (nn_active) {
      std::vector<std::vector<double>> xs;
      std::vector<int> labels;
      xs.reserve(session.all_evaluated.size());
      labels.reserve(session.all_evaluated.size());
      int positives = 0;
      for (const Individual& ind : session.all_evaluated) {
        xs.push_back(normalize(schema, ind.vector));
        int label = ind.eval.violation ? 1 : 0;
        positives += label;
        labels.push_back(label);
      }
      Mlp model = train_classifier(xs, labels, options.surrogate.train,
                                   derive_seed(options.seed, 0x4e4e, generation));

      std::vector<double> confidences(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) confidences[i] = model.forward(xs[i]);
      double violation_fraction = static_cast<double>(positives) / static_cast<double>(xs.size());

      GradMutationParams gparams;
      gparams.th_conf1 = compute_th_conf1(confidences, violation_fraction);
      gparams.th_conf2 = options.surrogate.th_conf2;
      gparams.n_steps = options.surrogate.n_steps;
      gparams.lambda = options.surrogate.lambda;
      gparams.epsilon = options.surrogate.epsilon;

      std::vector<ScenarioVector> normalized(candidates.size());
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        normalized[i] = normalize(schema, candidates[i]);
      }
      std::vector<std::size_t> picked =
          rank_and_select(model, normalized, static_cast<std::size_t>(ga.pop_size));

      if (variant_uses_grad(options.variant)) {
        std::vector<ScenarioVector> finalized;  // keeps mutated offspring mutually distinct
        finalized.reserve(picked.size());
        for (std::size_t idx : picked) {
          ScenarioVector mutated_norm =
              gradient_mutate(normalized[idx], model, gparams, session.archive, options.mode,
                              schema, use_dedup ? &finalized : nullptr);
          ScenarioVector mutated = denormalize(schema, mutated_norm);
          if (!constraints_satisfied(schema, mutated)) {
            mutated = candidates[idx];  // discrete rounding broke a constraint
          }
          finalized.push_back(mutated);
          offspring.push_back(std::move(mutated));
        }
      } else {
        for (std::size_t idx : picked) offspring.push_back(candidates[idx]);
      }
    } else {
      offspring.assign(candidates.begin(),
                       candidates.begin() +
                           std::min(candidates.size(), static_cast<std::size_t>(ga.pop_size)));
    }

    std::vector<Individual> evaluated =
        evaluate_batch(session, offspring, evaluator, options, generation, remaining);
    session.generation += 1;

    std::vector<Individual> combined = session.population;
    combined.insert(combined.end(), evaluated.begin(), evaluated.end());
    std::vector<double> fitness_values(combined.size());
    for (std::size_t i = 0; i < combined.size(); ++i) {
      fitness_values[i] = combined[i].eval.fitness;
    }
    std::vector<Individual> next;
    next.reserve(ga.pop_size);
    for (std::size_t idx : survival(fitness_values, static_cast<std::size_t>(ga.pop_size))) {
      next.push_back(combined[idx]);
    }
    session.population = std::move(next);
  }
}

}  // namespace scenfuzz
