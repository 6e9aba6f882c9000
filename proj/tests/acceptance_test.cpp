// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failing criteria. Every check is self-contained with its own oracle so a
// failure names the broken property, not a test helper.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "scenfuzz/campaign.hpp"
#include "scenfuzz/dedup.hpp"
#include "scenfuzz/evolve.hpp"
#include "scenfuzz/grammar.hpp"
#include "scenfuzz/mlp.hpp"
#include "scenfuzz/pareto.hpp"
#include "scenfuzz/runlog.hpp"
#include "scenfuzz/stats.hpp"
#include "scenfuzz/surrogate.hpp"
#include "test_util.hpp"

using namespace scenfuzz;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "    " << what << '\n';
    }
  }
};

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

std::vector<double> to_doubles(const std::vector<int>& v) {
  return std::vector<double>(v.begin(), v.end());
}

// ---------------------------------------------------------------------------
// 1. Uniqueness arithmetic
// ---------------------------------------------------------------------------

// Independent re-derivation of the distinctness rule, used as the oracle.
std::size_t oracle_differing_fields(const SearchSpaceSchema& schema, const ScenarioVector& a,
                                    const ScenarioVector& b, double th2_percent) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    const FieldSpec& f = schema.fields[i];
    if (!(f.max > f.min)) continue;
    if (f.kind == FieldKind::Discrete) {
      if (std::llround(a[i]) != std::llround(b[i])) ++count;
    } else if (std::abs(a[i] - b[i]) >= th2_percent / 100.0 * (f.max - f.min)) {
      ++count;
    }
  }
  return count;
}

std::size_t oracle_threshold(const SearchSpaceSchema& schema, double th1_percent) {
  std::size_t changeable = 0;
  for (const FieldSpec& f : schema.fields) {
    if (f.max > f.min) ++changeable;
  }
  return static_cast<std::size_t>(std::ceil(th1_percent / 100.0 * changeable));
}

void criterion_uniqueness(Check& c) {
  // worked example: speeds 3 vs 4 in [0,10] are the same field at th2=15%
  SearchSpaceSchema speed = testutil::make_schema({{"speed", 0.0, 10.0}});
  c.require((4.0 - 3.0) / (10.0 - 0.0) < 0.15, "range fraction 0.1 must be below 0.15");
  c.require(fields_differ(speed, {3.0}, {4.0}, 15.0) == 0, "3 vs 4 at th2=15 must not differ");
  c.require(fields_differ(speed, {3.0}, {4.0}, 10.0) == 1, "3 vs 4 at th2=10 differs (boundary)");
  c.require(fields_differ(speed, {3.0}, {4.0}, 5.0) == 1, "3 vs 4 at th2=5 differs");

  std::vector<SearchSpaceSchema> shapes;
  shapes.push_back(testutil::box_schema(6));
  shapes.push_back(testutil::make_schema({{"a", 0, 1},
                                          {"b", -2, 2},
                                          {"c", 0, 4, true},
                                          {"fixed", 3, 3},
                                          {"d", 0, 10},
                                          {"e", 0, 3, true}}));
  shapes.push_back(testutil::box_schema(12));

  const double grid[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const double th1_choices[3] = {10.0, 25.0, 50.0};
  const double th2_choices[3] = {10.0, 25.0, 50.0};
  Rng rng(4242);
  std::uniform_int_distribution<int> pick5(0, 4);
  std::uniform_int_distribution<int> pick3(0, 2);
  std::uniform_int_distribution<int> coin(0, 1);

  for (int stream = 0; stream < 10000; ++stream) {
    const SearchSpaceSchema& schema = shapes[stream % shapes.size()];
    const double th1 = th1_choices[pick3(rng)];
    const double th2 = th2_choices[pick3(rng)];
    const std::size_t need = oracle_threshold(schema, th1);
    ViolationArchive archive(&schema, {th1, th2});
    const int length = 5 + stream % 10;
    for (int i = 0; i < length; ++i) {
      ScenarioVector v(schema.dimension());
      for (std::size_t f = 0; f < schema.dimension(); ++f) {
        const FieldSpec& spec = schema.fields[f];
        v[f] = spec.min + grid[pick5(rng)] * (spec.max - spec.min);
        if (spec.kind == FieldKind::Discrete) v[f] = std::round(v[f]);
      }
      ViolationType kind = coin(rng) ? ViolationType::Collision : ViolationType::OutOfRoad;

      bool expected = true;
      for (const ArchiveEntry& e : archive.entries()) {
        if (e.kind != kind) continue;
        if (oracle_differing_fields(schema, e.vector, v, th2) < need) {
          expected = false;
          break;
        }
      }
      const bool reported = archive.is_unique(v, kind);
      const bool inserted = archive.insert_if_unique({v, kind, 0, {}});
      if (reported != expected || inserted != expected) {
        c.require(false, "stream " + std::to_string(stream) + " insert " + std::to_string(i) +
                             ": expected " + (expected ? "unique" : "duplicate"));
        return;
      }
    }
    // pairwise invariant on the final archive
    const auto& entries = archive.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      for (std::size_t j = i + 1; j < entries.size(); ++j) {
        if (entries[i].kind != entries[j].kind) continue;
        if (oracle_differing_fields(schema, entries[i].vector, entries[j].vector, th2) < need) {
          c.require(false, "stream " + std::to_string(stream) + ": archived pair " +
                               std::to_string(i) + "," + std::to_string(j) + " not distinct");
          return;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 2. Projection feasibility
// ---------------------------------------------------------------------------

void criterion_projection(Check& c) {
  Rng rng(2468);
  auto urand = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 2 + trial % 5;  // 2..6 fields
    std::vector<testutil::FieldDef> fields;
    for (int i = 0; i < k; ++i) {
      const double lo = urand(-2.0, 2.0);
      fields.push_back({"f" + std::to_string(i), lo, lo + urand(0.5, 3.0), false});
    }
    // up to 5 rows, each cutting through the box midpoint with generous slack
    // so the feasible region keeps enough volume for rejection sampling
    const int n_rows = trial % 6;
    std::vector<testutil::ConstraintDef> defs;
    for (int r = 0; r < n_rows; ++r) {
      testutil::ConstraintDef def;
      double lhs_mid = 0.0;
      double spread = 0.0;
      for (int i = 0; i < k; ++i) {
        const double coeff = urand(-1.0, 1.0);
        def.coefficients.push_back(coeff);
        def.labels.push_back(fields[i].name);
        lhs_mid += coeff * 0.5 * (fields[i].min + fields[i].max);
        spread += std::abs(coeff) * 0.5 * (fields[i].max - fields[i].min);
      }
      def.value = lhs_mid + 0.3 * spread;
      defs.push_back(std::move(def));
    }
    SearchSpaceSchema schema = testutil::make_schema(fields, defs);
    const std::vector<ConstraintRow> rows = schema.normalized_constraints();

    const ScenarioVector x = sample(schema, rng);
    const ScenarioVector xn = normalize(schema, x);
    const double eps = urand(0.05, 0.6);

    auto feasible = [&](const std::vector<double>& u, const std::string& tag) {
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < -1e-9 || u[i] > 1.0 + 1e-9) {
          c.require(false, tag + ": left the unit box (trial " + std::to_string(trial) + ")");
          return false;
        }
        if (std::abs(u[i] - xn[i]) > eps + 1e-9) {
          c.require(false, tag + ": exceeded the epsilon budget (trial " +
                               std::to_string(trial) + ")");
          return false;
        }
      }
      for (const ConstraintRow& row : rows) {
        double lhs = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) lhs += row.row[i] * u[i];
        if (lhs > row.value + 1e-9) {
          c.require(false, tag + ": constraint violated by " + std::to_string(lhs - row.value) +
                               " (trial " + std::to_string(trial) + ")");
          return false;
        }
      }
      return true;
    };

    // raw perturbation triple
    std::vector<double> dx(k);
    for (double& d : dx) d = urand(-2.0 * eps, 2.0 * eps);
    std::vector<double> proj = project_perturbation(dx, xn, rows, eps);
    std::vector<double> moved(xn);
    for (int i = 0; i < k; ++i) moved[i] += proj[i];
    if (!feasible(moved, "projection")) return;

    // gradient-guided mutation end to end, random confidence surface
    Mlp model;
    model.input_ = k;
    model.hidden_ = 6;
    model.output_ = Mlp::Output::Sigmoid;
    model.w1.resize(static_cast<std::size_t>(model.hidden_) * k);
    model.b1.resize(model.hidden_);
    model.w2.resize(model.hidden_);
    for (double& w : model.w1) w = urand(-2.0, 2.0);
    for (double& b : model.b1) b = urand(-1.0, 1.0);
    for (double& w : model.w2) w = urand(-2.0, 2.0);
    model.b2 = urand(-1.0, 1.0);

    GradMutationParams params;
    params.th_conf1 = 2.0;  // always mutate
    params.th_conf2 = 2.0;  // never stop early
    params.n_steps = 12;
    params.lambda = 0.1;
    params.epsilon = eps;
    ViolationArchive archive(&schema, {10.0, 50.0});
    ScenarioVector out =
        gradient_mutate(xn, model, params, archive, ViolationType::Collision, schema);
    if (!feasible(out, "gradient_mutate")) return;
    if (!check_constraints(schema, denormalize(schema, out)).empty()) {
      c.require(false, "denormalized output violates a raw constraint (trial " +
                           std::to_string(trial) + ")");
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// 3. Gradient correctness
// ---------------------------------------------------------------------------

void criterion_gradient(Check& c) {
  Rng rng(777);
  auto urand = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  for (int m = 0; m < 20; ++m) {
    const int input = 2 + m % 9;
    const int hidden = 4 + (m * 7) % 21;
    const Mlp::Output head = (m % 2 == 0) ? Mlp::Output::Sigmoid : Mlp::Output::Linear;
    Mlp model(input, hidden, head, rng);
    if (head == Mlp::Output::Linear) {
      model.y_scale = urand(0.5, 2.0);
      model.y_offset = urand(-1.0, 1.0);
    }
    for (int p = 0; p < 20; ++p) {
      std::vector<double> x(input);
      for (double& v : x) v = urand(-1.0, 1.0);
      const std::vector<double> grad = model.grad_input(x);

      const double h = 1e-5;
      double worst = 0.0;
      double scale = 1.0;
      for (int i = 0; i < input; ++i) {
        std::vector<double> hi(x), lo(x);
        hi[i] += h;
        lo[i] -= h;
        const double fd = (model.forward(hi) - model.forward(lo)) / (2.0 * h);
        worst = std::max(worst, std::abs(grad[i] - fd));
        scale = std::max(scale, std::abs(fd));
      }
      if (worst / scale > 1e-4) {
        c.require(false, "model " + std::to_string(m) + " point " + std::to_string(p) +
                             ": relative error " + std::to_string(worst / scale));
        return;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 4. Non-dominated sort
// ---------------------------------------------------------------------------

bool oracle_dominates(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  bool strictly = false;
  for (int i = 0; i < 3; ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

std::vector<int> oracle_ranks(const std::vector<std::array<double, 3>>& pts) {
  std::vector<int> rank(pts.size(), -1);
  int front = 0;
  std::size_t assigned = 0;
  while (assigned < pts.size()) {
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (rank[i] != -1) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
        dominated = j != i && rank[j] == -1 && oracle_dominates(pts[j], pts[i]);
      }
      if (!dominated) current.push_back(i);
    }
    for (std::size_t i : current) rank[i] = front;
    assigned += current.size();
    ++front;
  }
  return rank;
}

void criterion_sort(Check& c) {
  Rng rng(808);
  std::uniform_int_distribution<int> size_dist(1, 50);
  std::uniform_int_distribution<int> level(0, 4);
  std::uniform_real_distribution<double> real(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size_dist(rng);
    std::vector<std::array<double, 3>> pts(n);
    const bool discrete = trial % 2 == 0;  // discrete levels force ties
    for (auto& p : pts) {
      for (double& v : p) v = discrete ? static_cast<double>(level(rng)) : real(rng);
    }
    const ParetoRanking ranking = nondominated_sort(pts);
    const std::vector<int> expected = oracle_ranks(pts);
    if (ranking.rank != expected) {
      c.require(false, "rank mismatch on trial " + std::to_string(trial));
      return;
    }
    // fronts must agree with the rank array
    for (std::size_t f = 0; f < ranking.fronts.size(); ++f) {
      for (std::size_t i : ranking.fronts[f]) {
        if (ranking.rank[i] != static_cast<int>(f)) {
          c.require(false, "front/rank inconsistency on trial " + std::to_string(trial));
          return;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 5. Statistics
// ---------------------------------------------------------------------------

double oracle_a12(const std::vector<double>& a, const std::vector<double>& b) {
  long long half_wins = 0;  // counted in half units so the sum stays exact
  for (double x : a) {
    for (double y : b) {
      if (x > y) {
        half_wins += 2;
      } else if (x == y) {
        half_wins += 1;
      }
    }
  }
  return static_cast<double>(half_wins) / (2.0 * a.size() * b.size());
}

// Exact two-sided permutation p-value of the rank-sum statistic for 6 vs 6.
double exact_permutation_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();

  // midranks
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }

  double observed = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) observed += ranks[k];
  const double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
  const double mean_sum = total * a.size() / static_cast<double>(n);
  const double dev = std::abs(observed - mean_sum);

  // all C(12,6) subsets via a combination odometer
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  long long extreme = 0;
  long long count = 0;
  while (true) {
    double sum = 0.0;
    for (std::size_t k : idx) sum += ranks[k];
    if (std::abs(sum - mean_sum) >= dev - 1e-12) ++extreme;
    ++count;
    int pos = static_cast<int>(idx.size()) - 1;
    while (pos >= 0 && idx[pos] == n - idx.size() + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (std::size_t k = pos + 1; k < idx.size(); ++k) idx[k] = idx[k - 1] + 1;
  }
  return static_cast<double>(extreme) / static_cast<double>(count);
}

void criterion_statistics(Check& c) {
  // brute-force pair counting matches exactly
  Rng rng(99);
  std::uniform_int_distribution<int> size_dist(1, 12);
  std::uniform_int_distribution<int> value(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(size_dist(rng)), b(size_dist(rng));
    for (double& v : a) v = value(rng);
    for (double& v : b) v = value(rng);
    if (a12(a, b) != oracle_a12(a, b)) {
      c.require(false, "a12 deviates from pair counting on trial " + std::to_string(trial));
      return;
    }
  }

  const std::vector<double> same{3, 1, 4, 1, 5, 9};
  c.require(a12(same, same) == 0.5, "a12 of identical samples must be exactly 0.5");
  c.require(ranksum_test(same, same).p_value == 1.0,
            "rank-sum on identical samples must report p=1");

  // normal approximation tracks the exact permutation distribution at n=m=6
  std::vector<std::pair<std::vector<double>, std::vector<double>>> cases = {
      {{12, 7, 22, 18, 9, 14}, {25, 31, 19, 28, 33, 26}},
      {{1, 2, 2, 3, 5, 7}, {2, 2, 3, 3, 4, 8}},
      {{1, 2, 3, 4, 5, 6}, {101, 102, 103, 104, 105, 106}},
  };
  std::uniform_int_distribution<int> small(0, 5);
  for (int extra = 0; extra < 25; ++extra) {
    std::vector<double> a(6), b(6);
    for (double& v : a) v = small(rng);
    for (double& v : b) v = small(rng);
    if (a == b) continue;
    bool constant = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; }) &&
                    std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; });
    if (constant) continue;
    cases.emplace_back(a, b);
  }
  for (std::size_t t = 0; t < cases.size(); ++t) {
    const double approx = ranksum_test(cases[t].first, cases[t].second).p_value;
    const double exact = exact_permutation_p(cases[t].first, cases[t].second);
    if (std::abs(approx - exact) > 0.02) {
      c.require(false, "case " + std::to_string(t) + ": approx " + std::to_string(approx) +
                           " vs exact " + std::to_string(exact));
    }
  }
}

// ---------------------------------------------------------------------------
// 6. Operator bounds
// ---------------------------------------------------------------------------

void criterion_operators(Check& c) {
  SearchSpaceSchema schema = testutil::make_schema({{"a", -3, 7},
                                                    {"b", 0, 1},
                                                    {"c", 0, 9, true},
                                                    {"d", -100, 100},
                                                    {"e", 2, 2},
                                                    {"f", 0.5, 0.75}});
  Rng rng(31415);
  auto in_bounds = [&](const ScenarioVector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const FieldSpec& f = schema.fields[i];
      if (v[i] < f.min || v[i] > f.max) return false;
      if (f.kind == FieldKind::Discrete && v[i] != std::round(v[i])) return false;
    }
    return true;
  };

  for (int trial = 0; trial < 100000; ++trial) {
    ScenarioVector a = sample(schema, rng);
    ScenarioVector b = sample(schema, rng);
    auto [c1, c2] = sbx_crossover(a, b, schema, 5.0, 0.8, rng);
    ScenarioVector m = polynomial_mutate(a, schema, 0.5, 5.0, rng);
    if (!in_bounds(c1) || !in_bounds(c2) || !in_bounds(m)) {
      c.require(false, "operator escaped the field bounds on trial " + std::to_string(trial));
      return;
    }
  }

  for (int trial = 0; trial < 2000; ++trial) {
    ScenarioVector a = sample(schema, rng);
    auto [c1, c2] = sbx_crossover(a, a, schema, 5.0, 0.8, rng);
    if (c1 != a || c2 != a) {
      c.require(false, "crossover of equal parents must be the identity");
      return;
    }
  }

  // per-field mutation frequency at the default rate 5/k
  const int k = 10;
  SearchSpaceSchema box = testutil::box_schema(k);
  const double rate = 5.0 / k;
  const int trials = 20000;
  std::vector<int> changed(k, 0);
  ScenarioVector base(k, 0.5);
  for (int t = 0; t < trials; ++t) {
    ScenarioVector m = polynomial_mutate(base, box, rate, 5.0, rng);
    for (int i = 0; i < k; ++i) {
      if (m[i] != base[i]) ++changed[i];
    }
  }
  const double sigma = std::sqrt(trials * rate * (1.0 - rate));
  for (int i = 0; i < k; ++i) {
    if (std::abs(changed[i] - trials * rate) > 3.0 * sigma) {
      c.require(false, "field " + std::to_string(i) + " mutated " +
                           std::to_string(changed[i]) + "/" + std::to_string(trials) +
                           ", outside 3 sigma of rate 5/k");
    }
  }
}

// ---------------------------------------------------------------------------
// 7. Determinism
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void criterion_determinism(Check& c) {
  SearchSpaceSchema schema =
      load_search_space(testutil::scenario_path("right_turn_lead_slows.json"));
  CampaignConfig config;
  config.method = "GA-UN-NN-GRAD";
  config.seed_collection = {"GA-UN", 60};
  config.budget = 60;
  config.uniqueness = {10.0, 10.0};
  config.rng_seed = 77;
  config.ga.pop_size = 20;
  config.ga.generation_to_use_nn = -1;
  config.surrogate.train.epochs = 60;
  config.surrogate.train.batch_size = 32;

  fs::path dir = fs::temp_directory_path() / "scenfuzz_acceptance_determinism";
  fs::create_directories(dir);
  for (const char* tag : {"a", "b"}) {
    RepetitionResult rep = run_repetition(schema, config, 0);
    write_runlog((dir / (std::string(tag) + "_runlog.jsonl")).string(), rep.log);
    ViolationArchive archive(&schema, config.uniqueness);
    for (const ArchiveEntry& e : rep.archive) archive.insert_if_unique(e);
    write_archive((dir / (std::string(tag) + "_archive.json")).string(), archive);
  }
  c.require(slurp(dir / "a_runlog.jsonl") == slurp(dir / "b_runlog.jsonl"),
            "runlog.jsonl differs between identical runs");
  c.require(slurp(dir / "a_archive.json") == slurp(dir / "b_archive.json"),
            "archive.json differs between identical runs");
  c.require(!slurp(dir / "a_runlog.jsonl").empty(), "runlog.jsonl is empty");
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// 8. Comparative experiment
// ---------------------------------------------------------------------------

CampaignConfig comparative_config() {
  CampaignConfig config;
  config.budget = 200;
  config.seed_collection = {"GA-UN", 100};
  config.uniqueness = {10.0, 10.0};
  config.repetitions = 6;
  config.rng_seed = 2024;
  config.accounting = Accounting::ExcludeSeedStage;
  config.ga.pop_size = 20;
  config.ga.generation_to_use_nn = -1;
  config.surrogate.train.epochs = 500;
  config.surrogate.train.batch_size = 32;
  config.threads = 6;
  return config;
}

void criterion_comparative(Check& c) {
  SearchSpaceSchema schema =
      load_search_space(testutil::scenario_path("right_turn_lead_slows.json"));
  CampaignConfig config = comparative_config();

  auto counts_for = [&](const std::string& method) {
    CampaignConfig m = config;
    m.method = method;
    RunSummary summary = summarize(m, run_campaign(schema, m));
    return to_doubles(summary.unique_counts);
  };
  const std::vector<double> random_counts = counts_for("RANDOM");
  const std::vector<double> gaun_counts = counts_for("GA-UN");
  const std::vector<double> grad_counts = counts_for("GA-UN-NN-GRAD");

  auto show = [](const std::vector<double>& v) {
    std::ostringstream s;
    for (double x : v) s << ' ' << x;
    return s.str();
  };
  const std::string detail = "RANDOM:" + show(random_counts) + "  GA-UN:" + show(gaun_counts) +
                             "  GA-UN-NN-GRAD:" + show(grad_counts);

  c.require(mean(grad_counts) > mean(random_counts),
            "guided mean must beat random mean (" + detail + ")");
  c.require(a12(grad_counts, random_counts) >= 0.7,
            "A12(guided, random) must reach 0.7 (" + detail + ")");
  c.require(ranksum_test(grad_counts, random_counts).p_value < 0.05,
            "guided vs random must be significant at 0.05 (" + detail + ")");
  c.require(mean(grad_counts) >= mean(gaun_counts),
            "gradient mutation must not fall behind plain dedup search (" + detail + ")");

  // single-threaded simulator throughput on the same fixture
  CampaignConfig single = config;
  single.threads = 1;
  Evaluator evaluator = make_simulator_evaluator(schema, single);
  Rng rng(31337);
  std::vector<ScenarioVector> batch;
  for (int i = 0; i < 400; ++i) batch.push_back(sample(schema, rng));
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < batch.size(); ++i) evaluator(batch[i], i);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count();
  const double rate = batch.size() / seconds;
  c.require(rate >= 200.0,
            "throughput " + std::to_string(rate) + " simulations/s is below 200/s");
}

// ---------------------------------------------------------------------------
// 9. Unique percentage per method family
// ---------------------------------------------------------------------------

void criterion_unique_percentage(Check& c) {
  SearchSpaceSchema schema = load_search_space(testutil::scenario_path("lane_cut_in.json"));
  CampaignConfig config;
  config.budget = 300;
  config.seed_collection = {"RANDOM", 0};
  config.uniqueness = {10.0, 10.0};
  config.repetitions = 3;
  config.rng_seed = 2024;
  config.ga.pop_size = 20;
  config.ga.generation_to_use_nn = -1;
  config.baseline.pretrain_samples = 60;
  config.threads = 3;

  auto percentages = [&](const std::string& method) {
    CampaignConfig m = config;
    m.method = method;
    CampaignResult result = run_campaign(schema, m);
    std::vector<std::pair<double, int>> out;
    for (const RepetitionResult& rep : result.repetitions) {
      out.emplace_back(rep.unique_percentage, rep.violating_records);
    }
    return out;
  };

  for (const char* method : {"GA-UN", "NSGA2-UN-SM-A"}) {
    for (const auto& [pct, violating] : percentages(method)) {
      c.require(violating > 0, std::string(method) + ": no violations found");
      c.require(pct == 100.0, std::string(method) + ": reported " + std::to_string(pct) +
                                  "% unique, expected exactly 100%");
    }
  }
  for (const char* method : {"GA", "AV-FUZZER"}) {
    for (const auto& [pct, violating] : percentages(method)) {
      c.require(violating > 0, std::string(method) + ": no violations found");
      c.require(pct < 100.0, std::string(method) + ": reported " + std::to_string(pct) +
                                 "% unique, expected repeats (< 100%)");
    }
  }
}

// ---------------------------------------------------------------------------
// 10. Threshold sweep
// ---------------------------------------------------------------------------

void criterion_sweep(Check& c) {
  SearchSpaceSchema schema = load_search_space(testutil::scenario_path("lane_cut_in.json"));
  CampaignConfig config;
  config.method = "GA-UN";
  config.budget = 300;
  config.seed_collection = {"RANDOM", 0};
  config.rng_seed = 9;
  config.ga.pop_size = 20;
  config.ga.generation_to_use_nn = -1;

  RepetitionResult rep = run_repetition(schema, config, 0);
  int violations = 0;
  for (const RunLogRecord& r : rep.log) {
    if (r.violation_kind == ViolationType::Collision) ++violations;
  }
  c.require(violations > 0, "the recorded stream holds no violations to replay");

  const std::vector<double> th2_grid{5, 10, 20};
  const std::vector<double> th1_grid{25, 50, 75};
  std::vector<SweepCell> cells =
      sweep_thresholds(schema, rep.log, ViolationType::Collision, th2_grid, th1_grid);
  c.require(cells.size() == 9, "sweep must cover the 3x3 grid");

  auto count_at = [&](double th2, double th1) {
    for (const SweepCell& cell : cells) {
      if (cell.th2 == th2 && cell.th1 == th1) return cell.unique_count;
    }
    return -1;
  };
  for (double th2 : th2_grid) {
    for (std::size_t i = 0; i + 1 < th1_grid.size(); ++i) {
      if (count_at(th2, th1_grid[i]) < count_at(th2, th1_grid[i + 1])) {
        c.require(false, "count increased when th1 tightened at th2=" + std::to_string(th2));
      }
    }
  }
  for (double th1 : th1_grid) {
    for (std::size_t i = 0; i + 1 < th2_grid.size(); ++i) {
      if (count_at(th2_grid[i], th1) < count_at(th2_grid[i + 1], th1)) {
        c.require(false, "count increased when th2 tightened at th1=" + std::to_string(th1));
      }
    }
  }
  c.require(count_at(5, 25) >= count_at(20, 75), "loosest cell must dominate the tightest");
  c.require(count_at(5, 25) > 0, "loosest cell found nothing");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*body)(Check&);
  };
  const Criterion criteria[] = {
      {"uniqueness arithmetic and archive invariant", criterion_uniqueness},
      {"constrained mutation stays feasible", criterion_projection},
      {"backprop gradients match finite differences", criterion_gradient},
      {"non-dominated sort matches the peeling oracle", criterion_sort},
      {"rank-sum and A12 match exact oracles", criterion_statistics},
      {"variation operators respect field bounds", criterion_operators},
      {"identical config and seed give identical bytes", criterion_determinism},
      {"guided search beats random on the junction fixture", criterion_comparative},
      {"archive-backed methods report 100% unique", criterion_unique_percentage},
      {"unique counts shrink as thresholds tighten", criterion_sweep},
  };

  int failures = 0;
  const int total = static_cast<int>(std::size(criteria));
  for (int i = 0; i < total; ++i) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    criteria[i].body(check);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %2d/%d: %s (%.1f s)\n", check.ok ? "PASS" : "FAIL", i + 1, total,
                criteria[i].name, seconds);
    if (!check.ok) {
      std::fputs(check.detail.str().c_str(), stdout);
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures;
}
