#include "scenfuzz/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scenfuzz {

double compute_th_conf1(std::vector<double> confidences, double violation_fraction) {
  if (confidences.empty()) return 1.0;
  std::sort(confidences.begin(), confidences.end(), std::greater<double>());
  auto n = static_cast<double>(confidences.size());
  auto rank = static_cast<long>(std::ceil(0.25 * violation_fraction * n));
  rank = std::clamp(rank, 1L, static_cast<long>(confidences.size()));
  return confidences[static_cast<std::size_t>(rank - 1)];
}

std::vector<std::size_t> rank_and_select(const Mlp& model,
                                         const std::vector<ScenarioVector>& normalized,
                                         std::size_t select) {
  std::vector<double> conf(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) conf[i] = model.forward(normalized[i]);
  std::vector<std::size_t> order(normalized.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return conf[a] > conf[b]; });
  order.resize(std::min(select, order.size()));
  return order;
}

namespace {

constexpr double kResidualTol = 1e-9;
constexpr int kMaxSweeps = 10000;

bool perturbation_violates(const std::vector<double>& dx, const std::vector<double>& x,
                           const std::vector<ConstraintRow>& rows) {
  for (const ConstraintRow& r : rows) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < dx.size(); ++i) lhs += r.row[i] * (x[i] + dx[i]);
    if (lhs > r.value + kResidualTol) return true;
  }
  return false;
}

}  // namespace

std::vector<double> project_perturbation(std::vector<double> dx, const std::vector<double>& x,
                                         const std::vector<ConstraintRow>& rows, double epsilon,
                                         double lo, double hi) {
  const std::size_t k = dx.size();
  // slack_j = value_j - W_j . x ; the half-space over d is W_j . d <= slack_j
  std::vector<double> slack(rows.size());
  std::vector<double> norm2(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    double s = rows[j].value;
    double n2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      s -= rows[j].row[i] * x[i];
      n2 += rows[j].row[i] * rows[j].row[i];
    }
    slack[j] = s;
    norm2[j] = n2;
  }

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (norm2[j] <= 0.0) continue;
      double r = -slack[j];
      for (std::size_t i = 0; i < k; ++i) r += rows[j].row[i] * dx[i];
      if (r > 0.0) {
        double f = r / norm2[j];
        for (std::size_t i = 0; i < k; ++i) dx[i] -= f * rows[j].row[i];
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      double dlo = std::max(lo - x[i], -epsilon);
      double dhi = std::min(hi - x[i], epsilon);
      dx[i] = std::clamp(dx[i], dlo, dhi);
    }
    // box residual is zero right after clamping; only half-spaces can regress
    double residual = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (norm2[j] <= 0.0) continue;
      double r = -slack[j];
      for (std::size_t i = 0; i < k; ++i) r += rows[j].row[i] * dx[i];
      residual = std::max(residual, r);
    }
    if (residual <= kResidualTol) break;
  }
  return dx;
}

ScenarioVector gradient_mutate(const ScenarioVector& x_normalized, const Mlp& model,
                               const GradMutationParams& params, const ViolationArchive& archive,
                               ViolationType kind, const SearchSpaceSchema& schema,
                               const std::vector<ScenarioVector>* extra_blockers) {
  const std::size_t k = x_normalized.size();
  if (model.forward(x_normalized) > params.th_conf1) return x_normalized;

  const std::vector<ConstraintRow> rows = schema.normalized_constraints();
  const std::size_t need = distinctness_threshold(schema, archive.params().th1_percent);
  const double th2 = archive.params().th2_percent;

  auto is_similar = [&](const ScenarioVector& cand_normalized) {
    ScenarioVector raw = denormalize(schema, cand_normalized);
    if (!archive.is_unique(raw, kind)) return true;
    if (extra_blockers) {
      for (const ScenarioVector& b : *extra_blockers) {
        if (fields_differ(schema, raw, b, th2) < need) return true;
      }
    }
    return false;
  };

  ScenarioVector walker = x_normalized;   // raw ascent point
  ScenarioVector accepted = x_normalized; // last applied perturbation
  std::vector<double> dx(k);

  for (int iter = 0; iter < params.n_steps; ++iter) {
    std::vector<double> g = model.grad_input(walker);
    for (std::size_t i = 0; i < k; ++i) {
      walker[i] = std::clamp(walker[i] + params.lambda * g[i], 0.0, 1.0);
    }
    for (std::size_t i = 0; i < k; ++i) {
      dx[i] = std::clamp(walker[i] - x_normalized[i], -params.epsilon, params.epsilon);
    }
    if (perturbation_violates(dx, x_normalized, rows)) {
      dx = project_perturbation(dx, x_normalized, rows, params.epsilon);
    }
    ScenarioVector candidate(k);
    for (std::size_t i = 0; i < k; ++i) candidate[i] = x_normalized[i] + dx[i];
    if (is_similar(candidate)) {
      return accepted;  // discard the latest perturbation and stop
    }
    walker = candidate;
    accepted = candidate;
    if (model.forward(accepted) > params.th_conf2) break;
  }
  return accepted;
}

}  // namespace scenfuzz
