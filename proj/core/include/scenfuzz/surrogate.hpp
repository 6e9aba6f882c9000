#pragma once

#include <cstddef>
#include <vector>

#include "scenfuzz/dedup.hpp"
#include "scenfuzz/grammar.hpp"
#include "scenfuzz/mlp.hpp"

namespace scenfuzz {

/// Knobs of the constrained gradient-guided mutation. All values live in
/// normalized coordinates ([0,1] per field).
struct GradMutationParams {
  double th_conf1 = 1.0;  // only inputs with confidence <= th_conf1 are mutated
  double th_conf2 = 0.9;  // ascent stops once confidence exceeds th_conf2
  int n_steps = 255;
  double lambda = 1.0 / 255.0;  // step scale on the confidence gradient
  double epsilon = 1.0;         // L-inf budget for the total perturbation
};

/// Confidence bar below which inputs get mutated: the value at rank
/// ceil(0.25 * violation_fraction * N) of the descending confidences
/// (1-based, clamped into [1, N]). Returns 1.0 for an empty list.
double compute_th_conf1(std::vector<double> confidences, double violation_fraction);

/// Stable descending sort of candidates by model confidence; returns the
/// indices of the top `select` candidates (ties keep input order).
std::vector<std::size_t> rank_and_select(const Mlp& model,
                                         const std::vector<ScenarioVector>& normalized,
                                         std::size_t select);

/// Euclidean projection of a perturbation onto the feasible polyhedron
/// { d : x + d in [lo,hi]^k, |d|_inf <= epsilon, W (x + d) <= value for all
/// constraint rows }, computed by cyclic projection onto the half-spaces and
/// the box until the largest residual falls below 1e-9 (at most 10000
/// sweeps). x must itself be feasible, which keeps the set non-empty.
std::vector<double> project_perturbation(std::vector<double> dx, const std::vector<double>& x,
                                         const std::vector<ConstraintRow>& rows, double epsilon,
                                         double lo = 0.0, double hi = 1.0);

/// Constrained gradient-guided mutation of one normalized input. Walks up the
/// model's confidence gradient in n_steps increments; after every raw step the
/// accumulated perturbation is clipped to the epsilon box and, when it breaks
/// a linear constraint, projected back onto the feasible polyhedron. The walk
/// returns early without applying the latest perturbation when the perturbed
/// scenario is no longer distinct from an archived violation (or from any of
/// the extra blocker vectors), and stops after the confidence passes th_conf2.
/// Inputs whose confidence already exceeds th_conf1 are returned unchanged.
ScenarioVector gradient_mutate(const ScenarioVector& x_normalized, const Mlp& model,
                               const GradMutationParams& params, const ViolationArchive& archive,
                               ViolationType kind, const SearchSpaceSchema& schema,
                               const std::vector<ScenarioVector>* extra_blockers = nullptr);

}  // namespace scenfuzz
