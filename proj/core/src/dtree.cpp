#include "scenfuzz/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scenfuzz {

namespace {

double gini(std::size_t positives, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

}  // namespace

void DecisionTree::fit(const std::vector<ScenarioVector>& x, const std::vector<int>& y,
                       const DecisionTreeParams& params) {
  nodes_.clear();
  params_ = params;
  n_total_ = x.size();
  if (x.empty()) return;
  std::vector<std::size_t> indices(x.size());
  std::iota(indices.begin(), indices.end(), 0);
  build(x, y, indices, 0, indices.size());
}

int DecisionTree::build(const std::vector<ScenarioVector>& x, const std::vector<int>& y,
                        std::vector<std::size_t>& indices, std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  std::size_t positives = 0;
  for (std::size_t i = begin; i < end; ++i) positives += y[indices[i]] != 0 ? 1 : 0;

  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  nodes_[node_id].n_samples = n;
  nodes_[node_id].n_positive = positives;

  const std::size_t min_split = static_cast<std::size_t>(
      std::ceil(params_.min_samples_split_fraction * static_cast<double>(n_total_)));
  if (n < std::max<std::size_t>(min_split, 2) || positives == 0 || positives == n) {
    return node_id;
  }

  const double node_impurity = gini(positives, n);
  const std::size_t dim = x[indices[begin]].size();

  double best_gain = 0.0;
  std::size_t best_feature = 0;
  double best_threshold = 0.0;
  bool found = false;

  std::vector<std::size_t> order(indices.begin() + begin, indices.begin() + end);
  for (std::size_t f = 0; f < dim; ++f) {
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_pos += y[order[i]] != 0 ? 1 : 0;
      const double lo = x[order[i]][f];
      const double hi = x[order[i + 1]][f];
      if (hi - lo <= 1e-12) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      const double child_impurity =
          (static_cast<double>(nl) * gini(left_pos, nl) +
           static_cast<double>(nr) * gini(positives - left_pos, nr)) /
          static_cast<double>(n);
      const double gain = static_cast<double>(n) / static_cast<double>(n_total_) *
                          (node_impurity - child_impurity);
      if (gain > best_gain + 1e-15) {
        best_gain = gain;
        best_feature = f;
        best_threshold = 0.5 * (lo + hi);
        found = true;
      }
    }
  }

  if (!found || best_gain < params_.min_impurity_decrease) return node_id;

  auto mid = std::stable_partition(
      indices.begin() + begin, indices.begin() + end,
      [&](std::size_t i) { return x[i][best_feature] <= best_threshold; });
  const std::size_t split = static_cast<std::size_t>(mid - indices.begin());
  if (split == begin || split == end) return node_id;

  nodes_[node_id].is_leaf = false;
  nodes_[node_id].feature = best_feature;
  nodes_[node_id].threshold = best_threshold;
  const int left = build(x, y, indices, begin, split);
  nodes_[node_id].left = left;
  const int right = build(x, y, indices, split, end);
  nodes_[node_id].right = right;
  return node_id;
}

int DecisionTree::leaf_of(const ScenarioVector& x) const {
  if (nodes_.empty()) return -1;
  int node = 0;
  while (!nodes_[node].is_leaf) {
    node = x[nodes_[node].feature] <= nodes_[node].threshold ? nodes_[node].left
                                                             : nodes_[node].right;
  }
  return node;
}

std::vector<int> DecisionTree::critical_leaves() const {
  std::vector<int> out;
  if (nodes_.empty() || n_total_ == 0) return out;
  const double global_rate =
      static_cast<double>(nodes_[0].n_positive) / static_cast<double>(nodes_[0].n_samples);
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    const TreeNode& node = nodes_[i];
    if (!node.is_leaf || node.n_samples == 0) continue;
    const double rate =
        static_cast<double>(node.n_positive) / static_cast<double>(node.n_samples);
    if (rate > global_rate) out.push_back(i);
  }
  return out;
}

void DecisionTree::leaf_bounds(int leaf, std::size_t dimension, std::vector<double>& lower,
                               std::vector<double>& upper) const {
  lower.assign(dimension, 0.0);
  upper.assign(dimension, 1.0);
  if (nodes_.empty() || leaf < 0) return;
  // Walk from the root, tightening the box along the unique path to `leaf`.
  // Each node's subtree occupies a contiguous id range, so the path can be
  // recovered by checking which child subtree contains the target id.
  int node = 0;
  while (!nodes_[node].is_leaf && node != leaf) {
    const TreeNode& cur = nodes_[node];
    // Right subtree ids start at cur.right; left subtree is [cur.left, cur.right).
    if (leaf >= cur.right) {
      lower[cur.feature] = std::max(lower[cur.feature], cur.threshold);
      node = cur.right;
    } else {
      upper[cur.feature] = std::min(upper[cur.feature], cur.threshold);
      node = cur.left;
    }
  }
}

}  // namespace scenfuzz
