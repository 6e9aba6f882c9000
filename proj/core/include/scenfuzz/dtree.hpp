#pragma once

#include <cstddef>
#include <vector>

#include "scenfuzz/grammar.hpp"

namespace scenfuzz {

// Axis-aligned binary classification tree over normalized scenario vectors,
// grown greedily by Gini impurity. Used to carve the search space into
// regions with above-average violation density.
struct TreeNode {
  bool is_leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  std::size_t n_samples = 0;
  std::size_t n_positive = 0;
};

struct DecisionTreeParams {
  // A node is splittable only if it holds at least this fraction of the
  // training set.
  double min_samples_split_fraction = 0.10;
  // Weighted impurity decrease required to accept a split:
  //   (n_node / n_total) * (imp - (n_l/n_node)*imp_l - (n_r/n_node)*imp_r)
  double min_impurity_decrease = 1e-4;
};

class DecisionTree {
 public:
  void fit(const std::vector<ScenarioVector>& x, const std::vector<int>& y,
           const DecisionTreeParams& params = {});

  int leaf_of(const ScenarioVector& x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  // Leaves whose positive rate exceeds the positive rate of the whole
  // training set. Empty when the tree never split or nothing is positive.
  std::vector<int> critical_leaves() const;

  // Axis-aligned box (in normalized coordinates) of everything routed to
  // `leaf`. Bounds start at [0,1] per feature and tighten along the path.
  void leaf_bounds(int leaf, std::size_t dimension, std::vector<double>& lower,
                   std::vector<double>& upper) const;

 private:
  int build(const std::vector<ScenarioVector>& x, const std::vector<int>& y,
            std::vector<std::size_t>& indices, std::size_t begin, std::size_t end);

  std::vector<TreeNode> nodes_;
  std::size_t n_total_ = 0;
  DecisionTreeParams params_;
};

}  // namespace scenfuzz
