#pragma once

#include <cstdint>
#include <vector>

#include "eegdec/types.hpp"

namespace eegdec::learn {

struct RandomForestConfig {
  int n_trees = 500;
  int max_depth = 0;            // 0 = unlimited
  int features_per_split = 0;   // 0 = round(sqrt(d))
  int min_samples_leaf = 1;
  std::uint64_t seed = 1;
  int n_threads = 1;

  void validate(int d) const;
};

struct TreeNode {
  int feature = -1;        // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = -1;          // majority label at leaves
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int predict(const double* row) const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  Vector importance;  // Gini impurity decrease per feature, normalized to sum 1
  int n_classes = 0;

  int predict(const double* row) const;  // majority vote, ties to lower label
};

// Bootstrap-sampled CART trees with Gini splits over features_per_split random
// candidates per node. Per-tree randomness is keyed by (seed, tree index);
// candidate subsets and split ties are keyed by column content so that
// permuting feature columns permutes the fitted forest (and its importance
// vector) exactly. Labels must contain >= 2 classes and X must be finite.
RandomForest fit_random_forest(const Matrix& X, const std::vector<int>& y,
                               const RandomForestConfig& cfg);

// Indices of the k largest importances; ties prefer the lower index; the
// result is sorted ascending. k must not exceed the importance length.
std::vector<int> select_features(const Vector& importance, int k);

}  // namespace eegdec::learn
