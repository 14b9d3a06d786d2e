#include "eegdec/forest.hpp"

#include <algorithm>
#include <cmath>

#include "eegdec/parallel.hpp"
#include "eegdec/rng.hpp"

namespace eegdec::learn {
namespace {

struct Candidate {
  int feature;
  std::uint64_t key;
};

struct BestSplit {
  double decrease = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool found = false;
};

double gini_from_counts(const std::vector<std::int64_t>& counts, std::int64_t total) {
  double sum_sq = 0.0;
  for (std::int64_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

// Grows one CART tree on a bootstrap sample. Feature-subset draws and split
// tie-breaks are keyed by column content hashes (never by column position), so
// a column permutation of X permutes the fitted tree and its importance
// attribution exactly. Two bitwise-identical columns share keys and are
// indistinguishable; that case is inherently order-dependent and acceptable.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<int>& y, int n_classes,
              const RandomForestConfig& cfg, int features_per_split,
              const std::vector<std::uint64_t>& col_hash, std::uint64_t tree_key,
              std::vector<double>& importance)
      : x_(x),
        y_(y),
        n_classes_(n_classes),
        cfg_(cfg),
        m_(features_per_split),
        col_hash_(col_hash),
        tree_key_(tree_key),
        importance_(importance) {}

  DecisionTree build(std::vector<int> bootstrap) {
    n_total_ = static_cast<std::int64_t>(bootstrap.size());
    grow(std::move(bootstrap), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<int> rows, int depth) {
    const int node_id = node_counter_++;
    const auto node_index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes_), 0);
    for (int r : rows) ++counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
    tree_.nodes[static_cast<std::size_t>(node_index)].label = majority(counts);

    const auto n = static_cast<std::int64_t>(rows.size());
    const double node_gini = gini_from_counts(counts, n);
    const bool at_depth_limit = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
    if (node_gini == 0.0 || n < 2 * cfg_.min_samples_leaf || at_depth_limit) {
      return node_index;
    }

    const BestSplit best = find_split(rows, counts, node_gini, node_id);
    if (!best.found) return node_index;

    importance_[static_cast<std::size_t>(best.feature)] +=
        static_cast<double>(n) / static_cast<double>(n_total_) * best.decrease;

    std::vector<int> left;
    std::vector<int> right;
    for (int r : rows) {
      (x_(r, best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree_.nodes[static_cast<std::size_t>(node_index)].feature = best.feature;
    tree_.nodes[static_cast<std::size_t>(node_index)].threshold = best.threshold;
    const int left_index = grow(std::move(left), depth + 1);
    tree_.nodes[static_cast<std::size_t>(node_index)].left = left_index;
    const int right_index = grow(std::move(right), depth + 1);
    tree_.nodes[static_cast<std::size_t>(node_index)].right = right_index;
    return node_index;
  }

  BestSplit find_split(const std::vector<int>& rows, const std::vector<std::int64_t>& counts,
                       double node_gini, int node_id) {
    const auto d = static_cast<int>(x_.cols());
    const std::uint64_t node_salt = util::mix_seed({tree_key_, static_cast<std::uint64_t>(node_id)});

    std::vector<Candidate> candidates(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      candidates[static_cast<std::size_t>(j)] = {
          j, util::mix_seed({col_hash_[static_cast<std::size_t>(j)], node_salt})};
    }
    const auto by_key = [](const Candidate& a, const Candidate& b) { return a.key < b.key; };
    const auto take = static_cast<std::ptrdiff_t>(std::min(m_, d));
    std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(), by_key);

    const auto n = static_cast<std::int64_t>(rows.size());
    BestSplit best;
    std::vector<std::pair<double, int>> column(static_cast<std::size_t>(n));
    std::vector<std::int64_t> left_counts(static_cast<std::size_t>(n_classes_));

    // Candidates are scanned in key order, first-wins on decrease ties, so the
    // choice stays independent of column numbering.
    for (std::ptrdiff_t ci = 0; ci < take; ++ci) {
      const int feature = candidates[static_cast<std::size_t>(ci)].feature;
      for (std::int64_t i = 0; i < n; ++i) {
        const int r = rows[static_cast<std::size_t>(i)];
        column[static_cast<std::size_t>(i)] = {x_(r, feature), y_[static_cast<std::size_t>(r)]};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      std::fill(left_counts.begin(), left_counts.end(), 0);
      std::int64_t i = 0;
      while (i < n) {
        std::int64_t j = i;
        const double value = column[static_cast<std::size_t>(i)].first;
        while (j < n && column[static_cast<std::size_t>(j)].first == value) {
          ++left_counts[static_cast<std::size_t>(column[static_cast<std::size_t>(j)].second)];
          ++j;
        }
        i = j;
        if (i == n) break;
        const std::int64_t nl = i;
        const std::int64_t nr = n - i;
        if (nl < cfg_.min_samples_leaf || nr < cfg_.min_samples_leaf) continue;

        double right_sum_sq = 0.0;
        double left_sum_sq = 0.0;
        for (int k = 0; k < n_classes_; ++k) {
          const auto lk = static_cast<double>(left_counts[static_cast<std::size_t>(k)]);
          const auto rk = static_cast<double>(counts[static_cast<std::size_t>(k)]) - lk;
          left_sum_sq += lk * lk;
          right_sum_sq += rk * rk;
        }
        const double gini_l = 1.0 - left_sum_sq / (static_cast<double>(nl) * static_cast<double>(nl));
        const double gini_r = 1.0 - right_sum_sq / (static_cast<double>(nr) * static_cast<double>(nr));
        const double decrease = node_gini -
                                (static_cast<double>(nl) / static_cast<double>(n)) * gini_l -
                                (static_cast<double>(nr) / static_cast<double>(n)) * gini_r;
        if (decrease > best.decrease) {
          const double lo = value;
          const double hi = column[static_cast<std::size_t>(i)].first;
          double threshold = 0.5 * (lo + hi);
          if (!(threshold < hi)) threshold = lo;  // keep the upper value on the right
          best = {decrease, feature, threshold, true};
        }
      }
    }
    return best;
  }

  int majority(const std::vector<std::int64_t>& counts) const {
    int label = 0;
    for (int k = 1; k < n_classes_; ++k) {
      if (counts[static_cast<std::size_t>(k)] > counts[static_cast<std::size_t>(label)]) label = k;
    }
    return label;
  }

  const Matrix& x_;
  const std::vector<int>& y_;
  int n_classes_;
  const RandomForestConfig& cfg_;
  int m_;
  const std::vector<std::uint64_t>& col_hash_;
  std::uint64_t tree_key_;
  std::vector<double>& importance_;
  DecisionTree tree_;
  std::int64_t n_total_ = 0;
  int node_counter_ = 0;
};

}  // namespace

void RandomForestConfig::validate(int d) const {
  if (n_trees < 1) throw ValidationError("n_trees must be >= 1");
  if (max_depth < 0) throw ValidationError("max_depth must be >= 0 (0 = unlimited)");
  if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
  if (features_per_split < 0 || features_per_split > d) {
    throw ValidationError("features_per_split must lie in [0, d]");
  }
}

int DecisionTree::predict(const double* row) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(i)];
    i = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].label;
}

int RandomForest::predict(const double* row) const {
  std::vector<std::int64_t> votes(static_cast<std::size_t>(n_classes), 0);
  for (const DecisionTree& tree : trees) ++votes[static_cast<std::size_t>(tree.predict(row))];
  int label = 0;
  for (int k = 1; k < n_classes; ++k) {
    if (votes[static_cast<std::size_t>(k)] > votes[static_cast<std::size_t>(label)]) label = k;
  }
  return label;
}

RandomForest fit_random_forest(const Matrix& X, const std::vector<int>& y,
                               const RandomForestConfig& cfg) {
  const auto n = static_cast<std::int64_t>(X.rows());
  const auto d = static_cast<int>(X.cols());
  if (n < 2 || d < 1) throw ValidationError("fit_random_forest: need >= 2 rows and >= 1 column");
  if (static_cast<std::int64_t>(y.size()) != n) {
    throw ValidationError("fit_random_forest: label count mismatch");
  }
  if (!X.allFinite()) throw ValidationError("fit_random_forest: non-finite feature value");
  cfg.validate(d);

  int n_classes = 0;
  for (int label : y) {
    if (label < 0) throw ValidationError("fit_random_forest: negative label");
    n_classes = std::max(n_classes, label + 1);
  }
  std::vector<std::int64_t> class_counts(static_cast<std::size_t>(n_classes), 0);
  for (int label : y) ++class_counts[static_cast<std::size_t>(label)];
  int present = 0;
  for (std::int64_t c : class_counts) present += c > 0 ? 1 : 0;
  if (present < 2) throw ValidationError("fit_random_forest: need >= 2 classes present");

  int m = cfg.features_per_split;
  if (m == 0) m = std::max(1, static_cast<int>(std::llround(std::sqrt(static_cast<double>(d)))));

  // Column content hashes key all feature sampling; see TreeBuilder.
  std::vector<std::uint64_t> col_hash(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    col_hash[static_cast<std::size_t>(j)] =
        util::fnv1a64(X.col(j).data(), static_cast<std::size_t>(n) * sizeof(double));
  }

  RandomForest forest;
  forest.n_classes = n_classes;
  forest.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  std::vector<std::vector<double>> tree_importance(
      static_cast<std::size_t>(cfg.n_trees), std::vector<double>(static_cast<std::size_t>(d), 0.0));

  util::parallel_for(cfg.n_trees, cfg.n_threads, [&](int t) {
    const std::uint64_t tree_key = util::mix_seed({cfg.seed, static_cast<std::uint64_t>(t)});
    util::Rng rng(tree_key);
    std::vector<int> bootstrap(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      bootstrap[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(n));
    }
    TreeBuilder builder(X, y, n_classes, cfg, m, col_hash, tree_key,
                        tree_importance[static_cast<std::size_t>(t)]);
    forest.trees[static_cast<std::size_t>(t)] = builder.build(std::move(bootstrap));
  });

  // Reduce in tree order so the result is independent of scheduling.
  forest.importance = Vector::Zero(d);
  for (const std::vector<double>& imp : tree_importance) {
    for (int j = 0; j < d; ++j) forest.importance(j) += imp[static_cast<std::size_t>(j)];
  }
  const double total = forest.importance.sum();
  if (total > 0.0) forest.importance /= total;
  return forest;
}

std::vector<int> select_features(const Vector& importance, int k) {
  const auto d = static_cast<int>(importance.size());
  if (k < 1) throw ValidationError("select_features: k must be >= 1");
  if (k > d) throw ValidationError("select_features: k exceeds feature count");

  std::vector<int> order(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) order[static_cast<std::size_t>(j)] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (importance(a) != importance(b)) return importance(a) > importance(b);
    return a < b;  // ties prefer the lower index
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace eegdec::learn
