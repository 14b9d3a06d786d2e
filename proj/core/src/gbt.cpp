#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "eegdec/model.hpp"
#include "model_detail.hpp"

namespace eegdec::learn {

double GbtTree::predict(const double* row) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const GbtTreeNode& node = nodes[static_cast<std::size_t>(i)];
    i = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

}  // namespace eegdec::learn

namespace eegdec::learn::detail {
namespace {

// Leaf value is the one-step Newton estimate for the multinomial deviance,
// (K-1)/K * sum(r) / sum(|r| (1 - |r|)); a vanishing curvature term gives 0.
double newton_leaf(const std::vector<std::int64_t>& rows, const Vector& residual, int n_classes) {
  double num = 0.0;
  double den = 0.0;
  for (std::int64_t r : rows) {
    const double g = residual(r);
    num += g;
    den += std::abs(g) * (1.0 - std::abs(g));
  }
  if (den < 1e-12) return 0.0;
  return (static_cast<double>(n_classes) - 1.0) / static_cast<double>(n_classes) * num / den;
}

class RegressionTreeBuilder {
 public:
  RegressionTreeBuilder(const Matrix& x, const Vector& residual, int n_classes,
                        const GbtConfig& cfg)
      : x_(x), residual_(residual), n_classes_(n_classes), cfg_(cfg) {}

  GbtTree build() {
    std::vector<std::int64_t> rows(static_cast<std::size_t>(x_.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::int64_t>(i);
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool found = false;
  };

  int grow(std::vector<std::int64_t> rows, int depth) {
    const auto node_index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[static_cast<std::size_t>(node_index)].value =
        newton_leaf(rows, residual_, n_classes_);

    const auto n = static_cast<std::int64_t>(rows.size());
    if (depth >= cfg_.max_depth || n < 2 * cfg_.min_samples_leaf) return node_index;

    const Split best = find_split(rows);
    if (!best.found) return node_index;

    std::vector<std::int64_t> left;
    std::vector<std::int64_t> right;
    for (std::int64_t r : rows) {
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

  // Exact greedy scan over every feature; maximizes the squared-error
  // improvement sum_L^2/n_L + sum_R^2/n_R - sum^2/n. First feature in index
  // order wins gain ties, which keeps refits deterministic.
  Split find_split(const std::vector<std::int64_t>& rows) {
    const auto n = static_cast<std::int64_t>(rows.size());
    const auto d = static_cast<int>(x_.cols());
    double total = 0.0;
    for (std::int64_t r : rows) total += residual_(r);
    const double base = total * total / static_cast<double>(n);

    Split best;
    std::vector<std::pair<double, double>> column(static_cast<std::size_t>(n));
    for (int feature = 0; feature < d; ++feature) {
      for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t r = rows[static_cast<std::size_t>(i)];
        column[static_cast<std::size_t>(i)] = {x_(r, feature), residual_(r)};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      double left_sum = 0.0;
      std::int64_t i = 0;
      while (i < n) {
        std::int64_t j = i;
        const double value = column[static_cast<std::size_t>(i)].first;
        while (j < n && column[static_cast<std::size_t>(j)].first == value) {
          left_sum += column[static_cast<std::size_t>(j)].second;
          ++j;
        }
        i = j;
        if (i == n) break;
        const std::int64_t nl = i;
        const std::int64_t nr = n - i;
        if (nl < cfg_.min_samples_leaf || nr < cfg_.min_samples_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - base;
        if (gain > best.gain && gain > 1e-12) {
          const double lo = value;
          const double hi = column[static_cast<std::size_t>(i)].first;
          double threshold = 0.5 * (lo + hi);
          if (!(threshold < hi)) threshold = lo;
          best = {gain, feature, threshold, true};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const Vector& residual_;
  int n_classes_;
  const GbtConfig& cfg_;
  GbtTree tree_;
};

}  // namespace

Matrix softmax_rows(const Matrix& raw) {
  Matrix p(raw.rows(), raw.cols());
  for (std::int64_t i = 0; i < raw.rows(); ++i) {
    const double m = raw.row(i).maxCoeff();
    p.row(i) = (raw.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

GbtModel train_gbt(const Matrix& x_std, const std::vector<int>& y, int n_classes,
                   const GbtConfig& cfg) {
  const auto n = static_cast<std::int64_t>(x_std.rows());
  GbtModel model;
  model.learning_rate = cfg.learning_rate;
  model.init_scores.assign(static_cast<std::size_t>(n_classes), 0.0);

  std::vector<std::int64_t> class_counts(static_cast<std::size_t>(n_classes), 0);
  for (int label : y) ++class_counts[static_cast<std::size_t>(label)];
  for (int k = 0; k < n_classes; ++k) {
    const auto count = class_counts[static_cast<std::size_t>(k)];
    if (count == 0) throw ValidationError("gbt: every class must appear in training data");
    model.init_scores[static_cast<std::size_t>(k)] =
        std::log(static_cast<double>(count) / static_cast<double>(n));
  }

  const RowMatrix x_rows = x_std;  // contiguous rows for the tree walkers
  Matrix raw(n, n_classes);
  raw.rowwise() = Eigen::Map<const Eigen::RowVectorXd>(model.init_scores.data(), n_classes);

  const auto log_loss = [&](const Matrix& prob) {
    double loss = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      loss -= std::log(std::max(prob(i, y[static_cast<std::size_t>(i)]), 1e-15));
    }
    return loss / static_cast<double>(n);
  };

  model.rounds.reserve(static_cast<std::size_t>(cfg.n_rounds));
  model.train_log_loss.reserve(static_cast<std::size_t>(cfg.n_rounds));
  Vector residual(n);
  for (int round = 0; round < cfg.n_rounds; ++round) {
    const Matrix prob = softmax_rows(raw);
    std::vector<GbtTree> trees;
    trees.reserve(static_cast<std::size_t>(n_classes));
    for (int k = 0; k < n_classes; ++k) {
      for (std::int64_t i = 0; i < n; ++i) {
        residual(i) = (y[static_cast<std::size_t>(i)] == k ? 1.0 : 0.0) - prob(i, k);
      }
      RegressionTreeBuilder builder(x_std, residual, n_classes, cfg);
      GbtTree tree = builder.build();
      for (std::int64_t i = 0; i < n; ++i) {
        raw(i, k) += cfg.learning_rate * tree.predict(x_rows.row(i).data());
      }
      trees.push_back(std::move(tree));
    }
    model.rounds.push_back(std::move(trees));
    model.train_log_loss.push_back(log_loss(softmax_rows(raw)));
  }
  return model;
}

Matrix gbt_raw_scores(const GbtModel& model, const Matrix& x_std) {
  const std::int64_t n = x_std.rows();
  const auto n_classes = static_cast<int>(model.init_scores.size());
  const RowMatrix x_rows = x_std;
  Matrix raw(n, n_classes);
  raw.rowwise() = Eigen::Map<const Eigen::RowVectorXd>(model.init_scores.data(), n_classes);
  for (const std::vector<GbtTree>& trees : model.rounds) {
    for (int k = 0; k < n_classes; ++k) {
      const GbtTree& tree = trees[static_cast<std::size_t>(k)];
      for (std::int64_t i = 0; i < n; ++i) {
        raw(i, k) += model.learning_rate * tree.predict(x_rows.row(i).data());
      }
    }
  }
  return raw;
}

}  // namespace eegdec::learn::detail
