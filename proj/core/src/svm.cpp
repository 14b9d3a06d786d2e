#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "eegdec/model.hpp"
#include "model_detail.hpp"

namespace eegdec::learn::detail {
namespace {

Matrix rbf_gram(const Matrix& a, double gamma) {
  const Vector sq = a.rowwise().squaredNorm();
  Matrix k = -2.0 * (a * a.transpose());
  k.colwise() += sq;
  k.rowwise() += sq.transpose();
  k = (-gamma * k.cwiseMax(0.0)).array().exp();
  return k;
}

struct SmoResult {
  Vector alpha;
  double bias = 0.0;
  bool hit_iteration_cap = false;
  double final_kkt_violation = 0.0;
  std::int64_t iterations = 0;
};

// Sequential minimal optimization on the dual soft-margin problem, selecting
// the maximal violating pair each step (largest y_i - f_i among coordinates
// movable up against smallest among those movable down). Converged when the
// gap closes to tol; the bias is the midpoint of the final gap.
SmoResult solve_smo(const Matrix& kernel, const std::vector<double>& y, const SvmConfig& cfg) {
  const auto n = static_cast<std::int64_t>(y.size());
  SmoResult res;
  res.alpha = Vector::Zero(n);
  Vector f = Vector::Zero(n);  // f_i = sum_j alpha_j y_j K_ij, bias excluded

  const double c = cfg.c;
  const double snap = 1e-10 * c;
  double g_max = 0.0;
  double g_min = 0.0;

  const auto scan_pair = [&](std::int64_t& i_up, std::int64_t& i_low) {
    i_up = -1;
    i_low = -1;
    g_max = -std::numeric_limits<double>::infinity();
    g_min = std::numeric_limits<double>::infinity();
    for (std::int64_t t = 0; t < n; ++t) {
      const double g = y[static_cast<std::size_t>(t)] - f(t);
      const bool positive = y[static_cast<std::size_t>(t)] > 0.0;
      const double a = res.alpha(t);
      if ((positive && a < c) || (!positive && a > 0.0)) {
        if (g > g_max) {
          g_max = g;
          i_up = t;
        }
      }
      if ((positive && a > 0.0) || (!positive && a < c)) {
        if (g < g_min) {
          g_min = g;
          i_low = t;
        }
      }
    }
  };

  while (res.iterations < cfg.max_passes) {
    std::int64_t i1 = -1;
    std::int64_t i2 = -1;
    scan_pair(i1, i2);
    if (i1 < 0 || i2 < 0) {
      res.final_kkt_violation = 0.0;
      break;
    }
    res.final_kkt_violation = g_max - g_min;
    if (res.final_kkt_violation <= cfg.tol) break;

    const double y1 = y[static_cast<std::size_t>(i1)];
    const double y2 = y[static_cast<std::size_t>(i2)];
    const double a1_old = res.alpha(i1);
    const double a2_old = res.alpha(i2);
    const double s = y1 * y2;
    double low;
    double high;
    if (s < 0.0) {
      low = std::max(0.0, a2_old - a1_old);
      high = std::min(c, c + a2_old - a1_old);
    } else {
      low = std::max(0.0, a1_old + a2_old - c);
      high = std::min(c, a1_old + a2_old);
    }

    const double eta =
        std::max(kernel(i1, i1) + kernel(i2, i2) - 2.0 * kernel(i1, i2), 1e-12);
    const double e1 = f(i1) - y1;
    const double e2 = f(i2) - y2;
    double a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, low, high);
    if (a2 < snap) a2 = 0.0;
    if (a2 > c - snap) a2 = c;
    double a1 = a1_old + s * (a2_old - a2);
    if (a1 < snap) a1 = 0.0;
    if (a1 > c - snap) a1 = c;

    res.alpha(i1) = a1;
    res.alpha(i2) = a2;
    f += (a1 - a1_old) * y1 * kernel.col(i1) + (a2 - a2_old) * y2 * kernel.col(i2);
    ++res.iterations;
  }
  res.hit_iteration_cap = res.iterations >= cfg.max_passes;
  if (res.hit_iteration_cap) {
    std::int64_t i1 = -1;
    std::int64_t i2 = -1;
    scan_pair(i1, i2);
    res.final_kkt_violation = (i1 >= 0 && i2 >= 0) ? g_max - g_min : 0.0;
  }

  const bool have_up = std::isfinite(g_max);
  const bool have_low = std::isfinite(g_min);
  if (have_up && have_low) {
    res.bias = 0.5 * (g_max + g_min);
  } else if (have_up) {
    res.bias = g_max;
  } else if (have_low) {
    res.bias = g_min;
  } else {
    res.bias = 0.0;
  }
  return res;
}

double decision_value(const BinarySvm& machine, double gamma,
                      const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  double sum = machine.bias;
  for (std::int64_t i = 0; i < machine.support_vectors.rows(); ++i) {
    const double d2 = (machine.support_vectors.row(i) - x).squaredNorm();
    sum += machine.alpha_y[static_cast<std::size_t>(i)] * std::exp(-gamma * d2);
  }
  return sum;
}

}  // namespace

SvmModel train_svm_ovo(const Matrix& x_std, const std::vector<int>& y, int n_classes,
                       const SvmConfig& cfg, double gamma) {
  SvmModel model;
  model.gamma = gamma;

  std::vector<std::int64_t> class_counts(static_cast<std::size_t>(n_classes), 0);
  for (int label : y) ++class_counts[static_cast<std::size_t>(label)];

  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b) {
      if (class_counts[static_cast<std::size_t>(a)] == 0 ||
          class_counts[static_cast<std::size_t>(b)] == 0) {
        continue;
      }
      std::vector<std::int64_t> rows;
      std::vector<double> yy;
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(y.size()); ++i) {
        const int label = y[static_cast<std::size_t>(i)];
        if (label != a && label != b) continue;
        rows.push_back(i);
        yy.push_back(label == a ? 1.0 : -1.0);
      }

      Matrix sub(static_cast<std::int64_t>(rows.size()), x_std.cols());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        sub.row(static_cast<std::int64_t>(i)) = x_std.row(rows[i]);
      }
      const Matrix kernel = rbf_gram(sub, gamma);
      const SmoResult res = solve_smo(kernel, yy, cfg);

      BinarySvm machine;
      machine.class_a = a;
      machine.class_b = b;
      machine.bias = res.bias;
      machine.hit_iteration_cap = res.hit_iteration_cap;
      machine.final_kkt_violation = res.final_kkt_violation;
      machine.iterations = res.iterations;
      std::vector<std::int64_t> sv;
      for (std::int64_t i = 0; i < res.alpha.size(); ++i) {
        if (res.alpha(i) > 0.0) sv.push_back(i);
      }
      machine.support_vectors.resize(static_cast<std::int64_t>(sv.size()), x_std.cols());
      machine.alpha_y.resize(sv.size());
      for (std::size_t i = 0; i < sv.size(); ++i) {
        machine.support_vectors.row(static_cast<std::int64_t>(i)) = sub.row(sv[i]);
        machine.alpha_y[i] = res.alpha(sv[i]) * yy[static_cast<std::size_t>(sv[i])];
      }
      model.machines.push_back(std::move(machine));
    }
  }
  if (model.machines.empty()) throw ValidationError("svm: no trainable class pair");
  return model;
}

std::vector<int> svm_vote(const SvmModel& model, const Matrix& x_std, int n_classes,
                          Matrix* scores_out) {
  const std::int64_t n = x_std.rows();
  for (const BinarySvm& m : model.machines) n_classes = std::max(n_classes, m.class_b + 1);

  Matrix scores = Matrix::Zero(n, n_classes);
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<int> votes(static_cast<std::size_t>(n_classes));

  for (std::int64_t i = 0; i < n; ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const BinarySvm& m : model.machines) {
      const double d = decision_value(m, model.gamma, x_std.row(i));
      // d >= 0 reads as evidence for class_a, so exact zeros vote the lower class
      ++votes[static_cast<std::size_t>(d >= 0.0 ? m.class_a : m.class_b)];
      scores(i, m.class_a) += d;
      scores(i, m.class_b) -= d;
    }
    int best = 0;
    for (int k = 1; k < n_classes; ++k) {
      const bool more_votes = votes[static_cast<std::size_t>(k)] > votes[static_cast<std::size_t>(best)];
      const bool tied = votes[static_cast<std::size_t>(k)] == votes[static_cast<std::size_t>(best)];
      if (more_votes || (tied && scores(i, k) > scores(i, best))) best = k;
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  if (scores_out != nullptr) *scores_out = std::move(scores);
  return labels;
}

}  // namespace eegdec::learn::detail
