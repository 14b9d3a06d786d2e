#include "eegdec/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace eegdec::features {
namespace {

// Population variance; mean_sq_out receives mean(x^2) for the relative
// degeneracy threshold (a constant signal leaves rounding crumbs in m2).
double population_var(const double* x, std::int64_t n, double& mean_sq_out) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    sum += x[i];
    sum_sq += x[i] * x[i];
  }
  const double mean = sum / static_cast<double>(n);
  mean_sq_out = sum_sq / static_cast<double>(n);
  double m2 = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    m2 += d * d;
  }
  return m2 / static_cast<double>(n);
}

bool is_degenerate_var(double var, double mean_sq) { return var <= 1e-24 * mean_sq; }

}  // namespace

const std::vector<std::string>& feature_kind_names() {
  static const std::vector<std::string> names = {"mean", "median",   "sd",       "skew",
                                                 "kurtosis", "activity", "mobility", "complexity"};
  return names;
}

StatFeatures stat_features(const double* x, std::int64_t n) {
  if (n < 4) throw ValidationError("stat_features needs n >= 4");

  StatFeatures f;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) throw ValidationError("stat_features: non-finite sample");
    sum += x[i];
    sum_sq += x[i] * x[i];
  }
  f.mean = sum / static_cast<double>(n);
  const double mean_sq = sum_sq / static_cast<double>(n);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = x[i] - f.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);

  std::vector<double> sorted(x, x + n);
  auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  f.median = *mid;
  if (n % 2 == 0) {
    f.median = 0.5 * (f.median + *std::max_element(sorted.begin(), mid));
  }

  f.sd = std::sqrt(m2);
  if (is_degenerate_var(m2, mean_sq)) {
    f.degenerate = true;  // skew/kurtosis stay 0
  } else {
    f.skew = m3 / (m2 * std::sqrt(m2));
    f.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return f;
}

HjorthFeatures hjorth(const double* x, std::int64_t n) {
  if (n < 3) throw ValidationError("hjorth needs n >= 3");
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) throw ValidationError("hjorth: non-finite sample");
  }

  std::vector<double> dx(static_cast<std::size_t>(n - 1));
  for (std::int64_t i = 0; i + 1 < n; ++i) dx[static_cast<std::size_t>(i)] = x[i + 1] - x[i];
  std::vector<double> ddx(static_cast<std::size_t>(n - 2));
  for (std::int64_t i = 0; i + 2 < n; ++i) {
    ddx[static_cast<std::size_t>(i)] = dx[static_cast<std::size_t>(i + 1)] - dx[static_cast<std::size_t>(i)];
  }

  double msq_x = 0.0, msq_dx = 0.0, msq_ddx = 0.0;
  const double var_x = population_var(x, n, msq_x);
  const double var_dx = population_var(dx.data(), n - 1, msq_dx);
  const double var_ddx = population_var(ddx.data(), n - 2, msq_ddx);

  HjorthFeatures f;
  if (is_degenerate_var(var_x, msq_x)) {
    f.degenerate = true;  // activity/mobility/complexity stay 0
    return f;
  }
  f.activity = var_x;
  f.mobility = std::sqrt(var_dx / var_x);
  if (is_degenerate_var(var_dx, msq_dx)) {
    f.degenerate_complexity = true;  // mobility of dx undefined; complexity stays 0
  } else {
    f.complexity = std::sqrt(var_ddx / var_dx) / f.mobility;
  }
  return f;
}

std::vector<std::string> feature_names(const std::vector<std::string>& channel_names) {
  std::vector<std::string> names;
  names.reserve(channel_names.size() * kFeaturesPerChannel);
  for (const std::string& channel : channel_names) {
    for (const std::string& kind : feature_kind_names()) {
      names.push_back(channel + "_" + kind);
    }
  }
  return names;
}

FeatureMatrix featurize(const std::vector<epoching::Epoch>& epochs,
                        const std::vector<std::string>& channel_names) {
  if (epochs.empty()) throw ValidationError("featurize: no epochs");
  const Eigen::Index channels = epochs.front().data.rows();
  const Eigen::Index window = epochs.front().data.cols();
  if (static_cast<std::size_t>(channels) != channel_names.size()) {
    throw ValidationError("featurize: channel name count does not match epoch rows");
  }
  if (window < 4) throw ValidationError("featurize: window too short (need >= 4 samples)");
  for (const epoching::Epoch& e : epochs) {
    if (e.data.rows() != channels || e.data.cols() != window) {
      throw ValidationError("featurize: mixed epoch shapes");
    }
  }

  FeatureMatrix fm;
  fm.names = feature_names(channel_names);
  fm.X.resize(static_cast<Eigen::Index>(epochs.size()),
              channels * static_cast<Eigen::Index>(kFeaturesPerChannel));
  fm.labels.reserve(epochs.size());

  std::vector<double> row(static_cast<std::size_t>(window));
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const epoching::Epoch& e = epochs[i];
    fm.labels.push_back(e.label);
    for (Eigen::Index c = 0; c < channels; ++c) {
      Eigen::Map<Vector>(row.data(), window) = e.data.row(c);
      const StatFeatures s = stat_features(row.data(), window);
      const HjorthFeatures h = hjorth(row.data(), window);
      const Eigen::Index base = c * kFeaturesPerChannel;
      auto out = fm.X.row(static_cast<Eigen::Index>(i));
      out(base + 0) = s.mean;
      out(base + 1) = s.median;
      out(base + 2) = s.sd;
      out(base + 3) = s.skew;
      out(base + 4) = s.kurtosis;
      out(base + 5) = h.activity;
      out(base + 6) = h.mobility;
      out(base + 7) = h.complexity;
      fm.degenerate_count +=
          (s.degenerate ? 1 : 0) + (h.degenerate ? 1 : 0) + (h.degenerate_complexity ? 1 : 0);
    }
  }
  return fm;
}

void write_features_csv(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);

  std::string buffer;
  for (std::size_t i = 0; i < fm.names.size(); ++i) {
    if (i) buffer += ',';
    buffer += fm.names[i];
  }
  buffer += ",label\n";

  char cell[64];
  for (int r = 0; r < fm.trials(); ++r) {
    for (int c = 0; c < fm.dim(); ++c) {
      const int len = std::snprintf(cell, sizeof(cell), "%.9g", fm.X(r, c));
      buffer.append(cell, static_cast<std::size_t>(len));
      buffer += ',';
    }
    buffer += label_name(fm.labels[static_cast<std::size_t>(r)]);
    buffer += '\n';
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

}  // namespace eegdec::features
