#pragma once

#include <string>
#include <vector>

#include "eegdec/epoching.hpp"
#include "eegdec/types.hpp"

namespace eegdec::features {

inline constexpr int kFeaturesPerChannel = 8;

// Fixed per-channel feature order; names are "<channel>_<feature>".
const std::vector<std::string>& feature_kind_names();

struct StatFeatures {
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double skew = 0.0;
  double kurtosis = 0.0;  // excess
  bool degenerate = false;  // m2 ~ 0: skew/kurtosis reported as 0
};

// Population (1/n) moments; g1 = m3/m2^1.5, g2 = m4/m2^2 - 3. n >= 4.
StatFeatures stat_features(const double* x, std::int64_t n);

struct HjorthFeatures {
  double activity = 0.0;    // var(x)
  double mobility = 0.0;    // sqrt(var(dx)/var(x))
  double complexity = 0.0;  // mobility(dx)/mobility(x)
  bool degenerate = false;            // var(x) ~ 0: all three reported as 0
  bool degenerate_complexity = false; // var(dx) ~ 0 with var(x) > 0
};

// Derivatives realized as first differences; population variances. n >= 3.
HjorthFeatures hjorth(const double* x, std::int64_t n);

struct FeatureMatrix {
  Matrix X;  // trials x (channels * 8)
  std::vector<std::string> names;
  std::vector<Label> labels;
  int degenerate_count = 0;  // total flagged (trial, feature) slots

  int trials() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
};

// Feature names for a channel set, channel-major.
std::vector<std::string> feature_names(const std::vector<std::string>& channel_names);

// One row per epoch; raw features, no standardization (that belongs to fit).
FeatureMatrix featurize(const std::vector<epoching::Epoch>& epochs,
                        const std::vector<std::string>& channel_names);

// CSV with header = names + "label", one row per trial.
void write_features_csv(const FeatureMatrix& fm, const std::string& path);

}  // namespace eegdec::features
