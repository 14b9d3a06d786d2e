#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "eegdec/types.hpp"

namespace eegdec::learn {

struct SvmConfig {
  double c = 1.0;
  double gamma = 0.0;       // <= 0 means the "scale" rule: 1 / (d * pooled feature variance)
  double tol = 1e-3;        // KKT stopping tolerance
  std::int64_t max_passes = 100000;  // pair-update cap; exceeding sets a warning flag

  void validate() const;
};

struct GbtConfig {
  int n_rounds = 200;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

// z-score parameters learned on training rows, one pair per kept column.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;  // zero-variance columns store sd = 1 (centered to 0)

  void apply(Vector& row_selected) const;
};

// One binary machine of the one-vs-one ensemble; positive class is class_a.
struct BinarySvm {
  int class_a = 0;
  int class_b = 0;
  Matrix support_vectors;       // rows in standardized selected space
  std::vector<double> alpha_y;  // alpha_i * y_i per support vector
  double bias = 0.0;
  bool hit_iteration_cap = false;
  double final_kkt_violation = 0.0;
  std::int64_t iterations = 0;
};

struct SvmModel {
  double gamma = 0.0;  // resolved value
  std::vector<BinarySvm> machines;
};

struct GbtTreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf Newton step (already includes the (K-1)/K factor)
};

struct GbtTree {
  std::vector<GbtTreeNode> nodes;
  double predict(const double* row) const;
};

struct GbtModel {
  std::vector<double> init_scores;      // log class priors
  std::vector<std::vector<GbtTree>> rounds;  // rounds[r][k]
  double learning_rate = 0.1;
  std::vector<double> train_log_loss;   // per completed round
};

enum class ClassifierKind { Svm, Gbt };

const std::string& classifier_name(ClassifierKind kind);
ClassifierKind classifier_from_name(const std::string& name);

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::Svm;
  int input_dim = 0;                  // full feature dimension before selection
  int n_classes = 0;
  std::vector<int> selected_features; // ascending
  Standardizer standardizer;          // over selected columns
  std::variant<SvmModel, GbtModel> learner;
};

struct Prediction {
  std::vector<int> labels;
  Matrix scores;  // trials x classes: SVM vote + decision sums, GBT probabilities
};

// Fits on the full-dimension matrix, restricted to selected columns (empty =
// all). Standardization is computed inside, on exactly these rows.
TrainedModel fit_svm(const Matrix& X, const std::vector<int>& y, const SvmConfig& cfg,
                     std::vector<int> selected = {});
TrainedModel fit_gbt(const Matrix& X, const std::vector<int>& y, const GbtConfig& cfg,
                     std::vector<int> selected = {});

// X must have input_dim columns; the model applies its own mask/standardizer.
Prediction predict(const TrainedModel& model, const Matrix& X);

// Versioned JSON round-trip of the full model.
void save_model_json(const TrainedModel& model, const std::string& path);
TrainedModel load_model_json(const std::string& path);

}  // namespace eegdec::learn
