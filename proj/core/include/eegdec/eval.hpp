#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eegdec/features.hpp"
#include "eegdec/forest.hpp"
#include "eegdec/model.hpp"
#include "eegdec/types.hpp"

namespace eegdec::eval {

enum class SelectionScope { PerFold, Global };

struct CvConfig {
  int k = 5;
  std::uint64_t seed = 1;
  SelectionScope selection_scope = SelectionScope::PerFold;
  int n_selected_features = 50;

  void validate() const;
};

struct FoldSplit {
  std::vector<int> train;
  std::vector<int> test;
};

// Within each class: shuffle by seed, deal round-robin. Folds are
// class-balanced within +-1 and partition the indices exactly.
// Throws InsufficientDataError when any class has fewer than k members.
std::vector<FoldSplit> stratified_kfold(const std::vector<Label>& labels, int k,
                                        std::uint64_t seed);

struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};  // [true][pred]

  void add(int true_label, int pred_label) { ++counts[true_label][pred_label]; }
  std::int64_t total() const;
  std::int64_t trace() const;
};

struct Metrics {
  double accuracy = 0.0;         // percent
  double macro_precision = 0.0;  // percent
  double macro_recall = 0.0;     // percent
  int zero_precision_classes = 0;  // classes with TP+FP = 0, contributed 0
  int zero_recall_classes = 0;     // classes with TP+FN = 0, contributed 0
};

// The one-vs-rest macro metrics; throws ValidationError on an empty matrix.
Metrics metrics(const ConfusionMatrix& cm);

struct LearnerParams {
  learn::RandomForestConfig forest;
  learn::SvmConfig svm;
  learn::GbtConfig gbt;
};

// Instrumentation for leakage audits: called with the original row indices a
// stage consumes. Stages: "standardize", "select", "train". run_sweep appends
// "|lag_ms=<g>|size_s=<g>|fold=<d>" to the stage so rows can be attributed per
// cell and fold (fold=-1 for whole-cell selection under Global scope). The
// callback may fire concurrently from worker threads and must be thread-safe.
struct UsageHooks {
  std::function<void(const std::string& stage, const std::vector<int>& rows)> on_rows;
};

// Selection (unless fixed_selection is given) and learner fitting on exactly
// train_rows of fm. cell_fold_seed drives the forest; hooks see every stage.
learn::TrainedModel train_fold(const features::FeatureMatrix& fm,
                               const std::vector<int>& train_rows, learn::ClassifierKind kind,
                               const LearnerParams& params, int n_select,
                               std::uint64_t cell_fold_seed, const UsageHooks* hooks,
                               const std::vector<int>* fixed_selection = nullptr);

struct SweepRequest {
  std::vector<double> lags_ms;
  std::vector<double> sizes_s;
  std::vector<learn::ClassifierKind> classifiers;  // default {Svm, Gbt}
  int threads = 1;
};

struct CellResult {
  learn::ClassifierKind classifier = learn::ClassifierKind::Svm;
  double lag_ms = 0.0;
  double size_s = 0.0;
  std::string window;        // closed-interval display label
  int n_trials = 0;
  int skipped_markers = 0;
  bool skipped = false;      // insufficient trials for stratified k-fold
  std::string skip_reason;
  std::vector<Metrics> fold_metrics;
  Metrics mean;
};

struct CvReport {
  std::uint64_t seed = 0;
  int k = 5;
  std::vector<CellResult> cells;
};

// Per cell: epoch -> featurize -> stratified k-fold -> per-fold select/train/
// test. Fold assignment depends only on (seed, surviving label sequence), so
// cells with the same surviving trials share folds and stay comparable. All
// other randomness is keyed by (seed, lag, size, fold); thread count never
// changes results. Cells without k trials per class are reported as skipped.
CvReport run_sweep(const ingest::Recording& rec, const std::vector<ingest::EventMarker>& markers,
                   const SweepRequest& request, const LearnerParams& params, const CvConfig& cv,
                   const UsageHooks* hooks = nullptr);

// One row per cell x fold plus a mean row; byte-stable for a given report.
std::string report_csv(const CvReport& report);
// Aligned Accuracy/Precision/Recall blocks, rows classifier x lag, columns sizes.
std::string report_table(const CvReport& report);

void write_report_csv(const CvReport& report, const std::string& path);
void write_report_table(const CvReport& report, const std::string& path);

}  // namespace eegdec::eval
