#include "eegdec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>

#include "eegdec/epoching.hpp"
#include "eegdec/parallel.hpp"
#include "eegdec/rng.hpp"

namespace eegdec::eval {
namespace {

std::string format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[256];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

std::vector<int> labels_as_int(const features::FeatureMatrix& fm) {
  std::vector<int> y;
  y.reserve(fm.labels.size());
  for (Label label : fm.labels) y.push_back(static_cast<int>(label));
  return y;
}

Matrix gather_rows(const Matrix& x, const std::vector<int>& rows) {
  Matrix out(static_cast<std::int64_t>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<std::int64_t>(i)) = x.row(rows[i]);
  }
  return out;
}

std::uint64_t cell_fold_seed_of(std::uint64_t seed, double lag_ms, double size_s, int fold) {
  const auto lag_key = static_cast<std::uint64_t>(std::llround(lag_ms * 1000.0));
  const auto size_key = static_cast<std::uint64_t>(std::llround(size_s * 1000000.0));
  if (fold < 0) return util::mix_seed({seed, lag_key, size_key});
  return util::mix_seed({seed, lag_key, size_key, static_cast<std::uint64_t>(fold)});
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void CvConfig::validate() const {
  if (k < 2) throw ValidationError("cv k must be >= 2");
  if (n_selected_features < 1) throw ValidationError("n_selected_features must be >= 1");
}

std::vector<FoldSplit> stratified_kfold(const std::vector<Label>& labels, int k,
                                        std::uint64_t seed) {
  if (k < 2) throw ValidationError("stratified_kfold: k must be >= 2");

  std::vector<std::vector<int>> per_class(kNumClasses);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    per_class[static_cast<std::size_t>(static_cast<int>(labels[i]))].push_back(
        static_cast<int>(i));
  }
  for (int c = 0; c < kNumClasses; ++c) {
    const auto count = per_class[static_cast<std::size_t>(c)].size();
    if (static_cast<int>(count) < k) {
      throw InsufficientDataError(
          format("class '%s' has %zu trials, need >= %d for stratified %d-fold",
                 label_name(static_cast<Label>(c)).c_str(), count, k, k));
    }
  }

  // Shuffle within each class, deal round-robin; only (seed, label sequence)
  // matter, so runs differing in features but not labels share folds.
  std::vector<int> fold_of(labels.size(), 0);
  util::Rng rng(util::mix_seed({seed, 0xF01D5u}));
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<int>& members = per_class[static_cast<std::size_t>(c)];
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_of[static_cast<std::size_t>(members[i])] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
  }

  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      auto& split = folds[static_cast<std::size_t>(f)];
      (fold_of[i] == f ? split.test : split.train).push_back(static_cast<int>(i));
    }
  }
  return folds;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts) {
    for (std::int64_t c : row) sum += c;
  }
  return sum;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t sum = 0;
  for (int k = 0; k < kNumClasses; ++k) sum += counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
  return sum;
}

Metrics metrics(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total == 0) throw ValidationError("metrics: empty confusion matrix");

  Metrics m;
  m.accuracy = 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const std::int64_t tp = cm.counts[ku][ku];
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    for (int t = 0; t < kNumClasses; ++t) {
      const auto tu = static_cast<std::size_t>(t);
      if (t != k) {
        fp += cm.counts[tu][ku];
        fn += cm.counts[ku][tu];
      }
    }
    if (tp + fp > 0) {
      precision_sum += static_cast<double>(tp) / static_cast<double>(tp + fp);
    } else {
      ++m.zero_precision_classes;  // contributes 0 to the macro mean
    }
    if (tp + fn > 0) {
      recall_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
    } else {
      ++m.zero_recall_classes;
    }
  }
  m.macro_precision = 100.0 * precision_sum / kNumClasses;
  m.macro_recall = 100.0 * recall_sum / kNumClasses;
  return m;
}

learn::TrainedModel train_fold(const features::FeatureMatrix& fm,
                               const std::vector<int>& train_rows, learn::ClassifierKind kind,
                               const LearnerParams& params, int n_select,
                               std::uint64_t cell_fold_seed, const UsageHooks* hooks,
                               const std::vector<int>* fixed_selection) {
  if (train_rows.empty()) throw ValidationError("train_fold: empty training set");
  if (n_select < 1) throw ValidationError("train_fold: n_select must be >= 1");
  for (int r : train_rows) {
    if (r < 0 || r >= fm.trials()) throw ValidationError("train_fold: row index out of range");
  }

  const Matrix x_train = gather_rows(fm.X, train_rows);
  std::vector<int> y_train;
  y_train.reserve(train_rows.size());
  for (int r : train_rows) {
    y_train.push_back(static_cast<int>(fm.labels[static_cast<std::size_t>(r)]));
  }

  std::vector<int> selection;
  if (fixed_selection != nullptr) {
    selection = *fixed_selection;
  } else {
    if (hooks != nullptr && hooks->on_rows) hooks->on_rows("select", train_rows);
    learn::RandomForestConfig fcfg = params.forest;
    fcfg.seed = cell_fold_seed;
    fcfg.n_threads = 1;
    const learn::RandomForest forest = learn::fit_random_forest(x_train, y_train, fcfg);
    selection = learn::select_features(forest.importance, std::min(n_select, fm.dim()));
  }

  if (hooks != nullptr && hooks->on_rows) {
    hooks->on_rows("standardize", train_rows);
    hooks->on_rows("train", train_rows);
  }
  if (kind == learn::ClassifierKind::Svm) {
    return learn::fit_svm(x_train, y_train, params.svm, std::move(selection));
  }
  learn::GbtConfig gcfg = params.gbt;
  gcfg.seed = cell_fold_seed;
  return learn::fit_gbt(x_train, y_train, gcfg, std::move(selection));
}

CvReport run_sweep(const ingest::Recording& rec, const std::vector<ingest::EventMarker>& markers,
                   const SweepRequest& request, const LearnerParams& params, const CvConfig& cv,
                   const UsageHooks* hooks) {
  cv.validate();
  rec.validate();
  const std::vector<double>& lags =
      request.lags_ms.empty() ? epoching::default_lags_ms() : request.lags_ms;
  const std::vector<double>& sizes =
      request.sizes_s.empty() ? epoching::default_sizes_s() : request.sizes_s;
  std::vector<learn::ClassifierKind> classifiers = request.classifiers;
  if (classifiers.empty()) {
    classifiers = {learn::ClassifierKind::Svm, learn::ClassifierKind::Gbt};
  }
  const int threads = request.threads >= 1 ? request.threads : util::default_threads();

  struct GridCell {
    double lag_ms = 0.0;
    double size_s = 0.0;
    std::string window;
    features::FeatureMatrix fm;
    std::vector<FoldSplit> folds;
    std::vector<int> global_selection;  // Global scope only
    int skipped_markers = 0;
    bool skipped = false;
    std::string skip_reason;
  };

  std::vector<GridCell> grid;
  grid.reserve(lags.size() * sizes.size());
  for (double lag : lags) {
    for (double size : sizes) {
      const epoching::WindowSpec spec{lag, size};
      spec.validate();
      GridCell cell;
      cell.lag_ms = lag;
      cell.size_s = size;
      cell.window = epoching::window_label(spec);
      epoching::EpochSet es = extract_epochs(rec, markers, spec);
      cell.skipped_markers = es.skipped;
      cell.fm = features::featurize(es.epochs, rec.channel_names);
      try {
        cell.folds = stratified_kfold(cell.fm.labels, cv.k, cv.seed);
      } catch (const InsufficientDataError& e) {
        cell.skipped = true;
        cell.skip_reason = e.what();
      }
      grid.push_back(std::move(cell));
    }
  }

  // Whole-cell selection for Global scope happens up front (and serially): it
  // deliberately sees every trial of the cell, which is the leaky contrast to
  // the default per-fold scope.
  if (cv.selection_scope == SelectionScope::Global) {
    for (GridCell& cell : grid) {
      if (cell.skipped) continue;
      std::vector<int> all_rows(static_cast<std::size_t>(cell.fm.trials()));
      for (int i = 0; i < cell.fm.trials(); ++i) all_rows[static_cast<std::size_t>(i)] = i;
      if (hooks != nullptr && hooks->on_rows) {
        hooks->on_rows(format("select|lag_ms=%g|size_s=%g|fold=-1", cell.lag_ms, cell.size_s),
                       all_rows);
      }
      learn::RandomForestConfig fcfg = params.forest;
      fcfg.seed = cell_fold_seed_of(cv.seed, cell.lag_ms, cell.size_s, -1);
      fcfg.n_threads = 1;
      const learn::RandomForest forest =
          learn::fit_random_forest(cell.fm.X, labels_as_int(cell.fm), fcfg);
      cell.global_selection = learn::select_features(
          forest.importance, std::min(cv.n_selected_features, cell.fm.dim()));
    }
  }

  CvReport report;
  report.seed = cv.seed;
  report.k = cv.k;
  report.cells.resize(classifiers.size() * grid.size());
  const auto cell_index = [&](std::size_t ci, std::size_t gi) { return ci * grid.size() + gi; };
  for (std::size_t ci = 0; ci < classifiers.size(); ++ci) {
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const GridCell& g = grid[gi];
      CellResult& cell = report.cells[cell_index(ci, gi)];
      cell.classifier = classifiers[ci];
      cell.lag_ms = g.lag_ms;
      cell.size_s = g.size_s;
      cell.window = g.window;
      cell.n_trials = g.fm.trials();
      cell.skipped_markers = g.skipped_markers;
      cell.skipped = g.skipped;
      cell.skip_reason = g.skip_reason;
      if (!g.skipped) cell.fold_metrics.resize(static_cast<std::size_t>(cv.k));
    }
  }

  struct Task {
    std::size_t gi;
    int fold;
  };
  std::vector<Task> tasks;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    if (grid[gi].skipped) continue;
    for (int f = 0; f < cv.k; ++f) tasks.push_back({gi, f});
  }

  util::parallel_for(static_cast<int>(tasks.size()), threads, [&](int ti) {
    const GridCell& g = grid[tasks[static_cast<std::size_t>(ti)].gi];
    const int fold = tasks[static_cast<std::size_t>(ti)].fold;
    const FoldSplit& split = g.folds[static_cast<std::size_t>(fold)];
    const std::uint64_t seed = cell_fold_seed_of(cv.seed, g.lag_ms, g.size_s, fold);

    UsageHooks local;
    const UsageHooks* hp = nullptr;
    if (hooks != nullptr && hooks->on_rows) {
      const std::string context = format("|lag_ms=%g|size_s=%g|fold=%d", g.lag_ms, g.size_s, fold);
      local.on_rows = [hooks, context](const std::string& stage, const std::vector<int>& rows) {
        hooks->on_rows(stage + context, rows);
      };
      hp = &local;
    }

    // Selection is resolved once per (cell, fold) and reused by every
    // classifier so their comparison sees identical inputs.
    std::vector<int> selection;
    if (cv.selection_scope == SelectionScope::Global) {
      selection = g.global_selection;
    } else {
      if (hp != nullptr) local.on_rows("select", split.train);
      learn::RandomForestConfig fcfg = params.forest;
      fcfg.seed = seed;
      fcfg.n_threads = 1;
      const learn::RandomForest forest =
          learn::fit_random_forest(gather_rows(g.fm.X, split.train), [&] {
            std::vector<int> y;
            y.reserve(split.train.size());
            for (int r : split.train) {
              y.push_back(static_cast<int>(g.fm.labels[static_cast<std::size_t>(r)]));
            }
            return y;
          }(), fcfg);
      selection = learn::select_features(forest.importance,
                                         std::min(cv.n_selected_features, g.fm.dim()));
    }

    const Matrix x_test = gather_rows(g.fm.X, split.test);
    for (std::size_t ci = 0; ci < classifiers.size(); ++ci) {
      const learn::TrainedModel model =
          train_fold(g.fm, split.train, classifiers[ci], params, cv.n_selected_features, seed,
                     hp, &selection);
      const learn::Prediction pred = learn::predict(model, x_test);
      ConfusionMatrix cm;
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        cm.add(static_cast<int>(g.fm.labels[static_cast<std::size_t>(split.test[i])]),
               pred.labels[i]);
      }
      report.cells[cell_index(ci, tasks[static_cast<std::size_t>(ti)].gi)]
          .fold_metrics[static_cast<std::size_t>(fold)] = metrics(cm);
    }
  });

  for (CellResult& cell : report.cells) {
    if (cell.skipped) continue;
    Metrics mean;
    for (const Metrics& m : cell.fold_metrics) {
      mean.accuracy += m.accuracy;
      mean.macro_precision += m.macro_precision;
      mean.macro_recall += m.macro_recall;
      mean.zero_precision_classes += m.zero_precision_classes;  // summed, not averaged
      mean.zero_recall_classes += m.zero_recall_classes;
    }
    const auto k = static_cast<double>(cell.fold_metrics.size());
    mean.accuracy /= k;
    mean.macro_precision /= k;
    mean.macro_recall /= k;
    cell.mean = mean;
  }
  return report;
}

std::string report_csv(const CvReport& report) {
  std::string out =
      "classifier,lag_ms,size_s,window,fold,n_trials,skipped_markers,accuracy,precision,recall,"
      "zero_precision_classes,zero_recall_classes,skipped,skip_reason\n";
  for (const CellResult& cell : report.cells) {
    const std::string prefix =
        format("%s,%g,%g,", learn::classifier_name(cell.classifier).c_str(), cell.lag_ms,
               cell.size_s) +
        csv_quote(cell.window) + ",";
    const std::string counts = format("%d,%d,", cell.n_trials, cell.skipped_markers);
    if (cell.skipped) {
      out += prefix + "mean," + counts + ",,,,," + "1," + csv_quote(cell.skip_reason) + "\n";
      continue;
    }
    for (std::size_t f = 0; f < cell.fold_metrics.size(); ++f) {
      const Metrics& m = cell.fold_metrics[f];
      out += prefix + format("%zu,", f) + counts +
             format("%.6f,%.6f,%.6f,%d,%d,0,\"\"\n", m.accuracy, m.macro_precision,
                    m.macro_recall, m.zero_precision_classes, m.zero_recall_classes);
    }
    out += prefix + "mean," + counts +
           format("%.6f,%.6f,%.6f,%d,%d,0,\"\"\n", cell.mean.accuracy, cell.mean.macro_precision,
                  cell.mean.macro_recall, cell.mean.zero_precision_classes,
                  cell.mean.zero_recall_classes);
  }
  return out;
}

std::string report_table(const CvReport& report) {
  // Collect the grid axes in first-appearance order.
  std::vector<learn::ClassifierKind> classifiers;
  std::vector<double> lags;
  std::vector<double> sizes;
  for (const CellResult& cell : report.cells) {
    if (std::find(classifiers.begin(), classifiers.end(), cell.classifier) == classifiers.end()) {
      classifiers.push_back(cell.classifier);
    }
    if (std::find(lags.begin(), lags.end(), cell.lag_ms) == lags.end()) {
      lags.push_back(cell.lag_ms);
    }
    if (std::find(sizes.begin(), sizes.end(), cell.size_s) == sizes.end()) {
      sizes.push_back(cell.size_s);
    }
  }
  const auto find_cell = [&](learn::ClassifierKind kind, double lag,
                             double size) -> const CellResult* {
    for (const CellResult& cell : report.cells) {
      if (cell.classifier == kind && cell.lag_ms == lag && cell.size_s == size) return &cell;
    }
    return nullptr;
  };

  std::string out = format("%d-fold cross-validated sweep, seed %llu\n", report.k,
                           static_cast<unsigned long long>(report.seed));
  const char* block_names[3] = {"Accuracy (%)", "Precision (%)", "Recall (%)"};
  for (int block = 0; block < 3; ++block) {
    out += "\n";
    out += block_names[block];
    out += "\n";
    out += format("%-10s %8s |", "classifier", "lag_ms");
    for (double size : sizes) out += format(" %9s", format("%gs", size).c_str());
    out += "\n";
    const std::size_t rule = 21 + sizes.size() * 10;
    out += std::string(rule, '-') + "\n";
    for (learn::ClassifierKind kind : classifiers) {
      for (double lag : lags) {
        out += format("%-10s %8g |", learn::classifier_name(kind).c_str(), lag);
        for (double size : sizes) {
          const CellResult* cell = find_cell(kind, lag, size);
          if (cell == nullptr || cell->skipped) {
            out += format(" %9s", "skip");
            continue;
          }
          const double value = block == 0   ? cell->mean.accuracy
                               : block == 1 ? cell->mean.macro_precision
                                            : cell->mean.macro_recall;
          out += format(" %9.2f", value);
        }
        out += "\n";
      }
    }
  }
  return out;
}

void write_report_csv(const CvReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << report_csv(report);
  if (!out) throw ValidationError("failed writing " + path);
}

void write_report_table(const CvReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << report_table(report);
  if (!out) throw ValidationError("failed writing " + path);
}

}  // namespace eegdec::eval
