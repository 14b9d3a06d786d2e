// Standalone acceptance suite: one [PASS]/[FAIL] line per criterion with the
// measured values and the pinned limits. Exit code is the failure count.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "eegdec/epoching.hpp"
#include "eegdec/eval.hpp"
#include "eegdec/features.hpp"
#include "eegdec/forest.hpp"
#include "eegdec/model.hpp"
#include "eegdec/montage.hpp"
#include "eegdec/preprocess.hpp"
#include "eegdec/rng.hpp"
#include "eegdec/synth.hpp"
#include "eegdec/types.hpp"

using namespace eegdec;

namespace {

int g_failures = 0;

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", idx, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rms(const double* x, std::int64_t n) {
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// 1. Hjorth estimators against analytic limits.
//    iid noise: mobility -> sqrt(2); alternating signal: mobility -> 2,
//    complexity -> 1; mobility/complexity invariant to scale and shift.
void criterion_hjorth() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string why;

  double max_noise_dev = 0.0;
  std::vector<double> x(1000000);
  for (int s = 0; s < 100; ++s) {
    util::Rng rng(util::mix_seed({1000, static_cast<std::uint64_t>(s)}));
    for (double& v : x) v = rng.normal();
    const features::HjorthFeatures h =
        features::hjorth(x.data(), static_cast<std::int64_t>(x.size()));
    max_noise_dev = std::max(max_noise_dev, std::abs(h.mobility / std::sqrt(2.0) - 1.0));
  }
  if (max_noise_dev >= 0.01) {
    ok = false;
    why += fmt(" noise mobility off by %.4f;", max_noise_dev);
  }

  std::vector<double> alt(100000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const features::HjorthFeatures ha =
      features::hjorth(alt.data(), static_cast<std::int64_t>(alt.size()));
  const double alt_mob_dev = std::abs(ha.mobility / 2.0 - 1.0);
  const double alt_cpx_dev = std::abs(ha.complexity - 1.0);
  if (alt_mob_dev >= 0.01 || alt_cpx_dev >= 0.01) {
    ok = false;
    why += fmt(" alternating dev mob %.4f cpx %.4f;", alt_mob_dev, alt_cpx_dev);
  }

  std::vector<double> base(10000);
  util::Rng rng(7);
  for (double& v : base) v = rng.normal();
  std::vector<double> scaled = base;
  for (double& v : scaled) v *= 3.7;
  std::vector<double> shifted = base;
  for (double& v : shifted) v += 100.0;
  const auto n = static_cast<std::int64_t>(base.size());
  const features::HjorthFeatures h0 = features::hjorth(base.data(), n);
  const features::HjorthFeatures hs = features::hjorth(scaled.data(), n);
  const features::HjorthFeatures hd = features::hjorth(shifted.data(), n);
  const double inv_dev = std::max(
      {std::abs(hs.mobility / h0.mobility - 1.0), std::abs(hs.complexity / h0.complexity - 1.0),
       std::abs(hd.mobility / h0.mobility - 1.0), std::abs(hd.complexity / h0.complexity - 1.0),
       std::abs(hd.activity / h0.activity - 1.0)});
  if (inv_dev >= 1e-9) {
    ok = false;
    why += fmt(" invariance dev %.3g;", inv_dev);
  }

  const double elapsed = seconds_since(t0);
  if (elapsed >= 30.0) {
    ok = false;
    why += fmt(" too slow;");
  }
  report(1, "hjorth analytic oracles", ok,
         fmt("noise dev %.4f, alt dev %.4f/%.4f (< 0.01), invariance dev %.2g (< 1e-9), "
             "%.1fs (< 30s)%s",
             max_noise_dev, alt_mob_dev, alt_cpx_dev, inv_dev, elapsed, why.c_str()));
}

// ---------------------------------------------------------------------------
// 2. Feature dimensionality: 31 channels x 8 kinds = 248 named columns, and
//    forest-ranked selection hands back exactly 50 of them.
void criterion_feature_dim() {
  ingest::SynthSpec spec;
  spec.n_trials_per_class = 15;
  spec.fs = 100.0;
  spec.snr = 3.0;
  spec.signature_s = 1.5;
  spec.seed = 42;
  const auto [rec, markers] = ingest::synthesize(spec);
  const epoching::EpochSet es =
      epoching::extract_epochs(rec, markers, epoching::WindowSpec{0.0, 1.5});
  const features::FeatureMatrix fm = features::featurize(es.epochs, rec.channel_names);

  bool ok = fm.dim() == 248 && fm.names.size() == 248 && fm.trials() == 45;
  ok = ok && fm.names.front() == "Fp1_mean";
  const std::set<std::string> unique_names(fm.names.begin(), fm.names.end());
  ok = ok && unique_names.size() == 248;

  std::vector<int> y;
  for (Label l : fm.labels) y.push_back(static_cast<int>(l));
  learn::RandomForestConfig fcfg;
  fcfg.n_trees = 50;
  fcfg.seed = 1;
  const learn::RandomForest forest = learn::fit_random_forest(fm.X, y, fcfg);
  const std::vector<int> sel = learn::select_features(forest.importance, 50);
  ok = ok && sel.size() == 50;
  ok = ok && std::is_sorted(sel.begin(), sel.end()) &&
       std::adjacent_find(sel.begin(), sel.end()) == sel.end();
  ok = ok && sel.front() >= 0 && sel.back() < 248;

  report(2, "feature layout and selection width", ok,
         fmt("%d features (expect 248), %zu names, first '%s', selected %zu (expect 50)",
             fm.dim(), fm.names.size(), fm.names.front().c_str(), sel.size()));
}

// ---------------------------------------------------------------------------
// 3. Metrics against a hand-computed confusion matrix, plus chance-level
//    accuracy for random predictions.
void criterion_metrics() {
  eval::ConfusionMatrix cm;
  const int counts[3][3] = {{8, 1, 1}, {2, 7, 1}, {0, 1, 9}};
  for (int t = 0; t < 3; ++t) {
    for (int p = 0; p < 3; ++p) {
      for (int i = 0; i < counts[t][p]; ++i) cm.add(t, p);
    }
  }
  const eval::Metrics m = eval::metrics(cm);
  const double precision_ref = 100.0 * (8.0 / 10.0 + 7.0 / 9.0 + 9.0 / 11.0) / 3.0;
  const double hand_dev =
      std::max({std::abs(m.accuracy - 80.0), std::abs(m.macro_recall - 80.0),
                std::abs(m.macro_precision - precision_ref)});
  bool ok = hand_dev < 1e-9;

  eval::ConfusionMatrix rand_cm;
  util::Rng rng(2026);
  for (int i = 0; i < 3000; ++i) {
    rand_cm.add(static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3)));
  }
  const double rand_acc = eval::metrics(rand_cm).accuracy;
  ok = ok && std::abs(rand_acc - 100.0 / 3.0) <= 3.0;

  report(3, "metrics oracles", ok,
         fmt("hand matrix dev %.2g (< 1e-9), random accuracy %.2f (33.3 +- 3)", hand_dev,
             rand_acc));
}

// ---------------------------------------------------------------------------
// 4. Learners against closed forms: XOR SVM with dual feasibility, monotone
//    GBT training loss, a depth-1 GBT round against a brute-force stump, and
//    forest importance concentrating on the one label-carrying feature.
struct Stump {
  double threshold = 0.0;
  double left_value = 0.0;
  double right_value = 0.0;
};

// Exhaustive stump on standardized inputs: midpoint thresholds, squared-error
// split score, leaves via the multiclass Newton step.
Stump brute_force_stump(std::vector<double> xs, const std::vector<double>& residuals) {
  const auto n = xs.size();
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : xs) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  for (double& v : xs) v = (v - mean) / sd;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  const auto newton = [&](const std::vector<std::size_t>& members) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i : members) {
      num += residuals[i];
      den += std::abs(residuals[i]) * (1.0 - std::abs(residuals[i]));
    }
    return 0.5 * num / den;  // (K - 1) / K with K = 2
  };

  Stump best;
  double best_score = -1.0;
  for (std::size_t cut = 1; cut < n; ++cut) {
    const double lo = xs[order[cut - 1]];
    const double hi = xs[order[cut]];
    if (lo == hi) continue;
    std::vector<std::size_t> left(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<std::size_t> right(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
    double sum_l = 0.0;
    double sum_r = 0.0;
    for (std::size_t i : left) sum_l += residuals[i];
    for (std::size_t i : right) sum_r += residuals[i];
    const double score = sum_l * sum_l / static_cast<double>(left.size()) +
                         sum_r * sum_r / static_cast<double>(right.size());
    if (score > best_score) {
      best_score = score;
      best.threshold = (lo + hi) / 2.0;
      best.left_value = newton(left);
      best.right_value = newton(right);
    }
  }
  return best;
}

Matrix blob_matrix(int per_class, std::uint64_t seed, std::vector<int>& y) {
  const double cx[3] = {0.0, 8.0, 0.0};
  const double cy[3] = {0.0, 0.0, 8.0};
  Matrix X(3 * per_class, 2);
  y.clear();
  util::Rng rng(seed);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const int r = c * per_class + i;
      X(r, 0) = cx[c] + 0.5 * rng.normal();
      X(r, 1) = cy[c] + 0.5 * rng.normal();
      y.push_back(c);
    }
  }
  return X;
}

void criterion_learners() {
  bool ok = true;
  std::string why;

  // (a) XOR under the RBF kernel, gamma 1, c 10.
  Matrix X(4, 2);
  X << 1, 1, 1, -1, -1, 1, -1, -1;
  const std::vector<int> y = {0, 1, 1, 0};
  learn::SvmConfig scfg;
  scfg.c = 10.0;
  scfg.gamma = 1.0;
  scfg.tol = 1e-9;
  const learn::TrainedModel svm = learn::fit_svm(X, y, scfg);
  const learn::Prediction pred = learn::predict(svm, X);
  int svm_hits = 0;
  for (int i = 0; i < 4; ++i) svm_hits += pred.labels[static_cast<std::size_t>(i)] == y[static_cast<std::size_t>(i)] ? 1 : 0;
  const learn::BinarySvm& machine = std::get<learn::SvmModel>(svm.learner).machines.at(0);
  double alpha_sum = 0.0;
  double box_violation = 0.0;
  for (double ay : machine.alpha_y) {
    alpha_sum += ay;
    box_violation = std::max(box_violation, std::abs(ay) - scfg.c);
  }
  if (svm_hits != 4 || std::abs(alpha_sum) > 1e-6 || box_violation > 1e-6) {
    ok = false;
    why += fmt(" xor hits %d, |sum alpha y| %.2g, box excess %.2g;", svm_hits,
               std::abs(alpha_sum), box_violation);
  }

  // (b) strictly decreasing training log-loss on separable blobs.
  std::vector<int> by;
  const Matrix bx = blob_matrix(20, 11, by);
  learn::GbtConfig gcfg;
  gcfg.n_rounds = 10;
  gcfg.min_samples_leaf = 2;
  const learn::TrainedModel gbt = learn::fit_gbt(bx, by, gcfg);
  const std::vector<double>& losses = std::get<learn::GbtModel>(gbt.learner).train_log_loss;
  bool monotone = losses.size() == 10;
  for (std::size_t i = 1; i < losses.size(); ++i) monotone = monotone && losses[i] < losses[i - 1];
  if (!monotone) {
    ok = false;
    why += fmt(" gbt loss not monotone;");
  }

  // (c) one depth-1 round against the brute-force stump.
  Matrix sx(8, 1);
  sx << 0, 1, 2, 3, 10, 11, 12, 13;
  const std::vector<int> sy = {0, 0, 0, 0, 1, 1, 1, 1};
  learn::GbtConfig stump_cfg;
  stump_cfg.n_rounds = 1;
  stump_cfg.learning_rate = 1.0;
  stump_cfg.max_depth = 1;
  stump_cfg.min_samples_leaf = 1;
  const learn::TrainedModel one = learn::fit_gbt(sx, sy, stump_cfg);
  const learn::GbtModel& gm = std::get<learn::GbtModel>(one.learner);
  const learn::GbtTree& tree = gm.rounds.at(0).at(0);
  const learn::GbtTreeNode& root = tree.nodes.at(0);
  std::vector<double> xs(8);
  for (int i = 0; i < 8; ++i) xs[static_cast<std::size_t>(i)] = sx(i, 0);
  std::vector<double> residuals(8);
  for (int i = 0; i < 8; ++i) residuals[static_cast<std::size_t>(i)] = (sy[static_cast<std::size_t>(i)] == 0 ? 1.0 : 0.0) - 0.5;
  const Stump oracle = brute_force_stump(xs, residuals);
  const double stump_dev = std::max(
      {std::abs(root.threshold - oracle.threshold),
       std::abs(tree.nodes.at(static_cast<std::size_t>(root.left)).value - oracle.left_value),
       std::abs(tree.nodes.at(static_cast<std::size_t>(root.right)).value - oracle.right_value)});
  if (root.feature != 0 || stump_dev > 1e-6) {
    ok = false;
    why += fmt(" stump dev %.2g;", stump_dev);
  }

  // (d) importance concentrates on the single label-determining feature.
  const int n = 300;
  const int d = 16;
  Matrix fx(n, d);
  std::vector<int> fy(n);
  util::Rng rng(5);
  for (int i = 0; i < n; ++i) {
    fy[static_cast<std::size_t>(i)] = i % 3;
    fx(i, 0) = static_cast<double>(i % 3) + 0.1 * rng.normal();
    for (int j = 1; j < d; ++j) fx(i, j) = rng.normal();
  }
  learn::RandomForestConfig fcfg;
  fcfg.n_trees = 200;
  const learn::RandomForest forest = learn::fit_random_forest(fx, fy, fcfg);
  int arg = 0;
  forest.importance.maxCoeff(&arg);
  if (arg != 0 || forest.importance(0) <= 0.5) {
    ok = false;
    why += fmt(" importance argmax %d value %.3f;", arg, forest.importance(0));
  }

  report(4, "learner closed-form oracles", ok,
         fmt("xor %d/4, dual dev %.2g (< 1e-6), loss %.3f -> %.3f, stump dev %.2g (< 1e-6), "
             "importance[0] %.3f (> 0.5)%s",
             svm_hits, std::max(std::abs(alpha_sum), box_violation), losses.front(),
             losses.back(), stump_dev, forest.importance(0), why.c_str()));
}

// ---------------------------------------------------------------------------
// 5. Cross-validation hygiene: exact partition, an instrumented proof that no
//    test row reaches fit/selection/standardization, and bitwise-identical
//    reports across reruns and thread counts.
void criterion_cv_hygiene() {
  ingest::SynthSpec spec;
  spec.n_trials_per_class = 10;
  spec.fs = 100.0;
  spec.snr = 3.0;
  spec.signature_s = 1.5;
  spec.seed = 31;
  const auto [rec, markers] = ingest::synthesize(spec);
  const epoching::EpochSet es =
      epoching::extract_epochs(rec, markers, epoching::WindowSpec{0.0, 1.5});
  const features::FeatureMatrix fm = features::featurize(es.epochs, rec.channel_names);

  eval::CvConfig cv;
  cv.k = 5;
  cv.seed = 77;
  cv.n_selected_features = 30;
  const std::vector<eval::FoldSplit> folds = eval::stratified_kfold(fm.labels, cv.k, cv.seed);
  std::vector<int> seen(static_cast<std::size_t>(fm.trials()), 0);
  for (const eval::FoldSplit& fold : folds) {
    for (int i : fold.test) ++seen[static_cast<std::size_t>(i)];
  }
  const bool partition_ok =
      std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });

  eval::SweepRequest request;
  request.lags_ms = {0.0};
  request.sizes_s = {1.5};
  request.threads = 2;
  eval::LearnerParams params;
  params.forest.n_trees = 100;

  std::mutex mu;
  std::int64_t leaked = 0;
  std::int64_t events = 0;
  eval::UsageHooks hooks;
  hooks.on_rows = [&](const std::string& stage, const std::vector<int>& rows) {
    const auto pos = stage.find("fold=");
    const int fold = std::stoi(stage.substr(pos + 5));
    std::int64_t hits = 0;
    for (int r : rows) {
      const auto& test = folds[static_cast<std::size_t>(fold)].test;
      hits += std::count(test.begin(), test.end(), r);
    }
    const std::lock_guard<std::mutex> lock(mu);
    leaked += hits;
    ++events;
  };
  const eval::CvReport audited = eval::run_sweep(rec, markers, request, params, cv, &hooks);
  const std::string csv_a = eval::report_csv(audited);

  const std::string csv_b = eval::report_csv(eval::run_sweep(rec, markers, request, params, cv));
  request.threads = 1;
  const std::string csv_1 = eval::report_csv(eval::run_sweep(rec, markers, request, params, cv));
  request.threads = 4;
  const std::string csv_4 = eval::report_csv(eval::run_sweep(rec, markers, request, params, cv));
  const bool identical = csv_a == csv_b && csv_b == csv_1 && csv_1 == csv_4;

  const bool ok = partition_ok && leaked == 0 && events == cv.k * 5 && identical;
  report(5, "cross-validation hygiene", ok,
         fmt("partition %s, leaked rows %lld over %lld audited stages (expect 0), reports "
             "bitwise identical across reruns and threads 1/2/4: %s",
             partition_ok ? "exact" : "BROKEN", static_cast<long long>(leaked),
             static_cast<long long>(events), identical ? "yes" : "NO"));
}

// ---------------------------------------------------------------------------
// 6. End to end: synthesize, preprocess, decode one cell with the SVM. Strong
//    signal must reach 90% mean accuracy; zero signal must sit at chance.
void criterion_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();

  ingest::SynthSpec spec;
  spec.n_trials_per_class = 50;
  spec.fs = 500.0;
  spec.snr = 5.0;
  spec.seed = 1;

  eval::SweepRequest request;
  request.lags_ms = {0.0};
  request.sizes_s = {1.5};
  request.classifiers = {learn::ClassifierKind::Svm};
  request.threads = 2;
  eval::CvConfig cv;
  cv.seed = 1;

  const auto decode = [&](double snr) {
    ingest::SynthSpec s = spec;
    s.snr = snr;
    const auto [rec, markers] = ingest::synthesize(s);
    const auto [clean, preport] = preprocess::preprocess_chain(rec, preprocess::PreprocessConfig{});
    const eval::CvReport report =
        eval::run_sweep(clean, markers, request, eval::LearnerParams{}, cv);
    return report.cells.at(0).mean.accuracy;
  };

  const double strong = decode(5.0);
  const double chance = decode(0.0);
  const double elapsed = seconds_since(t0);

  const bool ok = strong >= 90.0 && std::abs(chance - 100.0 / 3.0) <= 8.0 && elapsed < 300.0;
  report(6, "end-to-end decode", ok,
         fmt("snr 5 accuracy %.2f (>= 90), snr 0 accuracy %.2f (33.3 +- 8), %.0fs (< 300s)",
             strong, chance, elapsed));
}

// ---------------------------------------------------------------------------
// 7. Temporal specificity: the class signature lives only in the final 1.5 s
//    before onset, so decoding from a window lagged a full second behind the
//    onset must cost at least 10 accuracy points, averaged over 5 seeds.
void criterion_lag_degradation() {
  // Confinement: with the same seed, zero-snr and nonzero-snr syntheses agree
  // bitwise outside the signature windows and differ inside them.
  ingest::SynthSpec probe;
  probe.n_trials_per_class = 4;
  probe.fs = 100.0;
  probe.signature_s = 1.5;
  probe.seed = 5;
  probe.snr = 3.0;
  const auto [rec_sig, markers_probe] = ingest::synthesize(probe);
  probe.snr = 0.0;
  const auto [rec_flat, markers_flat] = ingest::synthesize(probe);
  const auto sig_samples = static_cast<std::int64_t>(std::llround(probe.signature_s * probe.fs));
  double outside_diff = 0.0;
  double inside_diff = 0.0;
  for (std::int64_t s = 0; s < rec_sig.samples(); ++s) {
    bool inside = false;
    for (const ingest::EventMarker& m : markers_probe) {
      inside = inside || (s >= m.onset_sample - sig_samples && s <= m.onset_sample);
    }
    const double d = (rec_sig.data.col(s) - rec_flat.data.col(s)).cwiseAbs().maxCoeff();
    (inside ? inside_diff : outside_diff) = std::max(inside ? inside_diff : outside_diff, d);
  }
  const bool confined = outside_diff == 0.0 && inside_diff > 0.0;

  double mean_gap = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    ingest::SynthSpec spec;
    spec.n_trials_per_class = 20;
    spec.fs = 250.0;
    spec.snr = 0.5;
    spec.signature_s = 1.5;
    spec.seed = s;
    const auto [rec, markers] = ingest::synthesize(spec);

    eval::SweepRequest request;
    request.lags_ms = {0.0, 1000.0};
    request.sizes_s = {1.5};
    request.classifiers = {learn::ClassifierKind::Svm};
    request.threads = 2;
    eval::CvConfig cv;
    cv.seed = s;
    const eval::CvReport report =
        eval::run_sweep(rec, markers, request, eval::LearnerParams{}, cv);

    double acc0 = 0.0;
    double acc1000 = 0.0;
    for (const eval::CellResult& cell : report.cells) {
      (cell.lag_ms == 0.0 ? acc0 : acc1000) = cell.mean.accuracy;
    }
    mean_gap += (acc0 - acc1000) / 5.0;
  }

  const bool ok = confined && mean_gap >= 10.0;
  report(7, "pre-onset lag degradation", ok,
         fmt("signature confined: %s (outside diff %.1g), lag-0 minus lag-1000 accuracy %.2f "
             "points over 5 seeds (>= 10)",
             confined ? "yes" : "NO", outside_diff, mean_gap));
}

// ---------------------------------------------------------------------------
// 8. Preprocessing contracts: CAR zero-mean and idempotent, high-pass kills DC
//    and passes 10 Hz, spline interpolation restores constant and smooth
//    fields, burst suppression is a no-op on clean data and caps at threshold.
void criterion_preprocess_contracts() {
  bool ok = true;
  std::string why;

  ingest::SynthSpec spec;
  spec.n_trials_per_class = 6;
  spec.fs = 100.0;
  spec.seed = 99;
  auto [rec, markers] = ingest::synthesize(spec);
  const double scale = rec.data.cwiseAbs().maxCoeff();

  // (a) CAR: good-channel per-sample mean at zero, applying twice changes nothing.
  rec.bad_channels = {2};
  const ingest::Recording car = preprocess::common_average_reference(rec);
  double max_mean = 0.0;
  for (std::int64_t s = 0; s < car.samples(); ++s) {
    double sum = 0.0;
    for (int c = 0; c < car.channels(); ++c) {
      if (c != 2) sum += car.data(c, s);
    }
    max_mean = std::max(max_mean, std::abs(sum / (car.channels() - 1)));
  }
  const ingest::Recording car2 = preprocess::common_average_reference(car);
  const double idem = (car2.data - car.data).cwiseAbs().maxCoeff();
  if (max_mean >= 1e-9 * scale || idem >= 1e-9 * scale) {
    ok = false;
    why += fmt(" car mean %.2g idem %.2g;", max_mean, idem);
  }

  // (b) high-pass: DC to dust, 10 Hz through within 2%.
  const preprocess::ButterworthHighpass hp = preprocess::design_butterworth_highpass(0.5, 500.0);
  const std::vector<double> dc(5000, 7.3);
  const std::vector<double> dc_out = preprocess::filtfilt(hp, dc);
  double dc_residual = 0.0;
  for (double v : dc_out) dc_residual = std::max(dc_residual, std::abs(v));
  std::vector<double> tone(5000);
  const double two_pi = 2.0 * std::acos(-1.0);
  for (std::size_t i = 0; i < tone.size(); ++i) {
    tone[i] = std::sin(two_pi * 10.0 * static_cast<double>(i) / 500.0);
  }
  const std::vector<double> tone_out = preprocess::filtfilt(hp, tone);
  const double gain = rms(tone_out.data() + 1250, 2500) / rms(tone.data() + 1250, 2500);
  if (dc_residual >= 1e-3 || std::abs(gain - 1.0) > 0.02) {
    ok = false;
    why += fmt(" hp dc %.2g gain %.4f;", dc_residual, gain);
  }

  // (c) spherical spline: constant field exact, held-out smooth field close.
  const ingest::MontageTable& montage = ingest::standard_montage();
  ingest::Recording field;
  field.fs = 100.0;
  field.channel_names = montage.names;
  field.electrode_pos = montage.positions;
  field.data = Matrix::Constant(montage.size(), 4, 4.25);
  const preprocess::PreprocessConfig pcfg;
  const ingest::Recording const_out = preprocess::interpolate_channels(field, {4}, pcfg);
  const double const_dev = (const_out.data.row(4).array() - 4.25).abs().maxCoeff();

  const Vec3 q = 0.7 * Vec3(0.3, 0.4, 0.6).normalized();
  for (int c = 0; c < montage.size(); ++c) {
    field.data.row(c).setConstant(1.0 / (montage.positions[static_cast<std::size_t>(c)] - q).norm());
  }
  const double truth = field.data(4, 0);
  const ingest::Recording dipole_out = preprocess::interpolate_channels(field, {4}, pcfg);
  const double dipole_rel = std::abs(dipole_out.data(4, 0) / truth - 1.0);
  if (const_dev >= 1e-6 || dipole_rel > 0.05) {
    ok = false;
    why += fmt(" spline const %.2g held-out %.3f;", const_dev, dipole_rel);
  }

  // (d) burst suppression: clean data untouched bit for bit; an injected burst
  // window is rescaled to exactly the threshold RMS.
  const ingest::Recording no_bursts = preprocess::suppress_bursts(rec, pcfg);
  const double clean_diff = (no_bursts.data - rec.data).cwiseAbs().maxCoeff();

  ingest::Recording bursty = rec;
  bursty.data.row(5).segment(1000, 50) *= 40.0;
  std::vector<double> channel(bursty.data.row(5).begin(), bursty.data.row(5).end());
  std::sort(channel.begin(), channel.end());
  const auto mid = channel.size() / 2;
  const double median = (channel[mid - 1] + channel[mid]) / 2.0;
  for (double& v : channel) v = std::abs(v - median);
  std::sort(channel.begin(), channel.end());
  const double mad = (channel[mid - 1] + channel[mid]) / 2.0;
  const double threshold_rms = pcfg.burst_sd_threshold * 1.4826 * mad;

  const ingest::Recording capped = preprocess::suppress_bursts(bursty, pcfg);
  const double window_rms = rms(capped.data.row(5).segment(1000, 50).eval().data(), 50);
  const double cap_dev = std::abs(window_rms / threshold_rms - 1.0);
  Matrix untouched_diff = (capped.data - bursty.data).cwiseAbs();
  untouched_diff.row(5).segment(1000, 50).setZero();
  const double other_diff = untouched_diff.maxCoeff();
  if (clean_diff != 0.0 || cap_dev >= 1e-9 || other_diff != 0.0) {
    ok = false;
    why += fmt(" burst clean %.2g cap dev %.2g other %.2g;", clean_diff, cap_dev, other_diff);
  }

  report(8, "preprocessing contracts", ok,
         fmt("car mean %.1g, idempotence %.1g (< 1e-9 scaled), hp dc %.1g (< 1e-3), 10 Hz gain "
             "%.4f (+- 2%%), spline const %.1g (< 1e-6), held-out %.2f%% (< 5%%), burst clean "
             "diff %.1g, cap dev %.1g%s",
             max_mean, idem, dc_residual, gain, const_dev, 100.0 * dipole_rel, clean_diff,
             cap_dev, why.c_str()));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_hjorth();
  criterion_feature_dim();
  criterion_metrics();
  criterion_learners();
  criterion_cv_hygiene();
  criterion_end_to_end();
  criterion_lag_degradation();
  criterion_preprocess_contracts();
  std::printf("%d of 8 criteria passed in %.0fs\n", 8 - g_failures, seconds_since(t0));
  return g_failures;
}
