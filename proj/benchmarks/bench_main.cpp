// Microbenchmarks for the hot paths: per-window feature math, filtering,
// interpolation, and the three learners on small but realistic shapes.
#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "eegdec/epoching.hpp"
#include "eegdec/features.hpp"
#include "eegdec/forest.hpp"
#include "eegdec/model.hpp"
#include "eegdec/montage.hpp"
#include "eegdec/preprocess.hpp"
#include "eegdec/rng.hpp"
#include "eegdec/synth.hpp"

using namespace eegdec;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::vector<double> x(n);
  util::Rng rng(seed);
  for (double& v : x) v = rng.normal();
  return x;
}

Matrix labeled_blobs(int per_class, int d, std::vector<int>& y, std::uint64_t seed) {
  Matrix X(3 * per_class, d);
  y.clear();
  util::Rng rng(seed);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const int r = c * per_class + i;
      for (int j = 0; j < d; ++j) X(r, j) = rng.normal();
      X(r, 0) += 4.0 * c;
      y.push_back(c);
    }
  }
  return X;
}

void BM_hjorth(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> x = noise(n, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(features::hjorth(x.data(), static_cast<std::int64_t>(n)));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_hjorth)->Arg(750)->Arg(100000);

void BM_stat_features(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> x = noise(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(features::stat_features(x.data(), static_cast<std::int64_t>(n)));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_stat_features)->Arg(750)->Arg(100000);

void BM_featurize(benchmark::State& state) {
  ingest::SynthSpec spec;
  spec.n_trials_per_class = 15;
  spec.fs = 500.0;
  spec.seed = 3;
  const auto [rec, markers] = ingest::synthesize(spec);
  const epoching::EpochSet es =
      epoching::extract_epochs(rec, markers, epoching::WindowSpec{0.0, 1.5});
  for (auto _ : state) {
    benchmark::DoNotOptimize(features::featurize(es.epochs, rec.channel_names));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(es.epochs.size()));
}
BENCHMARK(BM_featurize)->Unit(benchmark::kMillisecond);

void BM_filtfilt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> x = noise(n, 4);
  const preprocess::ButterworthHighpass hp = preprocess::design_butterworth_highpass(0.5, 500.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(preprocess::filtfilt(hp, x));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_filtfilt)->Arg(100000);

void BM_spline_interpolation(benchmark::State& state) {
  const ingest::MontageTable& montage = ingest::standard_montage();
  ingest::Recording rec;
  rec.fs = 500.0;
  rec.channel_names = montage.names;
  rec.electrode_pos = montage.positions;
  util::Rng rng(5);
  rec.data = Matrix::NullaryExpr(montage.size(), 5000, [&]() { return rng.normal(); });
  const preprocess::PreprocessConfig cfg;
  const std::set<int> bad = {4, 17};
  for (auto _ : state) {
    benchmark::DoNotOptimize(preprocess::interpolate_channels(rec, bad, cfg));
  }
}
BENCHMARK(BM_spline_interpolation)->Unit(benchmark::kMillisecond);

void BM_forest_fit(benchmark::State& state) {
  std::vector<int> y;
  const Matrix X = labeled_blobs(50, 50, y, 6);
  learn::RandomForestConfig cfg;
  cfg.n_trees = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(learn::fit_random_forest(X, y, cfg));
  }
}
BENCHMARK(BM_forest_fit)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_svm_fit(benchmark::State& state) {
  std::vector<int> y;
  const Matrix X = labeled_blobs(40, 20, y, 7);
  const learn::SvmConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(learn::fit_svm(X, y, cfg));
  }
}
BENCHMARK(BM_svm_fit)->Unit(benchmark::kMillisecond);

void BM_gbt_fit(benchmark::State& state) {
  std::vector<int> y;
  const Matrix X = labeled_blobs(40, 20, y, 8);
  learn::GbtConfig cfg;
  cfg.n_rounds = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(learn::fit_gbt(X, y, cfg));
  }
}
BENCHMARK(BM_gbt_fit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
