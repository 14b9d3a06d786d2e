#pragma once

#include <array>
#include <set>
#include <vector>

#include "eegdec/types.hpp"

namespace eegdec::preprocess {

struct PreprocessConfig {
  double hp_cutoff_hz = 0.5;
  double flat_seconds = 5.0;
  double flat_eps = 1e-7;          // microvolts; exact-equality flatness is brittle
  double burst_sd_threshold = 20.0;
  double burst_window_s = 0.5;
  int spline_order_m = 4;
  int spline_terms = 7;
  double spline_reg = 1e-5;

  void validate() const;
};

// 4th-order Butterworth high-pass, b/a of length 5 (a[0] = 1).
struct ButterworthHighpass {
  std::array<double, 5> b{};
  std::array<double, 5> a{};
};

// Bilinear-transform design with prewarped cutoff. Requires cutoff < fs/2.
ButterworthHighpass design_butterworth_highpass(double cutoff_hz, double fs);

// Zero-phase forward-backward run of the filter over one signal: odd
// (point-symmetric) reflection padding of 3x filter order per end, steady-state
// initial conditions scaled by the first sample of each pass.
std::vector<double> filtfilt(const ButterworthHighpass& f, const std::vector<double>& x);

// Per-channel zero-phase high-pass of the whole recording.
ingest::Recording highpass(const ingest::Recording& rec, double cutoff_hz);

// A channel is flat when some contiguous run of more than flat_seconds*fs
// samples moves by at most flat_eps between consecutive samples.
std::set<int> detect_flat_channels(const ingest::Recording& rec, double flat_seconds,
                                   double flat_eps);

// Robust windowed RMS capping: per channel, baseline SD = 1.4826 * MAD over
// the whole channel; any non-overlapping burst_window_s window whose RMS
// exceeds burst_sd_threshold * baseline is rescaled down to exactly the
// threshold. Zero-baseline channels pass through untouched.
ingest::Recording suppress_bursts(const ingest::Recording& rec, const PreprocessConfig& cfg);

// Subtracts the per-sample mean of good (non-bad) channels from every channel.
ingest::Recording common_average_reference(const ingest::Recording& rec);

// Perrin-style spherical-spline reconstruction of bad channels from good ones.
// g(cos t) = sum_{n=1..terms} (2n+1) / (n^m (n+1)^m) Pn(cos t); the augmented
// (G + reg*I | constant) system is solved once and reused for every sample.
ingest::Recording interpolate_channels(const ingest::Recording& rec, const std::set<int>& bad,
                                       const PreprocessConfig& cfg);

struct PreprocessReport {
  std::set<int> flat_channels;          // detected, then interpolated
  std::set<int> interpolated_channels;  // flat plus channels already marked bad
};

// Fixed chain: highpass -> detect_flat -> suppress_bursts -> CAR -> interpolate.
std::pair<ingest::Recording, PreprocessReport> preprocess_chain(const ingest::Recording& rec,
                                                                const PreprocessConfig& cfg);

}  // namespace eegdec::preprocess
