#include "eegdec/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace eegdec::preprocess {
namespace {

constexpr int kFilterOrder = 4;

// Monic polynomial with the given roots, coefficients in descending powers.
std::array<double, kFilterOrder + 1> poly_from_roots(
    const std::array<std::complex<double>, kFilterOrder>& roots) {
  std::array<std::complex<double>, kFilterOrder + 1> c{};
  c[0] = 1.0;
  for (int k = 0; k < kFilterOrder; ++k) {
    for (int i = k + 1; i >= 1; --i) c[i] = c[i] - roots[k] * c[i - 1];
  }
  std::array<double, kFilterOrder + 1> out{};
  for (int i = 0; i <= kFilterOrder; ++i) out[i] = c[i].real();
  return out;
}

// One direct-form-II-transposed pass over x with initial state z.
void lfilter(const ButterworthHighpass& f, const std::vector<double>& x,
             std::array<double, kFilterOrder> z, std::vector<double>& y) {
  y.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = f.b[0] * xi + z[0];
    z[0] = f.b[1] * xi - f.a[1] * yi + z[1];
    z[1] = f.b[2] * xi - f.a[2] * yi + z[2];
    z[2] = f.b[3] * xi - f.a[3] * yi + z[3];
    z[3] = f.b[4] * xi - f.a[4] * yi;
    y[i] = yi;
  }
}

// Steady-state DF2T state for a constant unit input: with this initial state a
// constant signal produces its exact steady-state response from sample 0,
// which is what keeps edge transients out of the forward-backward pass.
std::array<double, kFilterOrder> steady_state_unit(const ButterworthHighpass& f) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  Eigen::Vector4d rhs;
  // Unknowns z0..z3 of the stationary update with y = b0 + z0:
  //   z_i = b_{i+1} - a_{i+1} * (b0 + z0) + z_{i+1}   (z4 = 0)
  for (int i = 0; i < kFilterOrder; ++i) {
    m(i, 0) += f.a[i + 1];
    m(i, i) += 1.0;
    if (i + 1 < kFilterOrder) m(i, i + 1) -= 1.0;
    rhs(i) = f.b[i + 1] - f.a[i + 1] * f.b[0];
  }
  const Eigen::Vector4d z = m.partialPivLu().solve(rhs);
  return {z(0), z(1), z(2), z(3)};
}

double median_of(std::vector<double>& scratch) {
  const std::size_t n = scratch.size();
  auto mid = scratch.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(scratch.begin(), mid, scratch.end());
  double m = *mid;
  if (n % 2 == 0) {
    auto lower = std::max_element(scratch.begin(), mid);
    m = 0.5 * (m + *lower);
  }
  return m;
}

// g(x) = sum_{n=1..terms} (2n+1) / (n (n+1))^m * Pn(x), Legendre by recurrence.
double spline_g(double x, int order_m, int terms) {
  x = std::clamp(x, -1.0, 1.0);
  double p_prev = 1.0;  // P0
  double p = x;         // P1
  double acc = 0.0;
  for (int n = 1; n <= terms; ++n) {
    if (n > 1) {
      const double p_next =
          ((2.0 * n - 1.0) * x * p - (n - 1.0) * p_prev) / static_cast<double>(n);
      p_prev = p;
      p = p_next;
    }
    const double denom = std::pow(static_cast<double>(n), order_m) *
                         std::pow(static_cast<double>(n) + 1.0, order_m);
    acc += (2.0 * n + 1.0) / denom * p;
  }
  return acc;
}

}  // namespace

void PreprocessConfig::validate() const {
  if (!(hp_cutoff_hz > 0.0)) throw ValidationError("hp_cutoff_hz must be positive");
  if (!(flat_seconds > 0.0)) throw ValidationError("flat_seconds must be positive");
  if (!(flat_eps >= 0.0)) throw ValidationError("flat_eps must be >= 0");
  if (!(burst_sd_threshold > 0.0)) throw ValidationError("burst_sd_threshold must be positive");
  if (!(burst_window_s > 0.0)) throw ValidationError("burst_window_s must be positive");
  if (spline_order_m < 2) throw ValidationError("spline_order_m must be >= 2");
  if (spline_terms < 1) throw ValidationError("spline_terms must be >= 1");
  if (!(spline_reg >= 0.0)) throw ValidationError("spline_reg must be >= 0");
}

ButterworthHighpass design_butterworth_highpass(double cutoff_hz, double fs) {
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  if (!(cutoff_hz > 0.0) || cutoff_hz >= fs / 2.0) {
    throw ValidationError("high-pass cutoff must lie in (0, fs/2)");
  }

  // Butterworth prototype poles, lowpass->highpass transform s -> warped/s,
  // then the bilinear map z = (2fs + s) / (2fs - s) with prewarped cutoff.
  const double warped = 2.0 * fs * std::tan(std::numbers::pi * cutoff_hz / fs);
  const double fs2 = 2.0 * fs;
  std::array<std::complex<double>, kFilterOrder> digital_poles;
  for (int k = 1; k <= kFilterOrder; ++k) {
    const double angle =
        std::numbers::pi * (2.0 * k + kFilterOrder - 1.0) / (2.0 * kFilterOrder);
    const std::complex<double> proto(std::cos(angle), std::sin(angle));
    const std::complex<double> analog = warped / proto;
    digital_poles[static_cast<std::size_t>(k - 1)] = (fs2 + analog) / (fs2 - analog);
  }

  ButterworthHighpass f;
  f.a = poly_from_roots(digital_poles);

  // All four zeros sit at z = 1; gain is fixed to 1 at Nyquist (z = -1).
  double a_at_m1 = 0.0;
  for (int i = 0; i <= kFilterOrder; ++i) {
    a_at_m1 += f.a[static_cast<std::size_t>(i)] * ((kFilterOrder - i) % 2 == 0 ? 1.0 : -1.0);
  }
  const double gain = a_at_m1 / 16.0;  // (z-1)^4 at z=-1 is 16
  f.b = {gain, -4.0 * gain, 6.0 * gain, -4.0 * gain, gain};
  return f;
}

std::vector<double> filtfilt(const ButterworthHighpass& f, const std::vector<double>& x) {
  const std::size_t pad = 3 * kFilterOrder;
  if (x.size() <= pad) {
    throw ValidationError("signal too short for zero-phase filtering (need > " +
                          std::to_string(pad) + " samples)");
  }
  const std::size_t n = x.size();

  // Odd reflection around both endpoints.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

  const std::array<double, kFilterOrder> zi = steady_state_unit(f);
  auto scaled = [&zi](double x0) {
    std::array<double, kFilterOrder> z = zi;
    for (double& v : z) v *= x0;
    return z;
  };

  std::vector<double> forward;
  lfilter(f, ext, scaled(ext.front()), forward);
  std::reverse(forward.begin(), forward.end());
  std::vector<double> backward;
  lfilter(f, forward, scaled(forward.front()), backward);
  std::reverse(backward.begin(), backward.end());

  return {backward.begin() + static_cast<std::ptrdiff_t>(pad),
          backward.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

ingest::Recording highpass(const ingest::Recording& rec, double cutoff_hz) {
  const ButterworthHighpass f = design_butterworth_highpass(cutoff_hz, rec.fs);
  ingest::Recording out = rec;
  std::vector<double> channel(static_cast<std::size_t>(rec.samples()));
  for (int c = 0; c < rec.channels(); ++c) {
    Eigen::Map<Vector>(channel.data(), rec.samples()) = rec.data.row(c);
    const std::vector<double> filtered = filtfilt(f, channel);
    out.data.row(c) = Eigen::Map<const Vector>(filtered.data(), rec.samples());
  }
  return out;
}

std::set<int> detect_flat_channels(const ingest::Recording& rec, double flat_seconds,
                                   double flat_eps) {
  if (!(flat_seconds * rec.fs >= 2.0)) {
    throw ValidationError("flat_seconds * fs must be >= 2 samples");
  }
  const double run_limit = flat_seconds * rec.fs;  // in samples
  std::set<int> flat;
  for (int c = 0; c < rec.channels(); ++c) {
    std::int64_t run_diffs = 0;   // consecutive |x[t+1]-x[t]| <= eps
    std::int64_t best_diffs = 0;
    for (std::int64_t t = 0; t + 1 < rec.samples(); ++t) {
      if (std::abs(rec.data(c, t + 1) - rec.data(c, t)) <= flat_eps) {
        best_diffs = std::max(best_diffs, ++run_diffs);
      } else {
        run_diffs = 0;
      }
    }
    // A run of d small diffs spans d+1 samples.
    if (best_diffs > 0 && static_cast<double>(best_diffs + 1) > run_limit) {
      flat.insert(c);
    }
  }
  return flat;
}

ingest::Recording suppress_bursts(const ingest::Recording& rec, const PreprocessConfig& cfg) {
  cfg.validate();
  const auto window = static_cast<std::int64_t>(std::llround(cfg.burst_window_s * rec.fs));
  if (window < 1 || rec.samples() <= 10 * window) {
    throw ValidationError("recording must be longer than 10 burst windows");
  }

  ingest::Recording out = rec;
  const std::int64_t n = rec.samples();
  std::vector<double> scratch(static_cast<std::size_t>(n));
  for (int c = 0; c < rec.channels(); ++c) {
    for (std::int64_t t = 0; t < n; ++t) scratch[static_cast<std::size_t>(t)] = rec.data(c, t);
    const double med = median_of(scratch);
    for (std::int64_t t = 0; t < n; ++t) {
      scratch[static_cast<std::size_t>(t)] = std::abs(rec.data(c, t) - med);
    }
    const double baseline_sd = 1.4826 * median_of(scratch);
    if (baseline_sd == 0.0) continue;  // degenerate channel: leave untouched

    const double cap = cfg.burst_sd_threshold * baseline_sd;
    for (std::int64_t start = 0; start < n; start += window) {
      const std::int64_t len = std::min(window, n - start);
      const double rms =
          std::sqrt(rec.data.row(c).segment(start, len).squaredNorm() / static_cast<double>(len));
      if (rms > cap) {
        out.data.row(c).segment(start, len) *= cap / rms;
      }
    }
  }
  return out;
}

ingest::Recording common_average_reference(const ingest::Recording& rec) {
  if (rec.channels() < 2) throw ValidationError("CAR needs at least 2 channels");
  std::vector<int> good;
  for (int c = 0; c < rec.channels(); ++c) {
    if (!rec.bad_channels.count(c)) good.push_back(c);
  }
  if (good.empty()) throw ValidationError("CAR impossible: all channels are bad");

  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(rec.samples());
  for (int g : good) mean += rec.data.row(g);
  mean /= static_cast<double>(good.size());

  ingest::Recording out = rec;
  out.data.rowwise() -= mean;
  return out;
}

ingest::Recording interpolate_channels(const ingest::Recording& rec, const std::set<int>& bad,
                                       const PreprocessConfig& cfg) {
  cfg.validate();
  for (int b : bad) {
    if (b < 0 || b >= rec.channels()) {
      throw ValidationError("interpolation channel index " + std::to_string(b) + " out of range");
    }
  }
  if (bad.empty()) return rec;

  std::vector<int> good;
  for (int c = 0; c < rec.channels(); ++c) {
    if (!bad.count(c)) good.push_back(c);
  }
  const int ng = static_cast<int>(good.size());
  if (ng < 4) {
    throw ValidationError("spherical interpolation needs at least 4 good channels, have " +
                          std::to_string(ng));
  }

  // Augmented system (G + reg*I | 1; 1^T | 0), factored once for all samples.
  Matrix a = Matrix::Zero(ng + 1, ng + 1);
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < ng; ++j) {
      const double ct = rec.electrode_pos[static_cast<std::size_t>(good[i])]
                            .dot(rec.electrode_pos[static_cast<std::size_t>(good[j])]);
      a(i, j) = spline_g(ct, cfg.spline_order_m, cfg.spline_terms);
    }
    a(i, i) += cfg.spline_reg;
    a(i, ng) = 1.0;
    a(ng, i) = 1.0;
  }

  const Eigen::FullPivLU<Matrix> lu(a);
  const double rcond = lu.rcond();
  if (!lu.isInvertible() || !(rcond > 1e-14)) {
    throw NumericError("spherical spline system is singular after regularization (rcond ~ " +
                       std::to_string(rcond) + ")");
  }

  Matrix rhs = Matrix::Zero(ng + 1, rec.samples());
  for (int i = 0; i < ng; ++i) rhs.row(i) = rec.data.row(good[i]);
  const Matrix coef = lu.solve(rhs);  // spline weights + constant term, per sample

  ingest::Recording out = rec;
  Eigen::RowVectorXd w(ng + 1);
  for (int b : bad) {
    for (int j = 0; j < ng; ++j) {
      const double ct = rec.electrode_pos[static_cast<std::size_t>(b)].dot(
          rec.electrode_pos[static_cast<std::size_t>(good[j])]);
      w(j) = spline_g(ct, cfg.spline_order_m, cfg.spline_terms);
    }
    w(ng) = 1.0;
    out.data.row(b) = w * coef;
    out.bad_channels.erase(b);
  }
  return out;
}

std::pair<ingest::Recording, PreprocessReport> preprocess_chain(const ingest::Recording& rec,
                                                                const PreprocessConfig& cfg) {
  cfg.validate();
  rec.validate();

  ingest::Recording stage = highpass(rec, cfg.hp_cutoff_hz);

  PreprocessReport report;
  report.flat_channels = detect_flat_channels(stage, cfg.flat_seconds, cfg.flat_eps);

  stage = suppress_bursts(stage, cfg);

  report.interpolated_channels = rec.bad_channels;
  report.interpolated_channels.insert(report.flat_channels.begin(), report.flat_channels.end());
  stage.bad_channels = report.interpolated_channels;

  stage = common_average_reference(stage);
  stage = interpolate_channels(stage, report.interpolated_channels, cfg);
  return {std::move(stage), std::move(report)};
}

}  // namespace eegdec::preprocess
