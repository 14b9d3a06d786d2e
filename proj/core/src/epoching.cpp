#include "eegdec/epoching.hpp"

#include <cmath>
#include <cstdio>

namespace eegdec::epoching {

void WindowSpec::validate() const {
  if (!(lag_ms >= 0.0)) throw ValidationError("lag_ms must be >= 0");
  if (!(size_s > 0.0)) throw ValidationError("size_s must be positive");
}

const std::vector<double>& default_lags_ms() {
  static const std::vector<double> lags = {0.0, 250.0, 500.0, 750.0, 1000.0};
  return lags;
}

const std::vector<double>& default_sizes_s() {
  static const std::vector<double> sizes = {0.5, 1.0, 1.5, 2.0, 2.5};
  return sizes;
}

EpochSet extract_epochs(const ingest::Recording& rec,
                        const std::vector<ingest::EventMarker>& markers, const WindowSpec& spec) {
  spec.validate();
  // llrint under the default rounding mode gives nearest-ties-to-even.
  const auto length = static_cast<std::int64_t>(std::llrint(spec.size_s * rec.fs));
  const auto back = static_cast<std::int64_t>(
      std::llrint((spec.lag_ms / 1000.0 + spec.size_s) * rec.fs));
  if (length < 1) throw ValidationError("window size rounds to zero samples");

  EpochSet out;
  out.epochs.reserve(markers.size());
  for (const ingest::EventMarker& m : markers) {
    const std::int64_t start = m.onset_sample - back;
    if (start < 0) {
      ++out.skipped;
      continue;
    }
    Epoch e;
    e.data = rec.data.middleCols(start, length);
    e.label = m.label;
    e.spec = spec;
    e.onset_sample = m.onset_sample;
    out.epochs.push_back(std::move(e));
  }
  return out;
}

std::string window_label(const WindowSpec& spec) {
  const double lo = -(spec.lag_ms / 1000.0 + spec.size_s);
  const double hi = spec.lag_ms == 0.0 ? 0.0 : -spec.lag_ms / 1000.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "[%g, %g]", lo, hi);
  return buf;
}

}  // namespace eegdec::epoching
