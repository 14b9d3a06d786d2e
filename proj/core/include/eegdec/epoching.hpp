#pragma once

#include <cstdint>
#include <vector>

#include "eegdec/types.hpp"

namespace eegdec::epoching {

struct WindowSpec {
  double lag_ms = 0.0;
  double size_s = 1.5;

  void validate() const;
};

// Sweep defaults mirroring the report grid.
const std::vector<double>& default_lags_ms();   // {0, 250, 500, 750, 1000}
const std::vector<double>& default_sizes_s();   // {0.5, 1.0, 1.5, 2.0, 2.5}

struct Epoch {
  Matrix data;  // channels x window samples
  Label label = Label::Straight;
  WindowSpec spec;
  std::int64_t onset_sample = 0;
};

struct EpochSet {
  std::vector<Epoch> epochs;
  int skipped = 0;  // markers whose window underran the recording start
};

// One pre-onset window per marker: start = onset - round((lag + size) * fs),
// length round(size * fs), rounding to nearest with ties to even. Markers
// whose window starts before sample 0 are skipped and tallied.
EpochSet extract_epochs(const ingest::Recording& rec, const std::vector<ingest::EventMarker>& markers,
                        const WindowSpec& spec);

// Reporting label like "[-2.0, -0.5]" (seconds relative to onset, closed
// interval notation used for display only).
std::string window_label(const WindowSpec& spec);

}  // namespace eegdec::epoching
