#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eegdec/types.hpp"

namespace eegdec::ingest {

// Class-conditioned synthetic EEG-like data for end-to-end testing.
struct SynthSpec {
  int n_trials_per_class = 50;
  double fs = 500.0;
  double trial_length_s = 3.0;          // per-trial span; also the onset spacing (floored at 3 s)
  double snr = 5.0;                     // signature amplitude over unit noise SD
  double signature_s = 2.5;             // signature occupies [onset - signature_s, onset]
  std::uint64_t seed = 1;
  std::map<Label, std::vector<int>> class_channels;  // empty -> defaults

  void validate(int n_channels) const;  // throws ValidationError
};

// JSON round-trip for the CLI spec file. Unknown keys are rejected.
SynthSpec synth_spec_from_json_file(const std::string& path);

// Deterministic under seed: unit-SD Gaussian background per channel plus, per
// trial, a class-specific narrowband burst (distinct center frequency per
// class, random phase) of amplitude snr on that class's channels, covering
// [onset - signature_s, onset]. Markers come back sorted, >= 3 s apart,
// exactly n_trials_per_class per class.
std::pair<Recording, std::vector<EventMarker>> synthesize(const SynthSpec& spec);

}  // namespace eegdec::ingest
