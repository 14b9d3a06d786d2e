#pragma once

#include <string>
#include <vector>

#include "eegdec/montage.hpp"
#include "eegdec/types.hpp"

namespace eegdec::ingest {

// CSV with a header row of channel names and one sample per row. Cell values
// must be finite reals; errors report row and column. Channel names must all
// exist in the montage (positions are looked up from it).
Recording read_recording(const std::string& path, double fs, const MontageTable& montage);

// Writes the transposed (samples-as-rows) CSV with 9 significant digits.
void write_recording(const Recording& rec, const std::string& path);

// JSON array of {"onset_sample": int, "label": "left"|"right"|"straight"}.
// Output is sorted by onset; onsets must lie in [0, T).
std::vector<EventMarker> read_markers(const std::string& path, const Recording& rec);

void write_markers(const std::vector<EventMarker>& markers, const std::string& path);

}  // namespace eegdec::ingest
