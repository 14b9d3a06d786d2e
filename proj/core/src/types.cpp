#include "eegdec/types.hpp"

#include <array>
#include <cmath>

namespace eegdec {

const std::string& label_name(Label label) {
  static const std::array<std::string, kNumClasses> names = {"left", "right", "straight"};
  return names[static_cast<int>(label)];
}

Label label_from_name(const std::string& name) {
  if (name == "left") return Label::LeftTurn;
  if (name == "right") return Label::RightTurn;
  if (name == "straight") return Label::Straight;
  throw ValidationError("unknown label \"" + name + "\" (expected left, right, or straight)");
}

namespace ingest {

void Recording::validate() const {
  if (data.rows() < 1 || data.cols() < 1) {
    throw ValidationError("recording must have at least 1 channel and 1 sample");
  }
  if (!(fs > 0.0)) {
    throw ValidationError("sampling rate must be positive");
  }
  const auto c = static_cast<std::size_t>(data.rows());
  if (channel_names.size() != c) {
    throw ValidationError("channel name count does not match data rows");
  }
  if (electrode_pos.size() != c) {
    throw ValidationError("electrode position count does not match data rows");
  }
  for (std::size_t i = 0; i < c; ++i) {
    if (std::abs(electrode_pos[i].norm() - 1.0) > 1e-6) {
      throw ValidationError("electrode position for " + channel_names[i] +
                            " is not on the unit sphere");
    }
  }
  for (int b : bad_channels) {
    if (b < 0 || b >= channels()) {
      throw ValidationError("bad channel index " + std::to_string(b) + " out of range");
    }
  }
}

}  // namespace ingest
}  // namespace eegdec
