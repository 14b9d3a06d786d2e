#include "eegdec/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eegdec/montage.hpp"
#include "eegdec/rng.hpp"
#include "json.hpp"

namespace eegdec::ingest {
namespace {

// Distinct narrowband signatures; mobility/complexity separate these well.
double class_frequency_hz(Label label) {
  switch (label) {
    case Label::LeftTurn: return 9.0;
    case Label::RightTurn: return 13.0;
    case Label::Straight: return 6.0;
  }
  return 6.0;
}

std::map<Label, std::vector<int>> default_class_channels() {
  // left: C3, FC5, CP5, P3; right: C4, FC6, CP6, P4; straight: Fz, Cz, Pz.
  return {{Label::LeftTurn, {4, 23, 25, 6}},
          {Label::RightTurn, {5, 24, 26, 7}},
          {Label::Straight, {16, 17, 18}}};
}

}  // namespace

void SynthSpec::validate(int n_channels) const {
  if (n_trials_per_class < 1) throw ValidationError("n_trials_per_class must be >= 1");
  if (!(fs > 0.0)) throw ValidationError("fs must be positive");
  if (!(trial_length_s > 0.0)) throw ValidationError("trial_length_s must be positive");
  if (!(snr >= 0.0)) throw ValidationError("snr must be >= 0");
  if (!(signature_s > 0.0)) throw ValidationError("signature_s must be positive");
  if (signature_s > std::max(trial_length_s, 3.0)) {
    throw ValidationError("signature_s must not exceed the trial spacing max(trial_length_s, 3)");
  }
  for (const auto& [label, channels] : class_channels) {
    if (channels.empty()) {
      throw ValidationError("class_channels." + label_name(label) + " must not be empty");
    }
    for (int c : channels) {
      if (c < 0 || c >= n_channels) {
        throw ValidationError("class_channels." + label_name(label) + " index " +
                              std::to_string(c) + " out of range [0, " +
                              std::to_string(n_channels) + ")");
      }
    }
  }
}

SynthSpec synth_spec_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open synth spec " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("synth spec " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ValidationError("synth spec must be a JSON object");

  SynthSpec spec;
  for (const auto& [key, value] : doc.items()) {
    if (key == "n_trials_per_class") {
      spec.n_trials_per_class = value.get<int>();
    } else if (key == "fs") {
      spec.fs = value.get<double>();
    } else if (key == "trial_length_s") {
      spec.trial_length_s = value.get<double>();
    } else if (key == "snr") {
      spec.snr = value.get<double>();
    } else if (key == "signature_s") {
      spec.signature_s = value.get<double>();
    } else if (key == "seed") {
      spec.seed = value.get<std::uint64_t>();
    } else if (key == "class_channels") {
      if (!value.is_object()) throw ValidationError("class_channels must be an object");
      for (const auto& [cls, channels] : value.items()) {
        spec.class_channels[label_from_name(cls)] = channels.get<std::vector<int>>();
      }
    } else {
      throw ValidationError("unknown key \"" + key + "\" in synth spec");
    }
  }
  return spec;
}

std::pair<Recording, std::vector<EventMarker>> synthesize(const SynthSpec& spec) {
  const MontageTable& montage = standard_montage();
  const int channels = montage.size();
  spec.validate(channels);

  auto class_channels = spec.class_channels;
  if (class_channels.empty()) class_channels = default_class_channels();
  for (Label label : {Label::LeftTurn, Label::RightTurn, Label::Straight}) {
    if (!class_channels.count(label)) {
      throw ValidationError("class_channels missing entry for " + label_name(label));
    }
  }

  const double spacing_s = std::max(spec.trial_length_s, 3.0);
  const auto spacing = static_cast<std::int64_t>(std::llround(spacing_s * spec.fs));
  const std::int64_t n_total = 3LL * spec.n_trials_per_class;
  const std::int64_t n_samples = spacing * (n_total + 1);

  util::Rng rng(spec.seed);

  Recording rec;
  rec.fs = spec.fs;
  rec.channel_names = montage.names;
  rec.electrode_pos = montage.positions;
  rec.data.resize(channels, n_samples);
  for (std::int64_t t = 0; t < n_samples; ++t) {
    for (int c = 0; c < channels; ++c) rec.data(c, t) = rng.normal();
  }

  std::vector<Label> sequence;
  sequence.reserve(static_cast<std::size_t>(n_total));
  for (Label label : {Label::LeftTurn, Label::RightTurn, Label::Straight}) {
    sequence.insert(sequence.end(), static_cast<std::size_t>(spec.n_trials_per_class), label);
  }
  rng.shuffle(sequence);

  const auto sig_len = static_cast<std::int64_t>(std::llround(spec.signature_s * spec.fs));
  std::vector<EventMarker> markers;
  markers.reserve(sequence.size());
  for (std::int64_t i = 0; i < n_total; ++i) {
    const Label label = sequence[static_cast<std::size_t>(i)];
    const std::int64_t onset = spacing * (i + 1);
    markers.push_back({onset, label});

    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    const double omega = 2.0 * std::numbers::pi * class_frequency_hz(label) / spec.fs;
    const std::int64_t start = onset - sig_len;
    for (int c : class_channels.at(label)) {
      for (std::int64_t t = start; t < onset; ++t) {
        rec.data(c, t) += spec.snr * std::sin(omega * static_cast<double>(t - start) + phase);
      }
    }
  }
  return {std::move(rec), std::move(markers)};
}

}  // namespace eegdec::ingest
