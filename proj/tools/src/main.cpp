#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eegdec/config.hpp"
#include "eegdec/epoching.hpp"
#include "eegdec/eval.hpp"
#include "eegdec/features.hpp"
#include "eegdec/io.hpp"
#include "eegdec/montage.hpp"
#include "eegdec/parallel.hpp"
#include "eegdec/preprocess.hpp"
#include "eegdec/synth.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using namespace eegdec;

constexpr int kExitValidation = 2;
constexpr int kExitInsufficientData = 3;
constexpr int kExitNumeric = 4;

struct CommonInput {
  std::string recording_path;
  std::string markers_path;
  std::string montage_path;
  std::string config_path;
  double fs = 500.0;
  bool strict = false;
};

void add_input_options(CLI::App* cmd, CommonInput& in, bool markers_required) {
  cmd->add_option("--recording", in.recording_path, "Recording CSV (header = channel names)")
      ->required();
  auto* markers =
      cmd->add_option("--markers", in.markers_path, "Event markers JSON (onset_sample, label)");
  if (markers_required) markers->required();
  cmd->add_option("--montage", in.montage_path,
                  "Electrode montage CSV name,x,y,z (default: built-in 31-channel cap)");
  cmd->add_option("--fs", in.fs, "Sampling rate of the recording in Hz")
      ->capture_default_str();
  cmd->add_option("--config", in.config_path, "Pipeline config JSON (defaults when omitted)");
  cmd->add_flag("--strict", in.strict,
                "Fail (exit 3) instead of continuing when data is insufficient");
}

ingest::MontageTable resolve_montage(const std::string& path) {
  if (path.empty()) return ingest::standard_montage();
  return ingest::load_montage_csv(path);
}

cli::PipelineConfig resolve_config(const std::string& path) {
  if (path.empty()) return cli::default_pipeline_config();
  return cli::load_pipeline_config(
      path, [](const std::string& line) { std::cerr << line << "\n"; });
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ValidationError("cannot create output directory " + out + ": " + ec.message());
}

std::string join_path(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw ValidationError("failed writing " + path);
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> snr;
  std::optional<double> fs;
  std::optional<double> trial_length_s;
  std::optional<double> signature_s;
};

int run_synth(const SynthArgs& args) {
  ingest::SynthSpec spec;
  if (!args.spec_path.empty()) spec = ingest::synth_spec_from_json_file(args.spec_path);
  if (args.seed) spec.seed = *args.seed;
  if (args.trials) spec.n_trials_per_class = *args.trials;
  if (args.snr) spec.snr = *args.snr;
  if (args.fs) spec.fs = *args.fs;
  if (args.trial_length_s) spec.trial_length_s = *args.trial_length_s;
  if (args.signature_s) spec.signature_s = *args.signature_s;

  // Synthesis is pinned to the built-in cap; a copy ships with the outputs so
  // downstream commands can take it via --montage.
  const ingest::MontageTable& montage = ingest::standard_montage();
  spec.validate(montage.size());

  auto [rec, markers] = ingest::synthesize(spec);
  rec.validate();

  ensure_out_dir(args.out);
  ingest::write_recording(rec, join_path(args.out, "recording.csv"));
  ingest::write_markers(markers, join_path(args.out, "markers.json"));
  ingest::write_montage_csv(montage, join_path(args.out, "montage.csv"));
  std::cerr << "synth: " << rec.channels() << " channels, " << rec.samples() << " samples at "
            << spec.fs << " Hz, " << markers.size() << " markers -> " << args.out << "\n";
  return 0;
}

// ---- preprocess -----------------------------------------------------------

nlohmann::json channel_list(const std::set<int>& idx, const std::vector<std::string>& names) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i : idx) arr.push_back(names[static_cast<std::size_t>(i)]);
  return arr;
}

int run_preprocess(const CommonInput& in, const std::string& out) {
  const ingest::MontageTable montage = resolve_montage(in.montage_path);
  const cli::PipelineConfig cfg = resolve_config(in.config_path);
  const ingest::Recording rec = ingest::read_recording(in.recording_path, in.fs, montage);

  auto [clean, report] = preprocess::preprocess_chain(rec, cfg.preprocess);

  ensure_out_dir(out);
  ingest::write_recording(clean, join_path(out, "preprocessed.csv"));
  nlohmann::json j;
  j["flat_channels"] = channel_list(report.flat_channels, rec.channel_names);
  j["flat_indices"] = report.flat_channels;
  j["interpolated_channels"] = channel_list(report.interpolated_channels, rec.channel_names);
  j["interpolated_indices"] = report.interpolated_channels;
  write_text(join_path(out, "preprocess_report.json"), j.dump(2) + "\n");

  std::cerr << "preprocess: " << report.flat_channels.size() << " flat, "
            << report.interpolated_channels.size() << " interpolated -> " << out << "\n";
  if (in.strict && !report.interpolated_channels.empty() &&
      static_cast<int>(report.interpolated_channels.size()) * 2 >= rec.channels()) {
    throw InsufficientDataError("more than half the channels needed interpolation");
  }
  return 0;
}

// ---- features -------------------------------------------------------------

int run_features(const CommonInput& in, const std::string& out, double lag_ms, double size_s) {
  const ingest::MontageTable montage = resolve_montage(in.montage_path);
  const cli::PipelineConfig cfg = resolve_config(in.config_path);
  const ingest::Recording rec = ingest::read_recording(in.recording_path, in.fs, montage);
  const std::vector<ingest::EventMarker> markers = ingest::read_markers(in.markers_path, rec);

  auto [clean, report] = preprocess::preprocess_chain(rec, cfg.preprocess);
  const epoching::WindowSpec spec{lag_ms, size_s};
  spec.validate();
  const epoching::EpochSet epochs = extract_epochs(clean, markers, spec);
  if (epochs.skipped > 0) {
    std::cerr << "features: skipped " << epochs.skipped
              << " markers whose window underruns the recording\n";
    if (in.strict) {
      throw InsufficientDataError(std::to_string(epochs.skipped) +
                                  " markers lack a full pre-onset window");
    }
  }
  if (epochs.epochs.empty()) {
    throw InsufficientDataError("no markers left a usable window");
  }

  const features::FeatureMatrix fm = features::featurize(epochs.epochs, clean.channel_names);
  ensure_out_dir(out);
  features::write_features_csv(fm, join_path(out, "features.csv"));
  std::cerr << "features: " << fm.trials() << " trials x " << fm.dim() << " features (window "
            << epoching::window_label(spec) << ") -> " << out << "\n";
  return 0;
}

// ---- sweep ----------------------------------------------------------------

// "lag_ms=250,size_s=1.5,clf=svm" (clf optional; omitting it keeps both).
void apply_cell(const std::string& cell, eval::SweepRequest& request) {
  std::vector<std::string> parts;
  std::string token;
  for (char c : cell) {
    if (c == ',') {
      parts.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }
  parts.push_back(token);

  for (const std::string& part : parts) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--cell expects key=value pairs, got '" + part + "'");
    }
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    try {
      if (key == "lag_ms") {
        request.lags_ms = {std::stod(value)};
      } else if (key == "size_s") {
        request.sizes_s = {std::stod(value)};
      } else if (key == "clf") {
        request.classifiers = {learn::classifier_from_name(value)};
      } else {
        throw ValidationError("--cell key must be lag_ms, size_s or clf, got '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ValidationError("--cell " + key + " needs a numeric value, got '" + value + "'");
    }
  }
}

int run_sweep_cmd(const CommonInput& in, const std::string& out,
                  std::optional<std::uint64_t> seed_override, int threads,
                  const std::string& cell) {
  const ingest::MontageTable montage = resolve_montage(in.montage_path);
  cli::PipelineConfig cfg = resolve_config(in.config_path);
  if (seed_override) cfg.cv.seed = *seed_override;

  const ingest::Recording rec = ingest::read_recording(in.recording_path, in.fs, montage);
  const std::vector<ingest::EventMarker> markers = ingest::read_markers(in.markers_path, rec);
  auto [clean, report] = preprocess::preprocess_chain(rec, cfg.preprocess);

  eval::SweepRequest request;
  request.lags_ms = cfg.lags_ms;
  request.sizes_s = cfg.sizes_s;
  request.threads = threads >= 1 ? threads : util::default_threads();
  if (!cell.empty()) apply_cell(cell, request);

  const eval::CvReport cv_report = eval::run_sweep(clean, markers, request, cfg.learners, cfg.cv);

  ensure_out_dir(out);
  eval::write_report_csv(cv_report, join_path(out, "report.csv"));
  eval::write_report_table(cv_report, join_path(out, "table.txt"));
  std::cout << eval::report_table(cv_report);

  int skipped_cells = 0;
  for (const eval::CellResult& c : cv_report.cells) skipped_cells += c.skipped ? 1 : 0;
  if (skipped_cells > 0) {
    std::cerr << "sweep: " << skipped_cells << " cells skipped (insufficient trials)\n";
    if (in.strict) {
      throw InsufficientDataError(std::to_string(skipped_cells) +
                                  " sweep cells lack enough trials per class");
    }
  }
  std::cerr << "sweep: wrote " << join_path(out, "report.csv") << " and "
            << join_path(out, "table.txt") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pre-onset EEG turn-intention decoding pipeline"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  std::uint64_t synth_seed = 0;
  int synth_trials = 0;
  double synth_snr = 0.0;
  double synth_fs = 0.0;
  double synth_len = 0.0;
  double synth_sig = 0.0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled recording");
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_option("--spec", synth_args.spec_path, "Synthesis spec JSON");
  synth->add_option("--seed", synth_seed, "Override spec seed");
  synth->add_option("--trials", synth_trials, "Override trials per class");
  synth->add_option("--snr", synth_snr, "Override signature amplitude over unit noise");
  synth->add_option("--fs", synth_fs, "Override sampling rate (Hz)");
  synth->add_option("--trial-length-s", synth_len, "Override per-trial span (s)");
  synth->add_option("--signature-s", synth_sig, "Override signature length (s)");

  CommonInput pre_in;
  std::string pre_out;
  auto* pre = app.add_subcommand("preprocess", "Clean a recording and report channel repairs");
  add_input_options(pre, pre_in, false);
  pre->add_option("--out", pre_out, "Output directory")->required();

  CommonInput feat_in;
  std::string feat_out;
  double feat_lag = 0.0;
  double feat_size = 1.5;
  auto* feat = app.add_subcommand("features", "Extract per-trial pre-onset window features");
  add_input_options(feat, feat_in, true);
  feat->add_option("--out", feat_out, "Output directory")->required();
  feat->add_option("--lag-ms", feat_lag, "Window lag before onset (ms)")->capture_default_str();
  feat->add_option("--size-s", feat_size, "Window length (s)")->capture_default_str();

  CommonInput sweep_in;
  std::string sweep_out;
  std::uint64_t sweep_seed = 0;
  int sweep_threads = 0;
  std::string sweep_cell;
  auto* sweep = app.add_subcommand("sweep", "Cross-validated lag x size x classifier grid");
  add_input_options(sweep, sweep_in, true);
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--seed", sweep_seed, "Override eval.seed from the config");
  sweep->add_option("--threads", sweep_threads, "Worker threads (default: hardware)");
  sweep->add_option("--cell", sweep_cell, "Restrict to one cell: lag_ms=..,size_s=..[,clf=..]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (synth->parsed()) {
      if (synth->count("--seed") > 0) synth_args.seed = synth_seed;
      if (synth->count("--trials") > 0) synth_args.trials = synth_trials;
      if (synth->count("--snr") > 0) synth_args.snr = synth_snr;
      if (synth->count("--fs") > 0) synth_args.fs = synth_fs;
      if (synth->count("--trial-length-s") > 0) synth_args.trial_length_s = synth_len;
      if (synth->count("--signature-s") > 0) synth_args.signature_s = synth_sig;
      return run_synth(synth_args);
    }
    if (pre->parsed()) return run_preprocess(pre_in, pre_out);
    if (feat->parsed()) return run_features(feat_in, feat_out, feat_lag, feat_size);
    if (sweep->parsed()) {
      std::optional<std::uint64_t> seed;
      if (sweep->count("--seed") > 0) seed = sweep_seed;
      return run_sweep_cmd(sweep_in, sweep_out, seed, sweep_threads, sweep_cell);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInsufficientData;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
