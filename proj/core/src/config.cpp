#include "eegdec/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "eegdec/epoching.hpp"
#include "json.hpp"

namespace eegdec::cli {
namespace {

using nlohmann::json;
using Note = std::function<void(const std::string&)>;

void tell(const Note& note, const std::string& line) {
  if (note) note(line);
}

std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string show(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += show(v[i]);
  }
  return out + "]";
}

// Removes and returns a key; null when absent. Whatever remains in the object
// after all known keys are taken is by definition unknown and rejected.
json take(json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return json();
  json v = *it;
  obj.erase(it);
  return v;
}

void reject_leftovers(const json& obj, const std::string& prefix) {
  if (obj.empty()) return;
  throw ValidationError("config: unknown key '" + prefix + obj.begin().key() + "'");
}

json take_object(json& obj, const char* key, const std::string& prefix, const Note& note) {
  json v = take(obj, key);
  if (v.is_null()) {
    tell(note, "config: " + prefix + key + " not set, using defaults");
    return json::object();
  }
  if (!v.is_object()) throw ValidationError("config: " + prefix + key + " must be an object");
  return v;
}

double take_number(json& obj, const char* key, double def, const std::string& prefix,
                   const Note& note) {
  json v = take(obj, key);
  if (v.is_null()) {
    tell(note, "config: " + prefix + key + " not set, using " + show(def));
    return def;
  }
  if (!v.is_number()) throw ValidationError("config: " + prefix + key + " must be a number");
  return v.get<double>();
}

int take_int(json& obj, const char* key, int def, const std::string& prefix, const Note& note) {
  json v = take(obj, key);
  if (v.is_null()) {
    tell(note, "config: " + prefix + key + " not set, using " + std::to_string(def));
    return def;
  }
  if (!v.is_number_integer()) {
    throw ValidationError("config: " + prefix + key + " must be an integer");
  }
  return v.get<int>();
}

std::int64_t take_int64(json& obj, const char* key, std::int64_t def, const std::string& prefix,
                        const Note& note) {
  json v = take(obj, key);
  if (v.is_null()) {
    tell(note, "config: " + prefix + key + " not set, using " + std::to_string(def));
    return def;
  }
  if (!v.is_number_integer()) {
    throw ValidationError("config: " + prefix + key + " must be an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t take_seed(json& obj, const char* key, std::uint64_t def, const std::string& prefix,
                        const Note& note) {
  json v = take(obj, key);
  if (v.is_null()) {
    tell(note, "config: " + prefix + key + " not set, using " + std::to_string(def));
    return def;
  }
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                 !v.is_number_unsigned())) {
    throw ValidationError("config: " + prefix + key + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> take_number_list(json& obj, const char* key, const std::vector<double>& def,
                                     const std::string& prefix, const Note& note) {
  json v = take(obj, key);
  if (v.is_null()) {
    tell(note, "config: " + prefix + key + " not set, using " + show(def));
    return def;
  }
  if (!v.is_array()) throw ValidationError("config: " + prefix + key + " must be an array");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) {
      throw ValidationError("config: " + prefix + key + " must contain only numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (version != 1) throw ValidationError("config: version must be 1");
  preprocess.validate();
  if (lags_ms.empty()) throw ValidationError("config: windows.lags_ms must not be empty");
  if (sizes_s.empty()) throw ValidationError("config: windows.sizes_s must not be empty");
  for (double lag : lags_ms) {
    for (double size : sizes_s) {
      epoching::WindowSpec{lag, size}.validate();
    }
  }
  learners.svm.validate();
  learners.gbt.validate();
  if (learners.forest.n_trees < 1) throw ValidationError("config: forest.n_trees must be >= 1");
  if (learners.forest.max_depth < 0) throw ValidationError("config: forest.max_depth must be >= 0");
  if (learners.forest.features_per_split < 0) {
    throw ValidationError("config: forest.features_per_split must be >= 0");
  }
  if (learners.forest.min_samples_leaf < 1) {
    throw ValidationError("config: forest.min_samples_leaf must be >= 1");
  }
  cv.validate();
}

PipelineConfig default_pipeline_config() {
  PipelineConfig cfg;
  cfg.lags_ms = epoching::default_lags_ms();
  cfg.sizes_s = epoching::default_sizes_s();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path,
                                    const std::function<void(const std::string&)>& note) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (!root.is_object()) throw ValidationError(path + ": top level must be an object");

  const PipelineConfig defaults = default_pipeline_config();
  PipelineConfig cfg;
  cfg.version = take_int(root, "version", 1, "", note);

  {
    json p = take_object(root, "preprocess", "", note);
    auto& d = cfg.preprocess;
    const auto& d0 = defaults.preprocess;
    d.hp_cutoff_hz = take_number(p, "hp_cutoff_hz", d0.hp_cutoff_hz, "preprocess.", note);
    d.flat_seconds = take_number(p, "flat_seconds", d0.flat_seconds, "preprocess.", note);
    d.flat_eps = take_number(p, "flat_eps", d0.flat_eps, "preprocess.", note);
    d.burst_sd_threshold =
        take_number(p, "burst_sd_threshold", d0.burst_sd_threshold, "preprocess.", note);
    d.burst_window_s = take_number(p, "burst_window_s", d0.burst_window_s, "preprocess.", note);
    d.spline_order_m = take_int(p, "spline_order_m", d0.spline_order_m, "preprocess.", note);
    d.spline_terms = take_int(p, "spline_terms", d0.spline_terms, "preprocess.", note);
    d.spline_reg = take_number(p, "spline_reg", d0.spline_reg, "preprocess.", note);
    reject_leftovers(p, "preprocess.");
  }
  {
    json w = take_object(root, "windows", "", note);
    cfg.lags_ms = take_number_list(w, "lags_ms", defaults.lags_ms, "windows.", note);
    cfg.sizes_s = take_number_list(w, "sizes_s", defaults.sizes_s, "windows.", note);
    reject_leftovers(w, "windows.");
  }
  {
    json f = take_object(root, "forest", "", note);
    auto& d = cfg.learners.forest;
    const auto& d0 = defaults.learners.forest;
    d.n_trees = take_int(f, "n_trees", d0.n_trees, "forest.", note);
    d.max_depth = take_int(f, "max_depth", d0.max_depth, "forest.", note);
    d.features_per_split =
        take_int(f, "features_per_split", d0.features_per_split, "forest.", note);
    d.min_samples_leaf = take_int(f, "min_samples_leaf", d0.min_samples_leaf, "forest.", note);
    reject_leftovers(f, "forest.");
  }
  {
    json s = take_object(root, "svm", "", note);
    auto& d = cfg.learners.svm;
    const auto& d0 = defaults.learners.svm;
    d.c = take_number(s, "c", d0.c, "svm.", note);
    json gamma = take(s, "gamma");
    if (gamma.is_null()) {
      tell(note, "config: svm.gamma not set, using \"scale\"");
      d.gamma = 0.0;
    } else if (gamma.is_string() && gamma.get<std::string>() == "scale") {
      d.gamma = 0.0;
    } else if (gamma.is_number() && gamma.get<double>() > 0.0) {
      d.gamma = gamma.get<double>();
    } else {
      throw ValidationError("config: svm.gamma must be a positive number or \"scale\"");
    }
    d.tol = take_number(s, "tol", d0.tol, "svm.", note);
    d.max_passes = take_int64(s, "max_passes", d0.max_passes, "svm.", note);
    reject_leftovers(s, "svm.");
  }
  {
    json g = take_object(root, "gbt", "", note);
    auto& d = cfg.learners.gbt;
    const auto& d0 = defaults.learners.gbt;
    d.n_rounds = take_int(g, "n_rounds", d0.n_rounds, "gbt.", note);
    d.learning_rate = take_number(g, "learning_rate", d0.learning_rate, "gbt.", note);
    d.max_depth = take_int(g, "max_depth", d0.max_depth, "gbt.", note);
    d.min_samples_leaf = take_int(g, "min_samples_leaf", d0.min_samples_leaf, "gbt.", note);
    reject_leftovers(g, "gbt.");
  }
  {
    json e = take_object(root, "eval", "", note);
    auto& d = cfg.cv;
    const auto& d0 = defaults.cv;
    d.k = take_int(e, "k", d0.k, "eval.", note);
    d.seed = take_seed(e, "seed", d0.seed, "eval.", note);
    json scope = take(e, "selection_scope");
    if (scope.is_null()) {
      tell(note, "config: eval.selection_scope not set, using \"per_fold\"");
      d.selection_scope = eval::SelectionScope::PerFold;
    } else if (scope.is_string() && scope.get<std::string>() == "per_fold") {
      d.selection_scope = eval::SelectionScope::PerFold;
    } else if (scope.is_string() && scope.get<std::string>() == "global") {
      d.selection_scope = eval::SelectionScope::Global;
    } else {
      throw ValidationError("config: eval.selection_scope must be \"per_fold\" or \"global\"");
    }
    d.n_selected_features =
        take_int(e, "n_selected_features", d0.n_selected_features, "eval.", note);
    reject_leftovers(e, "eval.");
  }
  reject_leftovers(root, "");

  cfg.validate();
  return cfg;
}

}  // namespace eegdec::cli
