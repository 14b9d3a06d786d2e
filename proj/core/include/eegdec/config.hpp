#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eegdec/eval.hpp"
#include "eegdec/model.hpp"
#include "eegdec/preprocess.hpp"

namespace eegdec::cli {

// The whole pipeline configuration, serialized as one JSON document.
struct PipelineConfig {
  int version = 1;
  preprocess::PreprocessConfig preprocess;
  std::vector<double> lags_ms;   // windows.lags_ms
  std::vector<double> sizes_s;   // windows.sizes_s
  eval::LearnerParams learners;  // forest, svm, gbt
  eval::CvConfig cv;             // eval.k / seed / selection_scope / n_selected_features

  void validate() const;
};

PipelineConfig default_pipeline_config();

// Strict parse: version must be 1, unknown keys anywhere are a ValidationError
// naming the key. Absent keys fall back to defaults; each fallback is reported
// through note (one line per key) so runs are auditable.
PipelineConfig load_pipeline_config(const std::string& path,
                                    const std::function<void(const std::string&)>& note = {});

}  // namespace eegdec::cli
