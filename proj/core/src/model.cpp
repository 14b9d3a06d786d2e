#include "eegdec/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "model_detail.hpp"

namespace eegdec::learn {
namespace {

using nlohmann::json;

std::vector<int> resolve_selected(std::vector<int> selected, int d) {
  if (selected.empty()) {
    selected.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) selected[static_cast<std::size_t>(j)] = j;
    return selected;
  }
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i] < 0 || selected[i] >= d) {
      throw ValidationError("selected feature index out of range");
    }
    if (i > 0 && selected[i] <= selected[i - 1]) {
      throw ValidationError("selected feature indices must be strictly ascending");
    }
  }
  return selected;
}

Matrix gather_columns(const Matrix& x, const std::vector<int>& selected) {
  Matrix out(x.rows(), static_cast<std::int64_t>(selected.size()));
  for (std::size_t j = 0; j < selected.size(); ++j) {
    out.col(static_cast<std::int64_t>(j)) = x.col(selected[j]);
  }
  return out;
}

// Fits per-column z-score parameters on x and applies them in place.
Standardizer fit_standardizer(Matrix& x) {
  const auto n = static_cast<double>(x.rows());
  Standardizer s;
  s.mean.resize(static_cast<std::size_t>(x.cols()));
  s.sd.resize(static_cast<std::size_t>(x.cols()));
  for (std::int64_t j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double var = (x.col(j).array() - mean).square().sum() / n;
    double sd = std::sqrt(var);
    if (sd < 1e-12 * std::max(1.0, std::abs(mean))) sd = 1.0;  // constant column
    s.mean[static_cast<std::size_t>(j)] = mean;
    s.sd[static_cast<std::size_t>(j)] = sd;
    x.col(j) = (x.col(j).array() - mean) / sd;
  }
  return s;
}

Matrix apply_standardizer(const Standardizer& s, Matrix x) {
  if (static_cast<std::size_t>(x.cols()) != s.mean.size()) {
    throw ValidationError("standardizer dimension mismatch");
  }
  for (std::int64_t j = 0; j < x.cols(); ++j) {
    x.col(j) = (x.col(j).array() - s.mean[static_cast<std::size_t>(j)]) /
               s.sd[static_cast<std::size_t>(j)];
  }
  return x;
}

int checked_n_classes(const Matrix& x, const std::vector<int>& y) {
  if (x.rows() < 2) throw ValidationError("need >= 2 training rows");
  if (static_cast<std::int64_t>(y.size()) != x.rows()) {
    throw ValidationError("label count does not match row count");
  }
  if (!x.allFinite()) throw ValidationError("non-finite feature value");
  int n_classes = 0;
  for (int label : y) {
    if (label < 0) throw ValidationError("negative label");
    n_classes = std::max(n_classes, label + 1);
  }
  std::vector<int> seen(static_cast<std::size_t>(n_classes), 0);
  for (int label : y) seen[static_cast<std::size_t>(label)] = 1;
  int present = 0;
  for (int s : seen) present += s;
  if (present < 2) throw ValidationError("need >= 2 classes present");
  return n_classes;
}

// Pooled-variance rule when cfg.gamma is not positive: 1 / (d * Var(X)),
// variance over every entry of the standardized training block.
double resolve_gamma(const SvmConfig& cfg, const Matrix& x_std) {
  if (cfg.gamma > 0.0) return cfg.gamma;
  const auto total = static_cast<double>(x_std.size());
  const double mean = x_std.mean();
  const double var = (x_std.array() - mean).square().sum() / total;
  const auto d = static_cast<double>(x_std.cols());
  if (var <= 0.0) return 1.0 / d;
  return 1.0 / (d * var);
}

json tree_to_json(const GbtTree& tree) {
  json nodes = json::array();
  for (const GbtTreeNode& n : tree.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"value", n.value}});
  }
  return {{"nodes", std::move(nodes)}};
}

GbtTree tree_from_json(const json& j) {
  GbtTree tree;
  for (const json& n : j.at("nodes")) {
    GbtTreeNode node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.value = n.at("value").get<double>();
    tree.nodes.push_back(node);
  }
  if (tree.nodes.empty()) throw ValidationError("model file: empty tree");
  return tree;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::int64_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::int64_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::int64_t cols_hint) {
  const auto rows = static_cast<std::int64_t>(j.size());
  std::int64_t cols = cols_hint;
  if (rows > 0) cols = static_cast<std::int64_t>(j.at(0).size());
  Matrix m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<std::int64_t>(row.size()) != cols) {
      throw ValidationError("model file: ragged matrix");
    }
    for (std::int64_t c = 0; c < cols; ++c) {
      m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

}  // namespace

void SvmConfig::validate() const {
  if (!(c > 0.0)) throw ValidationError("svm c must be > 0");
  if (!(tol > 0.0)) throw ValidationError("svm tol must be > 0");
  if (max_passes < 1) throw ValidationError("svm max_passes must be >= 1");
}

void GbtConfig::validate() const {
  if (n_rounds < 1) throw ValidationError("gbt n_rounds must be >= 1");
  if (learning_rate < 0.0) throw ValidationError("gbt learning_rate must be >= 0");
  if (max_depth < 1) throw ValidationError("gbt max_depth must be >= 1");
  if (min_samples_leaf < 1) throw ValidationError("gbt min_samples_leaf must be >= 1");
}

void Standardizer::apply(Vector& row_selected) const {
  if (static_cast<std::size_t>(row_selected.size()) != mean.size()) {
    throw ValidationError("standardizer dimension mismatch");
  }
  for (std::int64_t j = 0; j < row_selected.size(); ++j) {
    row_selected(j) = (row_selected(j) - mean[static_cast<std::size_t>(j)]) /
                      sd[static_cast<std::size_t>(j)];
  }
}

const std::string& classifier_name(ClassifierKind kind) {
  static const std::string svm = "svm";
  static const std::string gbt = "gbt";
  return kind == ClassifierKind::Svm ? svm : gbt;
}

ClassifierKind classifier_from_name(const std::string& name) {
  if (name == "svm") return ClassifierKind::Svm;
  if (name == "gbt") return ClassifierKind::Gbt;
  throw ValidationError("unknown classifier '" + name + "' (expected svm or gbt)");
}

TrainedModel fit_svm(const Matrix& X, const std::vector<int>& y, const SvmConfig& cfg,
                     std::vector<int> selected) {
  cfg.validate();
  const int n_classes = checked_n_classes(X, y);
  TrainedModel model;
  model.kind = ClassifierKind::Svm;
  model.input_dim = static_cast<int>(X.cols());
  model.n_classes = n_classes;
  model.selected_features = resolve_selected(std::move(selected), model.input_dim);

  Matrix x_sel = gather_columns(X, model.selected_features);
  model.standardizer = fit_standardizer(x_sel);
  const double gamma = resolve_gamma(cfg, x_sel);
  model.learner = detail::train_svm_ovo(x_sel, y, n_classes, cfg, gamma);
  return model;
}

TrainedModel fit_gbt(const Matrix& X, const std::vector<int>& y, const GbtConfig& cfg,
                     std::vector<int> selected) {
  cfg.validate();
  const int n_classes = checked_n_classes(X, y);
  TrainedModel model;
  model.kind = ClassifierKind::Gbt;
  model.input_dim = static_cast<int>(X.cols());
  model.n_classes = n_classes;
  model.selected_features = resolve_selected(std::move(selected), model.input_dim);

  Matrix x_sel = gather_columns(X, model.selected_features);
  model.standardizer = fit_standardizer(x_sel);
  model.learner = detail::train_gbt(x_sel, y, n_classes, cfg);
  return model;
}

Prediction predict(const TrainedModel& model, const Matrix& X) {
  if (static_cast<int>(X.cols()) != model.input_dim) {
    throw ValidationError("predict: feature dimension mismatch");
  }
  const Matrix x_std =
      apply_standardizer(model.standardizer, gather_columns(X, model.selected_features));

  Prediction pred;
  if (model.kind == ClassifierKind::Svm) {
    const auto& svm = std::get<SvmModel>(model.learner);
    pred.labels = detail::svm_vote(svm, x_std, model.n_classes, &pred.scores);
  } else {
    const auto& gbt = std::get<GbtModel>(model.learner);
    pred.scores = detail::softmax_rows(detail::gbt_raw_scores(gbt, x_std));
    pred.labels.resize(static_cast<std::size_t>(X.rows()), 0);
    for (std::int64_t i = 0; i < X.rows(); ++i) {
      int best = 0;
      for (int k = 1; k < model.n_classes; ++k) {
        if (pred.scores(i, k) > pred.scores(i, best)) best = k;
      }
      pred.labels[static_cast<std::size_t>(i)] = best;
    }
  }
  return pred;
}

void save_model_json(const TrainedModel& model, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["kind"] = classifier_name(model.kind);
  j["input_dim"] = model.input_dim;
  j["n_classes"] = model.n_classes;
  j["selected_features"] = model.selected_features;
  j["standardizer"] = {{"mean", model.standardizer.mean}, {"sd", model.standardizer.sd}};

  if (model.kind == ClassifierKind::Svm) {
    const auto& svm = std::get<SvmModel>(model.learner);
    json machines = json::array();
    for (const BinarySvm& m : svm.machines) {
      machines.push_back({{"class_a", m.class_a},
                          {"class_b", m.class_b},
                          {"support_vectors", matrix_to_json(m.support_vectors)},
                          {"alpha_y", m.alpha_y},
                          {"bias", m.bias},
                          {"hit_iteration_cap", m.hit_iteration_cap},
                          {"final_kkt_violation", m.final_kkt_violation},
                          {"iterations", m.iterations}});
    }
    j["svm"] = {{"gamma", svm.gamma}, {"machines", std::move(machines)}};
  } else {
    const auto& gbt = std::get<GbtModel>(model.learner);
    json rounds = json::array();
    for (const std::vector<GbtTree>& trees : gbt.rounds) {
      json round = json::array();
      for (const GbtTree& tree : trees) round.push_back(tree_to_json(tree));
      rounds.push_back(std::move(round));
    }
    j["gbt"] = {{"learning_rate", gbt.learning_rate},
                {"init_scores", gbt.init_scores},
                {"train_log_loss", gbt.train_log_loss},
                {"rounds", std::move(rounds)}};
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << j.dump(1, '\t') << '\n';
  if (!out) throw ValidationError("failed writing " + path);
}

TrainedModel load_model_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }

  try {
    if (j.at("format_version").get<int>() != 1) {
      throw ValidationError(path + ": unsupported model format_version");
    }
    TrainedModel model;
    model.kind = classifier_from_name(j.at("kind").get<std::string>());
    model.input_dim = j.at("input_dim").get<int>();
    model.n_classes = j.at("n_classes").get<int>();
    model.selected_features = j.at("selected_features").get<std::vector<int>>();
    model.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    model.standardizer.sd = j.at("standardizer").at("sd").get<std::vector<double>>();

    if (model.kind == ClassifierKind::Svm) {
      SvmModel svm;
      const json& js = j.at("svm");
      svm.gamma = js.at("gamma").get<double>();
      for (const json& jm : js.at("machines")) {
        BinarySvm m;
        m.class_a = jm.at("class_a").get<int>();
        m.class_b = jm.at("class_b").get<int>();
        m.support_vectors = matrix_from_json(
            jm.at("support_vectors"), static_cast<std::int64_t>(model.standardizer.mean.size()));
        m.alpha_y = jm.at("alpha_y").get<std::vector<double>>();
        m.bias = jm.at("bias").get<double>();
        m.hit_iteration_cap = jm.at("hit_iteration_cap").get<bool>();
        m.final_kkt_violation = jm.at("final_kkt_violation").get<double>();
        m.iterations = jm.at("iterations").get<std::int64_t>();
        if (static_cast<std::int64_t>(m.alpha_y.size()) != m.support_vectors.rows()) {
          throw ValidationError(path + ": alpha_y/support_vectors size mismatch");
        }
        svm.machines.push_back(std::move(m));
      }
      model.learner = std::move(svm);
    } else {
      GbtModel gbt;
      const json& jg = j.at("gbt");
      gbt.learning_rate = jg.at("learning_rate").get<double>();
      gbt.init_scores = jg.at("init_scores").get<std::vector<double>>();
      gbt.train_log_loss = jg.at("train_log_loss").get<std::vector<double>>();
      for (const json& jr : jg.at("rounds")) {
        std::vector<GbtTree> trees;
        for (const json& jt : jr) trees.push_back(tree_from_json(jt));
        if (static_cast<int>(trees.size()) != model.n_classes) {
          throw ValidationError(path + ": round tree count mismatch");
        }
        gbt.rounds.push_back(std::move(trees));
      }
      model.learner = std::move(gbt);
    }
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace eegdec::learn
