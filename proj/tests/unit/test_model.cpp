#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "doctest.h"
#include "eegdec/model.hpp"
#include "eegdec/rng.hpp"
#include "helpers.hpp"

using namespace eegdec;
using test_helpers::blob_points;
using test_helpers::TempDir;

namespace {

// Five columns, of which only 1 and 3 carry the blob geometry.
std::pair<Matrix, std::vector<int>> wide_blobs(int per_class, std::uint64_t seed) {
  const auto [core, y] = blob_points(per_class, seed);
  util::Rng rng(seed + 1000);
  Matrix x(core.rows(), 5);
  for (int i = 0; i < x.rows(); ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = core(i, 0);
    x(i, 2) = rng.normal();
    x(i, 3) = core(i, 1);
    x(i, 4) = rng.normal();
  }
  return {std::move(x), y};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("svm model json round-trips to bitwise-identical predictions") {
    const auto [x, y] = wide_blobs(15, 97);
    learn::SvmConfig cfg;
    cfg.c = 10.0;
    const learn::TrainedModel model = learn::fit_svm(x, y, cfg, {1, 3});
    CHECK(model.kind == learn::ClassifierKind::Svm);
    CHECK(model.input_dim == 5);
    CHECK(model.n_classes == 3);
    CHECK(model.selected_features == std::vector<int>{1, 3});
    CHECK(model.standardizer.mean.size() == 2);

    TempDir tmp;
    const std::string path = tmp.file("svm.json");
    learn::save_model_json(model, path);
    const learn::TrainedModel loaded = learn::load_model_json(path);

    CHECK(loaded.kind == model.kind);
    CHECK(loaded.input_dim == model.input_dim);
    CHECK(loaded.n_classes == model.n_classes);
    CHECK(loaded.selected_features == model.selected_features);
    CHECK(loaded.standardizer.mean == model.standardizer.mean);
    CHECK(loaded.standardizer.sd == model.standardizer.sd);

    const auto& sa = std::get<learn::SvmModel>(model.learner);
    const auto& sb = std::get<learn::SvmModel>(loaded.learner);
    CHECK(sb.gamma == sa.gamma);
    REQUIRE(sb.machines.size() == sa.machines.size());
    for (std::size_t i = 0; i < sa.machines.size(); ++i) {
      CHECK(sb.machines[i].alpha_y == sa.machines[i].alpha_y);
      CHECK(sb.machines[i].bias == sa.machines[i].bias);
      CHECK((sb.machines[i].support_vectors.array() ==
             sa.machines[i].support_vectors.array()).all());
    }

    const learn::Prediction pa = learn::predict(model, x);
    const learn::Prediction pb = learn::predict(loaded, x);
    CHECK(pa.labels == pb.labels);
    CHECK((pa.scores.array() == pb.scores.array()).all());
    CHECK(pa.labels == y);
  }

  TEST_CASE("gbt model json round-trips to bitwise-identical predictions") {
    const auto [x, y] = wide_blobs(12, 101);
    learn::GbtConfig cfg;
    cfg.n_rounds = 12;
    const learn::TrainedModel model = learn::fit_gbt(x, y, cfg, {1, 3});

    TempDir tmp;
    const std::string path = tmp.file("gbt.json");
    learn::save_model_json(model, path);
    const learn::TrainedModel loaded = learn::load_model_json(path);

    const auto& ga = std::get<learn::GbtModel>(model.learner);
    const auto& gb = std::get<learn::GbtModel>(loaded.learner);
    CHECK(gb.learning_rate == ga.learning_rate);
    CHECK(gb.init_scores == ga.init_scores);
    CHECK(gb.train_log_loss == ga.train_log_loss);
    REQUIRE(gb.rounds.size() == ga.rounds.size());

    const learn::Prediction pa = learn::predict(model, x);
    const learn::Prediction pb = learn::predict(loaded, x);
    CHECK(pa.labels == pb.labels);
    CHECK((pa.scores.array() == pb.scores.array()).all());
  }

  TEST_CASE("ignored columns have no effect on a selected-feature model") {
    const auto [x, y] = wide_blobs(10, 103);
    learn::GbtConfig cfg;
    cfg.n_rounds = 8;
    const learn::TrainedModel model = learn::fit_gbt(x, y, cfg, {1, 3});

    Matrix zeroed = x;
    zeroed.col(0).setZero();
    zeroed.col(2).setZero();
    zeroed.col(4).setZero();
    const learn::Prediction pa = learn::predict(model, x);
    const learn::Prediction pb = learn::predict(model, zeroed);
    CHECK(pa.labels == pb.labels);
    CHECK((pa.scores.array() == pb.scores.array()).all());
  }

  TEST_CASE("selection masks are validated") {
    const auto [x, y] = wide_blobs(8, 107);
    learn::SvmConfig cfg;
    CHECK_THROWS_AS(learn::fit_svm(x, y, cfg, {3, 1}), ValidationError);
    CHECK_THROWS_AS(learn::fit_svm(x, y, cfg, {1, 1}), ValidationError);
    CHECK_THROWS_AS(learn::fit_svm(x, y, cfg, {0, 5}), ValidationError);
    CHECK_THROWS_AS(learn::fit_svm(x, y, cfg, {-1}), ValidationError);

    const learn::TrainedModel model = learn::fit_svm(x, y, cfg, {1, 3});
    CHECK_THROWS_AS(learn::predict(model, x.leftCols(4).eval()), ValidationError);
  }

  TEST_CASE("standardizer handles constant columns and guards dimensions") {
    Matrix x(6, 2);
    x << 0, 7, 2, 7, 4, 7, 6, 7, 8, 7, 10, 7;
    const std::vector<int> y = {0, 0, 0, 1, 1, 1};
    learn::GbtConfig cfg;
    cfg.n_rounds = 2;
    cfg.min_samples_leaf = 1;
    const learn::TrainedModel model = learn::fit_gbt(x, y, cfg);
    CHECK(model.standardizer.mean[1] == 7.0);
    CHECK(model.standardizer.sd[1] == 1.0);  // constant column centers to zero
    CHECK(model.standardizer.sd[0] > 1.0);

    Vector row(2);
    row << 5.0, 7.0;
    model.standardizer.apply(row);
    CHECK(row(0) == doctest::Approx((5.0 - model.standardizer.mean[0]) /
                                    model.standardizer.sd[0]).epsilon(1e-12));
    CHECK(row(1) == 0.0);

    Vector wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS(model.standardizer.apply(wrong), ValidationError);
  }

  TEST_CASE("training input validation") {
    const auto [x, y] = blob_points(5, 109);
    learn::SvmConfig cfg;
    std::vector<int> bad_labels = y;
    bad_labels[0] = -2;
    CHECK_THROWS_AS(learn::fit_svm(x, bad_labels, cfg), ValidationError);

    Matrix nonfinite = x;
    nonfinite(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(learn::fit_svm(nonfinite, y, cfg), ValidationError);

    CHECK_THROWS_AS(learn::fit_svm(x.topRows(1).eval(), {0}, cfg), ValidationError);
  }

  TEST_CASE("model files with structural damage are rejected with clear errors") {
    TempDir tmp;

    CHECK_THROWS_AS(learn::load_model_json(tmp.file("missing.json")), ValidationError);

    const std::string garbled = tmp.file("garbled.json");
    write_text(garbled, "{this is not json");
    CHECK_THROWS_AS(learn::load_model_json(garbled), ValidationError);

    const std::string future = tmp.file("future.json");
    write_text(future, R"({"format_version": 2})");
    CHECK_THROWS_WITH_AS(learn::load_model_json(future),
                         doctest::Contains("format_version"), ValidationError);

    const std::string truncated = tmp.file("truncated.json");
    write_text(truncated, R"({"format_version": 1, "kind": "svm"})");
    CHECK_THROWS_AS(learn::load_model_json(truncated), ValidationError);

    const std::string unknown_kind = tmp.file("unknown_kind.json");
    write_text(unknown_kind, R"({"format_version": 1, "kind": "mlp"})");
    CHECK_THROWS_WITH_AS(learn::load_model_json(unknown_kind),
                         doctest::Contains("mlp"), ValidationError);
  }

  TEST_CASE("classifier names map both ways") {
    CHECK(learn::classifier_name(learn::ClassifierKind::Svm) == "svm");
    CHECK(learn::classifier_name(learn::ClassifierKind::Gbt) == "gbt");
    CHECK(learn::classifier_from_name("svm") == learn::ClassifierKind::Svm);
    CHECK(learn::classifier_from_name("gbt") == learn::ClassifierKind::Gbt);
    CHECK_THROWS_AS(learn::classifier_from_name("forest"), ValidationError);
  }
}
