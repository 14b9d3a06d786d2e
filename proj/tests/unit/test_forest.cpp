#include <algorithm>
#include <limits>
#include <vector>

#include "doctest.h"
#include "eegdec/forest.hpp"
#include "eegdec/rng.hpp"

using namespace eegdec;
using learn::RandomForestConfig;

namespace {

// Feature 0 fully determines the label; the rest is noise. With few distractor
// columns the determining feature should dominate the importance mass.
std::pair<Matrix, std::vector<int>> labeled_noise(int n, int d, std::uint64_t seed) {
  util::Rng rng(seed);
  Matrix x(n, d);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int cls = i % 3;
    y[static_cast<std::size_t>(i)] = cls;
    x(i, 0) = static_cast<double>(cls) + 0.1 * rng.normal();
    for (int j = 1; j < d; ++j) x(i, j) = rng.normal();
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

TEST_SUITE("forest") {
  TEST_CASE("importance concentrates on a label-determining feature") {
    const auto [x, y] = labeled_noise(300, 16, 7);
    RandomForestConfig cfg;
    cfg.n_trees = 200;
    cfg.seed = 3;
    const learn::RandomForest rf = learn::fit_random_forest(x, y, cfg);

    REQUIRE(rf.importance.size() == 16);
    CHECK(rf.importance.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rf.importance.minCoeff() >= 0.0);
    int argmax = 0;
    rf.importance.maxCoeff(&argmax);
    CHECK(argmax == 0);
    CHECK(rf.importance(0) > 0.5);
    CHECK(rf.n_classes == 3);

    // The forest also classifies its own training distribution correctly.
    int correct = 0;
    for (int i = 0; i < x.rows(); ++i) {
      correct += rf.predict(x.row(i).eval().data()) == y[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    CHECK(correct > 290);
  }

  TEST_CASE("wide noise dilutes but does not displace the top feature") {
    const auto [x, y] = labeled_noise(300, 100, 11);
    RandomForestConfig cfg;
    cfg.n_trees = 300;
    cfg.seed = 5;
    const learn::RandomForest rf = learn::fit_random_forest(x, y, cfg);
    int argmax = 0;
    rf.importance.maxCoeff(&argmax);
    CHECK(argmax == 0);
    CHECK(rf.importance(0) > 0.15);
  }

  TEST_CASE("same seed gives a bitwise-identical forest regardless of threads") {
    const auto [x, y] = labeled_noise(120, 12, 13);
    RandomForestConfig cfg;
    cfg.n_trees = 64;
    cfg.seed = 17;
    cfg.n_threads = 1;
    const learn::RandomForest a = learn::fit_random_forest(x, y, cfg);
    cfg.n_threads = 7;
    const learn::RandomForest b = learn::fit_random_forest(x, y, cfg);

    REQUIRE(a.trees.size() == b.trees.size());
    CHECK((a.importance.array() == b.importance.array()).all());
    bool same_structure = true;
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
      const auto& ta = a.trees[t].nodes;
      const auto& tb = b.trees[t].nodes;
      if (ta.size() != tb.size()) {
        same_structure = false;
        break;
      }
      for (std::size_t k = 0; k < ta.size(); ++k) {
        same_structure = same_structure && ta[k].feature == tb[k].feature &&
                         ta[k].threshold == tb[k].threshold && ta[k].label == tb[k].label &&
                         ta[k].left == tb[k].left && ta[k].right == tb[k].right;
      }
    }
    CHECK(same_structure);

    cfg.seed = 18;
    const learn::RandomForest c = learn::fit_random_forest(x, y, cfg);
    CHECK((a.importance.array() != c.importance.array()).any());
  }

  TEST_CASE("permuting feature columns permutes the forest exactly") {
    const auto [x, y] = labeled_noise(150, 10, 19);
    RandomForestConfig cfg;
    cfg.n_trees = 50;
    cfg.seed = 23;
    const learn::RandomForest base = learn::fit_random_forest(x, y, cfg);

    // Reverse the columns and refit: importance must be the reversal. The
    // normalizing total is summed in column order, so the last bits may move.
    Matrix rx(x.rows(), x.cols());
    for (int j = 0; j < x.cols(); ++j) rx.col(j) = x.col(x.cols() - 1 - j);
    const learn::RandomForest perm = learn::fit_random_forest(rx, y, cfg);

    REQUIRE(perm.importance.size() == base.importance.size());
    for (int j = 0; j < base.importance.size(); ++j) {
      CHECK(perm.importance(x.cols() - 1 - j) ==
            doctest::Approx(base.importance(j)).epsilon(1e-12));
    }
    // Predictions agree once rows are permuted the same way.
    for (int i = 0; i < 20; ++i) {
      CHECK(base.predict(x.row(i).eval().data()) == perm.predict(rx.row(i).eval().data()));
    }
  }

  TEST_CASE("depth and leaf-size limits shape the trees") {
    const auto [x, y] = labeled_noise(200, 8, 29);
    RandomForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 31;
    cfg.max_depth = 1;
    const learn::RandomForest stumps = learn::fit_random_forest(x, y, cfg);
    for (const auto& tree : stumps.trees) {
      REQUIRE(!tree.nodes.empty());
      CHECK(tree.nodes.size() <= 3);  // root plus at most two leaves
      for (const auto& node : tree.nodes) {
        if (node.feature >= 0) {
          CHECK(tree.nodes[static_cast<std::size_t>(node.left)].feature == -1);
          CHECK(tree.nodes[static_cast<std::size_t>(node.right)].feature == -1);
        }
      }
    }

    cfg.max_depth = 0;
    cfg.min_samples_leaf = 50;
    const learn::RandomForest chunky = learn::fit_random_forest(x, y, cfg);
    for (const auto& tree : chunky.trees) {
      // A 50-sample floor on 200 bootstrap rows allows at most 4 leaves.
      CHECK(tree.nodes.size() <= 7);
    }
  }

  TEST_CASE("select_features keeps the k most important, ties to lower index") {
    Vector imp(6);
    imp << 0.1, 0.3, 0.3, 0.05, 0.25, 0.0;
    CHECK(learn::select_features(imp, 3) == std::vector<int>{1, 2, 4});
    CHECK(learn::select_features(imp, 1) == std::vector<int>{1});
    CHECK(learn::select_features(imp, 6) == std::vector<int>{0, 1, 2, 3, 4, 5});

    Vector flat = Vector::Constant(5, 0.2);
    CHECK(learn::select_features(flat, 2) == std::vector<int>{0, 1});

    CHECK_THROWS_AS(learn::select_features(imp, 0), ValidationError);
    CHECK_THROWS_AS(learn::select_features(imp, 7), ValidationError);
  }

  TEST_CASE("degenerate training inputs are rejected") {
    Matrix x(4, 2);
    x << 0, 1, 1, 0, 0, 1, 1, 0;
    RandomForestConfig cfg;
    cfg.n_trees = 4;

    CHECK_THROWS_AS(learn::fit_random_forest(x, {0, 0, 0, 0}, cfg), ValidationError);
    CHECK_THROWS_AS(learn::fit_random_forest(x, {0, 1, 1}, cfg), ValidationError);

    Matrix bad = x;
    bad(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(learn::fit_random_forest(bad, {0, 1, 0, 1}, cfg), ValidationError);

    RandomForestConfig broken;
    broken.n_trees = 0;
    CHECK_THROWS_AS(learn::fit_random_forest(x, {0, 1, 0, 1}, broken), ValidationError);
    broken = RandomForestConfig{};
    broken.features_per_split = 3;  // more than d
    CHECK_THROWS_AS(learn::fit_random_forest(x, {0, 1, 0, 1}, broken), ValidationError);
  }
}
