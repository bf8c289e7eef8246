#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "fluency/ml.hpp"
#include "support/oracles.hpp"

using namespace fluency;

namespace {

std::vector<ml::FeatureRow> synthetic_rows(size_t n, uint64_t seed) {
  std::vector<ml::FeatureRow> rows;
  for (const oracle::SyntheticRow& sr : oracle::synthetic_rule_rows(n, seed)) {
    rows.push_back(ml::make_feature_row(sr.metrics, sr.label));
  }
  return rows;
}

std::vector<ml::FeatureRow> grid_rows() {
  std::vector<ml::FeatureRow> rows;
  for (const oracle::SyntheticRow& sr : oracle::synthetic_rule_rows(50, 777)) {
    rows.push_back(ml::make_feature_row(sr.metrics, std::nullopt));
  }
  return rows;
}

bool same_predictions(const ml::EnsembleModel& a, const ml::EnsembleModel& b,
                      const std::vector<ml::FeatureRow>& rows) {
  for (const ml::FeatureRow& row : rows) {
    ml::Prediction pa = ml::predict(a, row);
    ml::Prediction pb = ml::predict(b, row);
    if (pa.label != pb.label) return false;
    if ((pa.probabilities - pb.probabilities).cwiseAbs().maxCoeff() != 0.0) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("feature rows have the documented order and width") {
  const auto& order = ml::default_feature_order();
  REQUIRE(order.size() == 12);
  CHECK(order[0] == "wer");
  CHECK(order[7] == "pause_ratio");
  CHECK(order[8] == "lang_malay");
  CHECK(order[11] == "task_P");
  MetricVector m;
  m.total_duration = 1.0;
  ml::FeatureRow row = ml::make_feature_row(m, std::nullopt);
  CHECK(row.values.size() == 12);
  CHECK(row.values[8] == 1.0);  // malay one-hot
  CHECK(row.values[9] == 0.0);
}

TEST_CASE("forest reaches 100% training accuracy on the rule dataset") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(60, 1);
  ml::EnsembleModel model = ml::train_forest(rows, {}, 42);
  for (const ml::FeatureRow& row : rows) {
    CHECK(ml::predict(model, row).label == *row.label);
  }
}

TEST_CASE("forest training is deterministic") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(60, 2);
  ml::EnsembleModel a = ml::train_forest(rows, {}, 7);
  ml::EnsembleModel b = ml::train_forest(rows, {}, 7);
  CHECK(same_predictions(a, b, grid_rows()));
}

TEST_CASE("training rejects degenerate inputs") {
  CHECK_THROWS_AS(ml::train_forest({}, {}, 1), ValidationError);
  std::vector<ml::FeatureRow> rows = synthetic_rows(20, 3);
  for (ml::FeatureRow& row : rows) row.label = FluencyLabel::Low;
  CHECK_THROWS_AS(ml::train_forest(rows, {}, 1), ValidationError);
  CHECK_THROWS_AS(ml::train_boosted(rows, {}, 1), ValidationError);
  rows[0].label.reset();
  CHECK_THROWS_AS(ml::train_forest(rows, {}, 1), ValidationError);
}

TEST_CASE("training is invariant to row permutation") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(40, 4);
  std::vector<ml::FeatureRow> shuffled = rows;
  std::mt19937_64 rng(99);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  ml::EnsembleModel a = ml::train_forest(rows, {}, 11);
  ml::EnsembleModel b = ml::train_forest(shuffled, {}, 11);
  CHECK(same_predictions(a, b, grid_rows()));
  ml::EnsembleModel c = ml::train_boosted(rows, {}, 11);
  ml::EnsembleModel d = ml::train_boosted(shuffled, {}, 11);
  CHECK(same_predictions(c, d, grid_rows()));
}

TEST_CASE("boosted training log-loss strictly decreases early") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(60, 5);
  ml::BoostConfig config;
  config.rounds = 12;
  ml::EnsembleModel model = ml::train_boosted(rows, config, 42);
  REQUIRE(model.training_loss.size() == 12);
  for (int r = 1; r < 10; ++r) {
    CHECK(model.training_loss[r] < model.training_loss[r - 1]);
  }
}

TEST_CASE("boosting with zero learning rate predicts class priors") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(60, 6);
  ml::BoostConfig config;
  config.learning_rate = 0.0;
  config.rounds = 5;
  ml::EnsembleModel model = ml::train_boosted(rows, config, 42);
  double counts[3] = {0, 0, 0};
  for (const auto& row : rows) counts[ordinal_value(*row.label) - 1] += 1;
  ml::Prediction pred = ml::predict(model, rows[0]);
  for (int c = 0; c < 3; ++c) {
    CHECK(pred.probabilities[c] == doctest::Approx(counts[c] / 60.0));
  }
}

TEST_CASE("boosted determinism") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(60, 7);
  ml::BoostConfig config;
  config.rounds = 20;
  ml::EnsembleModel a = ml::train_boosted(rows, config, 9);
  ml::EnsembleModel b = ml::train_boosted(rows, config, 9);
  CHECK(ml::save_model(a) == ml::save_model(b));
}

TEST_CASE("degenerate single-leaf tree predicts its class") {
  ml::EnsembleModel model;
  model.kind = ml::ModelKind::RandomForest;
  model.feature_order = ml::default_feature_order();
  ml::DecisionTree tree;
  ml::TreeNode leaf;
  leaf.value = Eigen::Vector3d(0.0, 0.0, 1.0);
  tree.nodes.push_back(leaf);
  model.trees.push_back(tree);
  MetricVector m;
  m.total_duration = 1.0;
  ml::Prediction pred = ml::predict(model, ml::make_feature_row(m, std::nullopt));
  CHECK(pred.label == FluencyLabel::High);
  CHECK(pred.probabilities[2] == 1.0);
}

TEST_CASE("probabilities sum to one") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(60, 8);
  ml::ForestConfig fc;
  fc.num_trees = 30;
  ml::EnsembleModel forest = ml::train_forest(rows, fc, 42);
  ml::BoostConfig bc;
  bc.rounds = 15;
  ml::EnsembleModel boosted = ml::train_boosted(rows, bc, 42);
  for (const ml::FeatureRow& row : grid_rows()) {
    CHECK(ml::predict(forest, row).probabilities.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ml::predict(boosted, row).probabilities.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("forest prediction equals brute-force re-walk of every tree") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(30, 10);
  ml::ForestConfig config;
  config.num_trees = 10;
  ml::EnsembleModel model = ml::train_forest(rows, config, 5);
  for (const ml::FeatureRow& row : grid_rows()) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const ml::DecisionTree& tree : model.trees) {
      // walk manually
      const ml::TreeNode* node = &tree.nodes[0];
      while (!node->is_leaf()) {
        node = &tree.nodes[row.values[node->feature] <= node->threshold
                               ? node->left
                               : node->right];
      }
      sum += node->value;
    }
    sum /= static_cast<double>(model.trees.size());
    ml::Prediction pred = ml::predict(model, row);
    CHECK((pred.probabilities - sum).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    Eigen::Index argmax = 0;
    sum.maxCoeff(&argmax);
    CHECK(ordinal_value(pred.label) - 1 == argmax);
  }
}

TEST_CASE("predict rejects dimension mismatch") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(30, 12);
  ml::EnsembleModel model = ml::train_forest(rows, {}, 1);
  CHECK_THROWS_AS(ml::predict(model, ml::Vector::Zero(5)), DomainError);
}

TEST_CASE("save/load round-trips to bit-identical predictions") {
  std::vector<ml::FeatureRow> rows = synthetic_rows(60, 13);
  ml::ForestConfig fc;
  fc.num_trees = 20;
  ml::EnsembleModel forest = ml::train_forest(rows, fc, 42);
  ml::BoostConfig bc;
  bc.rounds = 10;
  ml::EnsembleModel boosted = ml::train_boosted(rows, bc, 42);
  std::vector<ml::FeatureRow> probe;
  for (const oracle::SyntheticRow& sr : oracle::synthetic_rule_rows(100, 555)) {
    probe.push_back(ml::make_feature_row(sr.metrics, std::nullopt));
  }
  CHECK(same_predictions(forest, ml::load_model(ml::save_model(forest)), probe));
  CHECK(same_predictions(boosted, ml::load_model(ml::save_model(boosted)), probe));
}

TEST_CASE("load rejects corrupt and unsupported input") {
  CHECK_THROWS_AS(ml::load_model("garbage bytes \x01\x02"), ParseError);
  CHECK_THROWS_AS(ml::load_model("fluency-model 999\nkind forest\n"), ParseError);
  std::vector<ml::FeatureRow> rows = synthetic_rows(20, 14);
  std::string serialized = ml::save_model(ml::train_forest(rows, {}, 1));
  CHECK_THROWS_AS(ml::load_model(serialized.substr(0, serialized.size() / 2)),
                  ParseError);
}

TEST_CASE("both kinds reach balanced accuracy >= 0.95 on fresh data") {
  std::vector<ml::FeatureRow> train = synthetic_rows(60, 7);
  auto test_set = oracle::synthetic_rule_rows(300, 8);
  ml::EnsembleModel forest = ml::train_forest(train, {}, 42);
  ml::EnsembleModel boosted = ml::train_boosted(train, {}, 42);
  for (const ml::EnsembleModel* model : {&forest, &boosted}) {
    std::vector<int> truth, pred;
    for (const oracle::SyntheticRow& sr : test_set) {
      truth.push_back(ordinal_value(sr.label) - 1);
      pred.push_back(
          ordinal_value(
              ml::predict(*model, ml::make_feature_row(sr.metrics, std::nullopt))
                  .label) -
          1);
    }
    CHECK(oracle::balanced_accuracy(truth, pred) >= 0.95);
  }
}
