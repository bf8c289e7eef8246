#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fluency/types.hpp"

namespace fluency::ml {

using Vector = Eigen::VectorXd;

// One training/inference row: the 8 numeric metrics followed by one-hot
// language and task columns, in the order given by feature_order.
struct FeatureRow {
  Vector values;
  std::optional<FluencyLabel> label;
};

// Canonical 12-column order: the 8 metric fields, then lang_malay,
// lang_tamil, task_R, task_P.
const std::vector<std::string>& default_feature_order();

// Builds a FeatureRow for the given order; names not in the order are
// dropped (this is how ablation removes a column).
FeatureRow make_feature_row(const MetricVector& metrics,
                            std::optional<FluencyLabel> label,
                            const std::vector<std::string>& feature_order =
                                default_feature_order());

struct TreeNode {
  int feature = -1;       // -1 for leaves
  double threshold = 0.0; // goes left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  Vector value;  // leaf payload: class distribution (forest) or scalar (boost)

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const Vector& x) const;
};

struct ForestConfig {
  int num_trees = 100;
  int min_leaf = 1;
  int max_depth = -1;  // unlimited
  std::vector<std::string> feature_order = default_feature_order();
};

struct BoostConfig {
  int rounds = 100;
  double learning_rate = 0.3;
  int max_depth = 6;
  int min_leaf = 1;
  std::vector<std::string> feature_order = default_feature_order();
};

enum class ModelKind { RandomForest, GradientBoosted };

struct EnsembleModel {
  ModelKind kind = ModelKind::RandomForest;
  std::vector<DecisionTree> trees;  // boosted: round-major, one tree per class
  std::vector<FluencyLabel> classes = {FluencyLabel::Low, FluencyLabel::Medium,
                                       FluencyLabel::High};
  std::vector<std::string> feature_order;
  uint64_t train_seed = 0;
  double learning_rate = 0.0;   // boosted only
  Vector base_scores;           // boosted only: log class priors
  std::vector<double> training_loss;  // boosted: per-round log-loss (not saved)
};

struct Prediction {
  FluencyLabel label = FluencyLabel::Low;
  Vector probabilities;  // per class, sums to 1
};

// Bagged classification trees: bootstrap rows, ceil(sqrt(d)) features per
// split, Gini criterion, grown to purity. Deterministic given seed.
EnsembleModel train_forest(const std::vector<FeatureRow>& rows,
                           const ForestConfig& config, uint64_t seed);

// Multiclass gradient boosting with a softmax log-loss objective: per round,
// one regression tree per class fit to the negative gradient. Deterministic
// given seed.
EnsembleModel train_boosted(const std::vector<FeatureRow>& rows,
                            const BoostConfig& config, uint64_t seed);

Prediction predict(const EnsembleModel& model, const FeatureRow& row);
Prediction predict(const EnsembleModel& model, const Vector& values);

// Versioned text serialization; doubles stored as hexfloats so load(save(m))
// reproduces bit-identical predictions.
std::string save_model(const EnsembleModel& model);
EnsembleModel load_model(std::string_view bytes);

}  // namespace fluency::ml
