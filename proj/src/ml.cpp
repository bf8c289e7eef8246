#include "fluency/ml.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>
#include <sstream>

namespace fluency::ml {

namespace {

constexpr int kNumClasses = 3;
constexpr int kFormatVersion = 1;

int class_index(FluencyLabel label) { return ordinal_value(label) - 1; }

uint64_t row_hash(const FeatureRow& row) {
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](const void* data, size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (Eigen::Index i = 0; i < row.values.size(); ++i) {
    double v = row.values[i];
    mix(&v, sizeof(v));
  }
  int label = row.label ? ordinal_value(*row.label) : 0;
  mix(&label, sizeof(label));
  return h;
}

// Canonical training order: sorted by row hash so shuffling the input rows
// cannot change the model.
std::vector<size_t> canonical_order(const std::vector<FeatureRow>& rows) {
  std::vector<size_t> order(rows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<uint64_t> hashes(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) hashes[i] = row_hash(rows[i]);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
    for (Eigen::Index k = 0; k < rows[a].values.size(); ++k) {
      if (rows[a].values[k] != rows[b].values[k]) {
        return rows[a].values[k] < rows[b].values[k];
      }
    }
    return false;
  });
  return order;
}

void check_training_input(const std::vector<FeatureRow>& rows) {
  if (rows.empty()) throw ValidationError("training input is empty");
  std::set<int> classes;
  Eigen::Index dim = rows.front().values.size();
  for (const FeatureRow& row : rows) {
    if (!row.label) throw ValidationError("training row without label");
    if (row.values.size() != dim) {
      throw ValidationError("inconsistent feature dimension in training rows");
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (!std::isfinite(row.values[i])) {
        throw ValidationError("non-finite feature value in training row");
      }
    }
    classes.insert(class_index(*row.label));
  }
  if (classes.size() < 2) {
    throw ValidationError("training input has a single class; need >= 2");
  }
}

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // impurity/SSE after split, lower is better
};

// Best Gini split for the given sample over the candidate features, which
// must be in ascending index order (gives the lowest-feature tie-break).
Split best_gini_split(const std::vector<const FeatureRow*>& sample,
                      const std::vector<int>& features) {
  Split best;
  const size_t n = sample.size();
  std::vector<std::pair<double, int>> vals(n);
  for (int f : features) {
    for (size_t i = 0; i < n; ++i) {
      vals[i] = {sample[i]->values[f], class_index(*sample[i]->label)};
    }
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) continue;
    double left[kNumClasses] = {0, 0, 0};
    double right[kNumClasses] = {0, 0, 0};
    for (const auto& [v, c] : vals) right[c] += 1;
    double nl = 0, nr = static_cast<double>(n);
    for (size_t i = 0; i + 1 < n; ++i) {
      int c = vals[i].second;
      left[c] += 1, right[c] -= 1;
      nl += 1, nr -= 1;
      if (vals[i].first == vals[i + 1].first) continue;
      double gl = 1.0, gr = 1.0;
      for (int k = 0; k < kNumClasses; ++k) {
        gl -= (left[k] / nl) * (left[k] / nl);
        gr -= (right[k] / nr) * (right[k] / nr);
      }
      double score = (nl * gl + nr * gr) / static_cast<double>(n);
      if (!best.found || score < best.score) {
        best.found = true;
        best.feature = f;
        best.threshold = (vals[i].first + vals[i + 1].first) / 2.0;
        best.score = score;
      }
    }
  }
  return best;
}

Split best_sse_split(const std::vector<const FeatureRow*>& sample,
                     const std::vector<double>& targets,
                     const std::vector<int>& features, int min_leaf) {
  Split best;
  const size_t n = sample.size();
  std::vector<std::pair<double, double>> vals(n);  // (feature value, target)
  for (int f : features) {
    for (size_t i = 0; i < n; ++i) {
      vals[i] = {sample[i]->values[f], targets[i]};
    }
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) continue;
    double sum_left = 0, sq_left = 0;
    double sum_right = 0, sq_right = 0;
    for (const auto& [v, t] : vals) sum_right += t, sq_right += t * t;
    double nl = 0, nr = static_cast<double>(n);
    for (size_t i = 0; i + 1 < n; ++i) {
      double t = vals[i].second;
      sum_left += t, sq_left += t * t;
      sum_right -= t, sq_right -= t * t;
      nl += 1, nr -= 1;
      if (vals[i].first == vals[i + 1].first) continue;
      if (nl < min_leaf || nr < min_leaf) continue;
      double sse = (sq_left - sum_left * sum_left / nl) +
                   (sq_right - sum_right * sum_right / nr);
      if (!best.found || sse < best.score) {
        best.found = true;
        best.feature = f;
        best.threshold = (vals[i].first + vals[i + 1].first) / 2.0;
        best.score = sse;
      }
    }
  }
  return best;
}

bool is_pure(const std::vector<const FeatureRow*>& sample) {
  int c = class_index(*sample.front()->label);
  for (const FeatureRow* row : sample) {
    if (class_index(*row->label) != c) return false;
  }
  return true;
}

Vector class_distribution(const std::vector<const FeatureRow*>& sample) {
  Vector dist = Vector::Zero(kNumClasses);
  for (const FeatureRow* row : sample) dist[class_index(*row->label)] += 1.0;
  dist /= static_cast<double>(sample.size());
  return dist;
}

int grow_classification(DecisionTree& tree,
                        std::vector<const FeatureRow*> sample, int depth,
                        const ForestConfig& config, int dim,
                        std::mt19937_64& rng) {
  int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  bool stop = is_pure(sample) ||
              sample.size() < static_cast<size_t>(2 * config.min_leaf) ||
              (config.max_depth >= 0 && depth >= config.max_depth);
  Split split;
  if (!stop) {
    // ceil(sqrt(d)) candidate features, sampled without replacement.
    int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim))));
    std::vector<int> all(dim);
    for (int i = 0; i < dim; ++i) all[i] = i;
    std::vector<int> chosen;
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(0, dim - 1 - i);
      int j = pick(rng);
      chosen.push_back(all[j]);
      std::swap(all[j], all[dim - 1 - i]);
    }
    std::sort(chosen.begin(), chosen.end());
    split = best_gini_split(sample, chosen);
  }
  if (!split.found) {
    tree.nodes[index].value = class_distribution(sample);
    return index;
  }
  std::vector<const FeatureRow*> left, right;
  for (const FeatureRow* row : sample) {
    (row->values[split.feature] <= split.threshold ? left : right)
        .push_back(row);
  }
  if (left.empty() || right.empty()) {
    tree.nodes[index].value = class_distribution(sample);
    return index;
  }
  tree.nodes[index].feature = split.feature;
  tree.nodes[index].threshold = split.threshold;
  int l = grow_classification(tree, std::move(left), depth + 1, config, dim, rng);
  int r = grow_classification(tree, std::move(right), depth + 1, config, dim, rng);
  tree.nodes[index].left = l;
  tree.nodes[index].right = r;
  return index;
}

int grow_regression(DecisionTree& tree, std::vector<const FeatureRow*> sample,
                    std::vector<double> targets, int depth,
                    const BoostConfig& config, int dim,
                    const std::vector<int>& all_features) {
  int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  bool stop = depth >= config.max_depth ||
              sample.size() < static_cast<size_t>(2 * config.min_leaf);
  Split split;
  if (!stop) split = best_sse_split(sample, targets, all_features, config.min_leaf);
  if (!split.found) {
    // Newton step for the softmax objective.
    double num = 0, den = 0;
    for (double r : targets) {
      num += r;
      den += std::abs(r) * (1.0 - std::abs(r));
    }
    double k = static_cast<double>(kNumClasses);
    double gamma = den > 1e-12 ? (k - 1.0) / k * num / den : 0.0;
    tree.nodes[index].value = Vector::Constant(1, gamma);
    return index;
  }
  std::vector<const FeatureRow*> ls, rs;
  std::vector<double> lt, rt;
  for (size_t i = 0; i < sample.size(); ++i) {
    if (sample[i]->values[split.feature] <= split.threshold) {
      ls.push_back(sample[i]);
      lt.push_back(targets[i]);
    } else {
      rs.push_back(sample[i]);
      rt.push_back(targets[i]);
    }
  }
  tree.nodes[index].feature = split.feature;
  tree.nodes[index].threshold = split.threshold;
  int l = grow_regression(tree, std::move(ls), std::move(lt), depth + 1,
                          config, dim, all_features);
  int r = grow_regression(tree, std::move(rs), std::move(rt), depth + 1,
                          config, dim, all_features);
  tree.nodes[index].left = l;
  tree.nodes[index].right = r;
  return index;
}

std::string fmt_hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hex(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw ParseError("model file: bad number \"" + s + "\"");
  return v;
}

}  // namespace

const std::vector<std::string>& default_feature_order() {
  static const std::vector<std::string> order = [] {
    std::vector<std::string> names = metric_field_names();
    names.insert(names.end(), {"lang_malay", "lang_tamil", "task_R", "task_P"});
    return names;
  }();
  return order;
}

FeatureRow make_feature_row(const MetricVector& metrics,
                            std::optional<FluencyLabel> label,
                            const std::vector<std::string>& feature_order) {
  FeatureRow row;
  row.label = label;
  row.values = Vector::Zero(static_cast<Eigen::Index>(feature_order.size()));
  for (size_t i = 0; i < feature_order.size(); ++i) {
    const std::string& name = feature_order[i];
    double v = 0.0;
    if (name == "lang_malay") {
      v = metrics.language == Language::Malay ? 1.0 : 0.0;
    } else if (name == "lang_tamil") {
      v = metrics.language == Language::Tamil ? 1.0 : 0.0;
    } else if (name == "task_R") {
      v = metrics.task == TaskType::Reading ? 1.0 : 0.0;
    } else if (name == "task_P") {
      v = metrics.task == TaskType::Picture ? 1.0 : 0.0;
    } else {
      v = metric_field(metrics, name);
    }
    if (!std::isfinite(v)) {
      throw ValidationError("non-finite value for feature \"" + name + "\"");
    }
    row.values[static_cast<Eigen::Index>(i)] = v;
  }
  return row;
}

const TreeNode& DecisionTree::leaf_for(const Vector& x) const {
  const TreeNode* node = &nodes[0];
  while (!node->is_leaf()) {
    node = &nodes[x[node->feature] <= node->threshold ? node->left
                                                      : node->right];
  }
  return *node;
}

EnsembleModel train_forest(const std::vector<FeatureRow>& rows,
                           const ForestConfig& config, uint64_t seed) {
  check_training_input(rows);
  const int dim = static_cast<int>(rows.front().values.size());
  std::vector<size_t> order = canonical_order(rows);

  if (dim != static_cast<int>(config.feature_order.size())) {
    throw ValidationError("row dimension does not match config feature_order");
  }
  EnsembleModel model;
  model.kind = ModelKind::RandomForest;
  model.train_seed = seed;
  model.feature_order = config.feature_order;
  model.base_scores = Vector::Zero(kNumClasses);  // unused; keeps the format uniform

  std::mt19937_64 master(seed);
  std::vector<uint64_t> tree_seeds(config.num_trees);
  for (uint64_t& s : tree_seeds) s = master();

  for (int t = 0; t < config.num_trees; ++t) {
    std::mt19937_64 rng(tree_seeds[t]);
    std::uniform_int_distribution<size_t> pick(0, rows.size() - 1);
    std::vector<const FeatureRow*> sample;
    sample.reserve(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      sample.push_back(&rows[order[pick(rng)]]);
    }
    DecisionTree tree;
    grow_classification(tree, std::move(sample), 0, config, dim, rng);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

EnsembleModel train_boosted(const std::vector<FeatureRow>& rows,
                            const BoostConfig& config, uint64_t seed) {
  check_training_input(rows);
  const int dim = static_cast<int>(rows.front().values.size());
  const size_t n = rows.size();
  std::vector<size_t> order = canonical_order(rows);

  if (dim != static_cast<int>(config.feature_order.size())) {
    throw ValidationError("row dimension does not match config feature_order");
  }
  EnsembleModel model;
  model.kind = ModelKind::GradientBoosted;
  model.train_seed = seed;
  model.learning_rate = config.learning_rate;
  model.feature_order = config.feature_order;

  std::vector<const FeatureRow*> sample(n);
  for (size_t i = 0; i < n; ++i) sample[i] = &rows[order[i]];

  Vector priors = Vector::Zero(kNumClasses);
  for (const FeatureRow* row : sample) priors[class_index(*row->label)] += 1.0;
  priors /= static_cast<double>(n);
  model.base_scores = Vector::Zero(kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) {
    model.base_scores[k] = priors[k] > 0 ? std::log(priors[k]) : -30.0;
  }

  Eigen::MatrixXd scores(n, kNumClasses);
  for (size_t i = 0; i < n; ++i) scores.row(i) = model.base_scores.transpose();

  std::vector<int> all_features(dim);
  for (int f = 0; f < dim; ++f) all_features[f] = f;

  for (int round = 0; round < config.rounds; ++round) {
    Eigen::MatrixXd probs(n, kNumClasses);
    for (size_t i = 0; i < n; ++i) {
      Eigen::RowVectorXd s = scores.row(i);
      double m = s.maxCoeff();
      Eigen::RowVectorXd e = (s.array() - m).exp();
      probs.row(i) = e / e.sum();
    }
    for (int k = 0; k < kNumClasses; ++k) {
      std::vector<double> residual(n);
      for (size_t i = 0; i < n; ++i) {
        double y = class_index(*sample[i]->label) == k ? 1.0 : 0.0;
        residual[i] = y - probs(i, k);
      }
      DecisionTree tree;
      grow_regression(tree, sample, residual, 0, config, dim, all_features);
      for (size_t i = 0; i < n; ++i) {
        scores(i, k) +=
            config.learning_rate * tree.leaf_for(sample[i]->values).value[0];
      }
      model.trees.push_back(std::move(tree));
    }
    double loss = 0;
    for (size_t i = 0; i < n; ++i) {
      Eigen::RowVectorXd s = scores.row(i);
      double m = s.maxCoeff();
      double lse = m + std::log((s.array() - m).exp().sum());
      loss += lse - s[class_index(*sample[i]->label)];
    }
    model.training_loss.push_back(loss / static_cast<double>(n));
  }
  return model;
}

Prediction predict(const EnsembleModel& model, const Vector& values) {
  if (values.size() != static_cast<Eigen::Index>(model.feature_order.size())) {
    throw DomainError("feature dimension " + std::to_string(values.size()) +
                      " does not match model dimension " +
                      std::to_string(model.feature_order.size()));
  }
  Prediction pred;
  Vector probs = Vector::Zero(kNumClasses);
  if (model.kind == ModelKind::RandomForest) {
    for (const DecisionTree& tree : model.trees) {
      probs += tree.leaf_for(values).value;
    }
    probs /= static_cast<double>(model.trees.size());
  } else {
    Vector scores = model.base_scores;
    for (size_t t = 0; t < model.trees.size(); ++t) {
      scores[static_cast<Eigen::Index>(t % kNumClasses)] +=
          model.learning_rate * model.trees[t].leaf_for(values).value[0];
    }
    double m = scores.maxCoeff();
    Vector e = (scores.array() - m).exp();
    probs = e / e.sum();
  }
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  pred.label = model.classes[static_cast<size_t>(best)];
  pred.probabilities = probs;
  return pred;
}

Prediction predict(const EnsembleModel& model, const FeatureRow& row) {
  return predict(model, row.values);
}

std::string save_model(const EnsembleModel& model) {
  std::ostringstream out;
  out << "fluency-model " << kFormatVersion << "\n";
  out << "kind "
      << (model.kind == ModelKind::RandomForest ? "forest" : "boosted") << "\n";
  out << "seed " << model.train_seed << "\n";
  out << "learning_rate " << fmt_hex(model.learning_rate) << "\n";
  out << "base_scores";
  for (Eigen::Index k = 0; k < model.base_scores.size(); ++k) {
    out << ' ' << fmt_hex(model.base_scores[k]);
  }
  out << "\nfeatures";
  for (const std::string& name : model.feature_order) out << ' ' << name;
  out << "\nnum_trees " << model.trees.size() << "\n";
  for (const DecisionTree& tree : model.trees) {
    out << "tree " << tree.nodes.size() << "\n";
    for (const TreeNode& node : tree.nodes) {
      out << "node " << node.feature << ' ' << fmt_hex(node.threshold) << ' '
          << node.left << ' ' << node.right << ' ' << node.value.size();
      for (Eigen::Index k = 0; k < node.value.size(); ++k) {
        out << ' ' << fmt_hex(node.value[k]);
      }
      out << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

EnsembleModel load_model(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  std::string word;
  auto expect = [&](const std::string& token) {
    if (!(in >> word) || word != token) {
      throw ParseError("model file: expected \"" + token + "\", got \"" +
                       word + "\"");
    }
  };
  expect("fluency-model");
  int version = -1;
  if (!(in >> version)) throw ParseError("model file: missing version");
  if (version != kFormatVersion) {
    throw ParseError("unsupported model format version " +
                     std::to_string(version));
  }
  EnsembleModel model;
  expect("kind");
  in >> word;
  if (word == "forest") {
    model.kind = ModelKind::RandomForest;
  } else if (word == "boosted") {
    model.kind = ModelKind::GradientBoosted;
  } else {
    throw ParseError("model file: unknown kind \"" + word + "\"");
  }
  expect("seed");
  if (!(in >> model.train_seed)) throw ParseError("model file: bad seed");
  expect("learning_rate");
  in >> word;
  model.learning_rate = parse_hex(word);
  expect("base_scores");
  model.base_scores = Vector::Zero(kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) {
    if (!(in >> word)) throw ParseError("model file: truncated base_scores");
    model.base_scores[k] = parse_hex(word);
  }
  expect("features");
  model.feature_order.clear();
  while (in >> word && word != "num_trees") model.feature_order.push_back(word);
  if (word != "num_trees") throw ParseError("model file: truncated");
  size_t num_trees = 0;
  if (!(in >> num_trees)) throw ParseError("model file: bad num_trees");
  for (size_t t = 0; t < num_trees; ++t) {
    expect("tree");
    size_t num_nodes = 0;
    if (!(in >> num_nodes) || num_nodes == 0) {
      throw ParseError("model file: bad tree size");
    }
    DecisionTree tree;
    for (size_t i = 0; i < num_nodes; ++i) {
      expect("node");
      TreeNode node;
      Eigen::Index vsize = 0;
      if (!(in >> node.feature >> word)) throw ParseError("model file: truncated node");
      node.threshold = parse_hex(word);
      if (!(in >> node.left >> node.right >> vsize) || vsize < 0) {
        throw ParseError("model file: truncated node");
      }
      node.value = Vector::Zero(vsize);
      for (Eigen::Index k = 0; k < vsize; ++k) {
        if (!(in >> word)) throw ParseError("model file: truncated node value");
        node.value[k] = parse_hex(word);
      }
      if (!node.is_leaf() &&
          (node.left < 0 || node.right < 0 ||
           node.left >= static_cast<int>(num_nodes) ||
           node.right >= static_cast<int>(num_nodes))) {
        throw ParseError("model file: child index out of range");
      }
      tree.nodes.push_back(std::move(node));
    }
    model.trees.push_back(std::move(tree));
  }
  expect("end");
  if (model.trees.empty()) throw ParseError("model file: no trees");
  return model;
}

}  // namespace fluency::ml
