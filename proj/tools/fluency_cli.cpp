// fluency: extract objective metrics from ASR transcripts, score fluency with
// ensemble classifiers or an LLM meta-evaluator, and evaluate predictions
// against human labels.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "fluency/evaluation.hpp"
#include "fluency/llm.hpp"
#include "fluency/manifest.hpp"
#include "fluency/ml.hpp"
#include "fluency/tempo.hpp"

#ifndef FLUENCY_DATA_DIR
#define FLUENCY_DATA_DIR "data"
#endif

namespace {

using namespace fluency;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Temp file in the target directory, then rename; partial output never
// lands under the final name.
void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path dir = target.parent_path().empty() ? "." : target.parent_path();
  fs::path tmp = dir / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

std::string default_rules_path(Language language) {
  return std::string(FLUENCY_DATA_DIR) + "/g2p/" + to_string(language) +
         ".rules";
}

struct SharedOptions {
  uint64_t seed = 42;
};

struct LlmOptions {
  llm::LlmEndpointConfig config;
  int prototypes_per_class = llm::kDefaultPrototypesPerClass;
  std::string prototypes_path;  // labeled metrics CSV; input file when empty
};

void add_llm_flags(CLI::App* cmd, LlmOptions& opts) {
  cmd->add_option("--endpoint", opts.config.base_url,
                  "Chat-completion endpoint base URL");
  cmd->add_option("--llm-model", opts.config.model, "Model name");
  cmd->add_option("--temperature", opts.config.temperature, "Sampling temperature");
  cmd->add_option("--token-env", opts.config.token_env,
                  "Environment variable holding the bearer token");
  cmd->add_option("--max-retries", opts.config.max_retries, "Retries per request");
  cmd->add_option("--max-concurrent", opts.config.max_concurrent,
                  "Maximum in-flight requests");
  cmd->add_option("--timeout", opts.config.timeout_seconds, "Request timeout (s)");
  cmd->add_option("--prototypes-per-class", opts.prototypes_per_class,
                  "Prototype examples per fluency class");
  cmd->add_option("--prototypes", opts.prototypes_path,
                  "Labeled metrics CSV to draw prototypes from");
}

std::string predictions_csv(const Dataset& dataset,
                            const std::vector<FluencyLabel>& labels,
                            const std::vector<ml::Prediction>* probs) {
  std::string out = "id,predicted,prob_low,prob_medium,prob_high\n";
  for (size_t i = 0; i < dataset.records.size(); ++i) {
    out += dataset.records[i].id + ',' + to_string(labels[i]);
    if (probs != nullptr) {
      for (int c = 0; c < 3; ++c) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), ",%.6f", (*probs)[i].probabilities[c]);
        out += buf;
      }
    } else {
      out += ",,,";
    }
    out += '\n';
  }
  return out;
}

int run_extract(const std::string& manifest_path, const std::string& output,
                double threshold, std::string malay_rules,
                std::string tamil_rules, bool strict) {
  Dataset ds = parse_manifest(read_file(manifest_path));
  std::map<Language, RuleTable> tables;
  Dataset out;
  for (size_t i = 0; i < ds.records.size(); ++i) {
    const UtteranceRecord& rec = ds.records[i];
    auto it = tables.find(rec.language);
    if (it == tables.end()) {
      std::string path = rec.language == Language::Malay ? malay_rules
                                                         : tamil_rules;
      if (path.empty()) path = default_rules_path(rec.language);
      it = tables.emplace(rec.language,
                          load_rule_table_file(path, rec.language)).first;
      for (char32_t cp : it->second.uncovered) {
        std::fprintf(stderr, "warning: %s rules leave U+%04X uncovered\n",
                     to_string(rec.language).c_str(), (unsigned)cp);
      }
    }
    try {
      out.records.push_back(rec);
      out.labels.push_back(ds.labels[i]);
      out.metrics.push_back(extract_metric_vector(rec, it->second, threshold));
    } catch (const std::exception& e) {
      if (strict) throw;
      std::fprintf(stderr, "warning: skipping record \"%s\": %s\n",
                   rec.id.c_str(), e.what());
      out.records.pop_back();
      out.labels.pop_back();
    }
  }
  write_file_atomic(output, export_metrics(out));
  std::fprintf(stderr, "extracted metrics for %zu records -> %s\n",
               out.records.size(), output.c_str());
  return kExitOk;
}

std::vector<ml::FeatureRow> labeled_rows(const Dataset& ds,
                                         const std::vector<std::string>& order) {
  std::vector<ml::FeatureRow> rows;
  for (size_t i = 0; i < ds.records.size(); ++i) {
    if (!ds.labels[i]) throw ValidationError("labels required on every row");
    rows.push_back(ml::make_feature_row(ds.metrics[i], ds.labels[i], order));
  }
  return rows;
}

int run_train(const std::string& metrics_path, const std::string& output,
              const std::string& kind, uint64_t seed, int trees, int rounds,
              double learning_rate, int max_depth) {
  Dataset ds = parse_metrics_csv(read_file(metrics_path));
  std::vector<ml::FeatureRow> rows = labeled_rows(ds, ml::default_feature_order());
  ml::EnsembleModel model;
  if (kind == "forest") {
    ml::ForestConfig config;
    config.num_trees = trees;
    model = ml::train_forest(rows, config, seed);
  } else {
    ml::BoostConfig config;
    config.rounds = rounds;
    config.learning_rate = learning_rate;
    config.max_depth = max_depth;
    model = ml::train_boosted(rows, config, seed);
  }
  write_file_atomic(output, ml::save_model(model));
  int counts[3] = {0, 0, 0};
  for (const auto& row : rows) counts[ordinal_value(*row.label) - 1]++;
  std::fprintf(stderr,
               "trained %s on %zu rows (low=%d medium=%d high=%d), seed %llu "
               "-> %s\n",
               kind.c_str(), rows.size(), counts[0], counts[1], counts[2],
               (unsigned long long)seed, output.c_str());
  return kExitOk;
}

llm::PrototypeSet load_prototypes(const Dataset& input_ds,
                                  const LlmOptions& opts, uint64_t seed) {
  if (!opts.prototypes_path.empty()) {
    Dataset proto_ds = parse_metrics_csv(read_file(opts.prototypes_path));
    std::set<std::string> exclude;
    for (const UtteranceRecord& rec : input_ds.records) exclude.insert(rec.id);
    return llm::select_prototypes(proto_ds, opts.prototypes_per_class, seed,
                                  exclude);
  }
  return llm::select_prototypes(input_ds, opts.prototypes_per_class, seed);
}

int run_score(const std::string& metrics_path, const std::string& output,
              const std::string& scorer, const std::string& model_path,
              const LlmOptions& llm_opts, uint64_t seed,
              bool continue_on_error) {
  Dataset ds = parse_metrics_csv(read_file(metrics_path));
  std::vector<FluencyLabel> labels;
  if (scorer == "model") {
    if (model_path.empty()) {
      throw CLI::ValidationError("--model", "model path required for scorer 'model'");
    }
    ml::EnsembleModel model = ml::load_model(read_file(model_path));
    std::vector<ml::Prediction> preds;
    for (const MetricVector& m : ds.metrics) {
      preds.push_back(ml::predict(
          model, ml::make_feature_row(m, std::nullopt, model.feature_order)));
    }
    for (const auto& p : preds) labels.push_back(p.label);
    write_file_atomic(output, predictions_csv(ds, labels, &preds));
  } else if (scorer == "stub") {
    for (const MetricVector& m : ds.metrics) {
      llm::PromptBundle bundle;
      bundle.user_content = llm::render_user_content(m);
      labels.push_back(llm::stub_evaluate(bundle).label);
    }
    write_file_atomic(output, predictions_csv(ds, labels, nullptr));
  } else {  // llm
    llm::PrototypeSet prototypes = load_prototypes(ds, llm_opts, seed);
    std::vector<llm::PromptBundle> bundles;
    for (const MetricVector& m : ds.metrics) {
      bundles.push_back(llm::build_prompt(m, prototypes));
    }
    std::vector<llm::ScoreOutcome> outcomes =
        llm::score_batch(bundles, llm_opts.config);
    std::string out = "id,predicted,error\n";
    size_t failures = 0;
    for (size_t i = 0; i < outcomes.size(); ++i) {
      out += ds.records[i].id + ',';
      if (outcomes[i].response) {
        out += to_string(outcomes[i].response->label) + ",";
      } else {
        ++failures;
        std::string msg = outcomes[i].error;
        for (char& c : msg) {
          if (c == ',' || c == '\n') c = ' ';
        }
        out += "," + msg;
        if (!continue_on_error) {
          throw EndpointError("scoring failed for record \"" +
                              ds.records[i].id + "\": " + outcomes[i].error);
        }
      }
      out += '\n';
    }
    write_file_atomic(output, out);
    std::fprintf(stderr, "scored %zu records (%zu failures) -> %s\n",
                 outcomes.size(), failures, output.c_str());
    return kExitOk;
  }
  std::fprintf(stderr, "scored %zu records -> %s\n", labels.size(),
               output.c_str());
  return kExitOk;
}

std::map<std::string, FluencyLabel> load_predictions(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty predictions file");
  std::map<std::string, FluencyLabel> preds;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t c1 = line.find(',');
    if (c1 == std::string::npos) throw ParseError("bad predictions line: " + line);
    size_t c2 = line.find(',', c1 + 1);
    std::string label = line.substr(
        c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1);
    if (label.empty()) continue;  // failed row
    preds[line.substr(0, c1)] = parse_label(label);
  }
  return preds;
}

int run_evaluate(const std::string& predictions_path,
                 const std::string& truth_path, const std::string& method,
                 const std::string& json_output, uint64_t seed) {
  Dataset truth_ds = parse_metrics_csv(read_file(truth_path));
  std::map<std::string, FluencyLabel> preds = load_predictions(predictions_path);
  std::vector<FluencyLabel> truth, pred;
  std::vector<std::string> missing;
  for (size_t i = 0; i < truth_ds.records.size(); ++i) {
    if (!truth_ds.labels[i]) {
      throw ValidationError("truth record \"" + truth_ds.records[i].id +
                            "\" has no human label");
    }
    auto it = preds.find(truth_ds.records[i].id);
    if (it == preds.end()) {
      missing.push_back(truth_ds.records[i].id);
      continue;
    }
    truth.push_back(*truth_ds.labels[i]);
    pred.push_back(it->second);
  }
  if (!missing.empty()) {
    std::string ids;
    for (const std::string& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw ValidationError("predictions missing for ids: " + ids);
  }
  eval::EvaluationReport report = eval::evaluate(truth, pred);
  std::printf("seed: %llu\n%s", (unsigned long long)seed,
              eval::render_report_table({{method, report}}).c_str());
  if (!json_output.empty()) {
    write_file_atomic(json_output, eval::report_to_json(report));
  }
  return kExitOk;
}

int run_ablate(const std::string& metrics_path, const std::string& scorer_name,
               const std::string& output, const std::string& json_output,
               uint64_t seed, double train_fraction, const LlmOptions& llm_opts) {
  Dataset ds = parse_metrics_csv(read_file(metrics_path));
  if (ds.records.empty()) throw ValidationError("no records in metrics file");
  for (const auto& label : ds.labels) {
    if (!label) throw ValidationError("ablation requires labels on every row");
  }

  // Split control: train on the first fraction (after a seeded shuffle),
  // evaluate on everything.
  eval::AblationScorer scorer;
  if (scorer_name == "forest" || scorer_name == "boosted") {
    scorer = [&, scorer_name](const Dataset& data,
                              const std::vector<std::string>& excluded) {
      std::vector<std::string> order;
      for (const std::string& name : ml::default_feature_order()) {
        if (std::find(excluded.begin(), excluded.end(), name) == excluded.end()) {
          order.push_back(name);
        }
      }
      std::vector<size_t> indices(data.records.size());
      for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
      std::mt19937_64 rng(seed);
      std::shuffle(indices.begin(), indices.end(), rng);
      size_t train_n = std::max<size_t>(
          2, static_cast<size_t>(train_fraction * indices.size()));
      train_n = std::min(train_n, indices.size());
      std::vector<ml::FeatureRow> rows;
      for (size_t k = 0; k < train_n; ++k) {
        size_t i = indices[k];
        rows.push_back(ml::make_feature_row(data.metrics[i], data.labels[i], order));
      }
      ml::EnsembleModel model;
      if (scorer_name == "forest") {
        ml::ForestConfig config;
        config.feature_order = order;
        model = ml::train_forest(rows, config, seed);
      } else {
        ml::BoostConfig config;
        config.feature_order = order;
        model = ml::train_boosted(rows, config, seed);
      }
      std::vector<FluencyLabel> out;
      for (const MetricVector& m : data.metrics) {
        out.push_back(
            ml::predict(model, ml::make_feature_row(m, std::nullopt, order)).label);
      }
      return out;
    };
  } else if (scorer_name == "stub") {
    scorer = [](const Dataset& data, const std::vector<std::string>& excluded) {
      std::vector<FluencyLabel> out;
      for (const MetricVector& m : data.metrics) {
        llm::PromptBundle bundle;
        bundle.user_content = llm::render_user_content(m, excluded);
        out.push_back(llm::stub_evaluate(bundle).label);
      }
      return out;
    };
  } else {  // llm-live
    scorer = [&](const Dataset& data, const std::vector<std::string>& excluded) {
      llm::PrototypeSet prototypes = load_prototypes(data, llm_opts, seed);
      std::vector<llm::PromptBundle> bundles;
      for (const MetricVector& m : data.metrics) {
        bundles.push_back(llm::build_prompt(m, prototypes, excluded));
      }
      std::vector<llm::ScoreOutcome> outcomes =
          llm::score_batch(bundles, llm_opts.config);
      std::vector<FluencyLabel> out;
      for (size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].response) {
          throw EndpointError("record \"" + data.records[i].id + "\": " +
                              outcomes[i].error);
        }
        out.push_back(outcomes[i].response->label);
      }
      return out;
    };
  }

  eval::AblationReport report = eval::run_ablation(ds, scorer);
  std::string table = "seed: " + std::to_string(seed) + "\n" +
                      eval::render_ablation_table(report);
  std::printf("%s", table.c_str());
  if (!output.empty()) write_file_atomic(output, table);
  if (!json_output.empty()) {
    write_file_atomic(json_output, eval::ablation_to_json(report));
  }
  return kExitOk;
}

int run_prompt_preview(const std::string& metrics_path, const std::string& id,
                       const LlmOptions& llm_opts, uint64_t seed) {
  Dataset ds = parse_metrics_csv(read_file(metrics_path));
  size_t index = 0;
  if (!id.empty()) {
    bool found = false;
    for (size_t i = 0; i < ds.records.size(); ++i) {
      if (ds.records[i].id == id) {
        index = i;
        found = true;
        break;
      }
    }
    if (!found) throw ValidationError("no record with id \"" + id + "\"");
  }
  if (ds.records.empty()) throw ValidationError("no records in metrics file");
  llm::PrototypeSet prototypes = load_prototypes(ds, llm_opts, seed);
  llm::PromptBundle bundle = llm::build_prompt(ds.metrics[index], prototypes);
  std::printf("--- system content ---\n%s--- user content ---\n%s\n",
              bundle.system_content.c_str(), bundle.user_content.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluency assessment toolkit: metrics, classifiers, evaluation"};
  app.require_subcommand(1);
  SharedOptions shared;
  app.add_option("--seed", shared.seed, "Random seed (echoed in reports)");

  // extract
  auto* extract = app.add_subcommand("extract", "Compute per-utterance metrics");
  std::string manifest_path, output = "metrics.csv";
  std::string malay_rules, tamil_rules;
  double threshold = kDefaultPauseThreshold;
  bool strict = false;
  extract->add_option("manifest", manifest_path, "Manifest (JSON lines)")->required();
  extract->add_option("-o,--output", output, "Output metrics CSV");
  extract->add_option("--pause-threshold", threshold, "Minimum pause gap (s)");
  extract->add_option("--malay-rules", malay_rules, "Malay G2P rule file");
  extract->add_option("--tamil-rules", tamil_rules, "Tamil G2P rule file");
  extract->add_flag("--strict", strict, "Abort on any bad record");

  // train
  auto* train = app.add_subcommand("train", "Train an ensemble classifier");
  std::string train_metrics, model_out = "model.txt", kind = "forest";
  int trees = 100, rounds = 100, max_depth = 6;
  double learning_rate = 0.3;
  train->add_option("metrics", train_metrics, "Labeled metrics CSV")->required();
  train->add_option("-o,--output", model_out, "Output model file");
  train->add_option("--kind", kind, "forest | boosted")
      ->check(CLI::IsMember({"forest", "boosted"}));
  train->add_option("--trees", trees, "Forest size");
  train->add_option("--rounds", rounds, "Boosting rounds");
  train->add_option("--learning-rate", learning_rate, "Boosting learning rate");
  train->add_option("--max-depth", max_depth, "Boosting tree depth");

  // score
  auto* score = app.add_subcommand("score", "Predict fluency labels");
  std::string score_metrics, score_out = "predictions.csv", scorer = "model";
  std::string model_path;
  bool continue_on_error = false;
  LlmOptions score_llm;
  score->add_option("metrics", score_metrics, "Metrics CSV")->required();
  score->add_option("-o,--output", score_out, "Output predictions CSV");
  score->add_option("--scorer", scorer, "model | stub | llm")
      ->check(CLI::IsMember({"model", "stub", "llm"}));
  score->add_option("--model", model_path, "Trained model file");
  bool use_stub = false;
  score->add_flag("--stub", use_stub, "Use the offline stub scorer");
  score->add_flag("--continue-on-error", continue_on_error,
                  "Annotate per-row endpoint failures instead of aborting");
  add_llm_flags(score, score_llm);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compare predictions to labels");
  std::string pred_path, truth_path, method = "run", eval_json;
  evaluate->add_option("predictions", pred_path, "Predictions CSV")->required();
  evaluate->add_option("truth", truth_path, "Labeled metrics CSV")->required();
  evaluate->add_option("--method", method, "Row label in the report");
  evaluate->add_option("--json", eval_json, "Also write a JSON report");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Per-feature ablation study");
  std::string ablate_metrics, ablate_scorer = "stub", ablate_out, ablate_json;
  double train_fraction = 1.0;
  LlmOptions ablate_llm;
  ablate->add_option("metrics", ablate_metrics, "Labeled metrics CSV")->required();
  ablate->add_option("--scorer", ablate_scorer,
                     "forest | boosted | stub | llm-live")
      ->check(CLI::IsMember({"forest", "boosted", "stub", "llm-live"}));
  ablate->add_option("-o,--output", ablate_out, "Output table file");
  ablate->add_option("--json", ablate_json, "Also write a JSON report");
  ablate->add_option("--train-fraction", train_fraction,
                     "Fraction of rows used for (re)training")
      ->check(CLI::Range(0.0, 1.0));
  add_llm_flags(ablate, ablate_llm);

  // prompt-preview
  auto* preview = app.add_subcommand("prompt-preview",
                                     "Dump the exact prompt for one record");
  std::string preview_metrics, preview_id;
  LlmOptions preview_llm;
  preview->add_option("metrics", preview_metrics, "Labeled metrics CSV")->required();
  preview->add_option("--id", preview_id, "Record id (default: first record)");
  add_llm_flags(preview, preview_llm);

  try {
    app.parse(argc, argv);
    if (extract->parsed()) {
      return run_extract(manifest_path, output, threshold, malay_rules,
                         tamil_rules, strict);
    }
    if (train->parsed()) {
      return run_train(train_metrics, model_out, kind, shared.seed, trees,
                       rounds, learning_rate, max_depth);
    }
    if (score->parsed()) {
      if (use_stub) scorer = "stub";
      return run_score(score_metrics, score_out, scorer, model_path, score_llm,
                       shared.seed, continue_on_error);
    }
    if (evaluate->parsed()) {
      return run_evaluate(pred_path, truth_path, method, eval_json, shared.seed);
    }
    if (ablate->parsed()) {
      return run_ablate(ablate_metrics, ablate_scorer, ablate_out, ablate_json,
                        shared.seed, train_fraction, ablate_llm);
    }
    if (preview->parsed()) {
      return run_prompt_preview(preview_metrics, preview_id, preview_llm,
                                shared.seed);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const EndpointError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
