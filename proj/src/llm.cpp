#include "fluency/llm.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <map>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace fluency::llm {

using nlohmann::json;

namespace {

bool field_included(const std::string& name,
                    const std::vector<std::string>& excluded) {
  return std::find(excluded.begin(), excluded.end(), name) == excluded.end();
}

json metrics_object(const MetricVector& vec,
                    const std::vector<std::string>& excluded) {
  json obj;
  if (field_included("language", excluded)) obj["language"] = to_string(vec.language);
  if (field_included("task", excluded)) obj["task"] = to_string(vec.task);
  for (const std::string& name : metric_field_names()) {
    if (!field_included(name, excluded)) continue;
    if (name == "num_pauses") {
      obj[name] = vec.num_pauses;
    } else {
      obj[name] = metric_field(vec, name);
    }
  }
  return obj;
}

const char* metric_description(const std::string& name) {
  static const std::map<std::string, const char*> descriptions = {
      {"wer", "word error rate against the reference transcript (lower is better)"},
      {"cer", "character error rate over grapheme clusters (lower is better)"},
      {"per", "phoneme error rate after IPA conversion (lower is better)"},
      {"pause_duration", "total seconds of inter-word pauses"},
      {"total_duration", "total seconds of the utterance"},
      {"num_pauses", "number of inter-word pauses"},
      {"speed", "speaking rate in words per minute"},
      {"pause_ratio", "fraction of the utterance spent pausing (0 to 1)"}};
  auto it = descriptions.find(name);
  return it == descriptions.end() ? "" : it->second;
}

}  // namespace

PrototypeSet select_prototypes(const Dataset& dataset, int per_class,
                               uint64_t seed,
                               const std::set<std::string>& exclude_ids) {
  if (per_class < 1) throw DomainError("per_class must be >= 1");
  if (!dataset.has_metrics()) {
    throw ValidationError("prototype selection requires extracted metrics");
  }
  std::vector<std::vector<size_t>> by_class(3);
  for (size_t i = 0; i < dataset.records.size(); ++i) {
    if (i >= dataset.labels.size() || !dataset.labels[i]) continue;
    if (exclude_ids.count(dataset.records[i].id)) continue;
    by_class[ordinal_value(*dataset.labels[i]) - 1].push_back(i);
  }
  std::mt19937_64 rng(seed);
  PrototypeSet set;
  set.per_class = per_class;
  for (int c = 0; c < 3; ++c) {
    std::vector<size_t>& pool = by_class[c];
    FluencyLabel label = label_from_ordinal(c + 1);
    if (pool.size() < static_cast<size_t>(per_class)) {
      throw ValidationError("not enough labeled records for class \"" +
                            to_string(label) + "\": have " +
                            std::to_string(pool.size()) + ", need " +
                            std::to_string(per_class));
    }
    for (int k = 0; k < per_class; ++k) {
      std::uniform_int_distribution<size_t> pick(k, pool.size() - 1);
      size_t j = pick(rng);
      std::swap(pool[k], pool[j]);
      set.examples.emplace_back(dataset.metrics[pool[k]], label);
    }
  }
  return set;
}

PromptBundle build_prompt(const MetricVector& vector,
                          const PrototypeSet& prototypes,
                          const std::vector<std::string>& excluded_fields) {
  if (prototypes.examples.empty()) {
    throw ValidationError("prototype set is empty");
  }
  std::string sys;
  sys += "You are an expert evaluator of children's oral reading fluency in "
         "Malay and Tamil.\n";
  sys += "Task: given objective metrics extracted from an automatic "
         "transcription of one spoken utterance, assign a fluency class.\n\n";
  sys += "Metric semantics:\n";
  for (const std::string& name : metric_field_names()) {
    if (!field_included(name, excluded_fields)) continue;
    sys += "- " + name + ": " + metric_description(name) + "\n";
  }
  if (field_included("language", excluded_fields)) {
    sys += "- language: \"malay\" or \"tamil\"\n";
  }
  if (field_included("task", excluded_fields)) {
    sys += "- task: \"R\" (reading) or \"P\" (picture Q&A)\n";
  }
  sys += "\nClass boundaries:\n";
  sys += "- high: accurate, steady speech with few errors and few pauses\n";
  sys += "- medium: noticeable errors or hesitations but mostly intelligible\n";
  sys += "- low: frequent errors, long or frequent pauses, halting delivery\n";
  sys += "\nLabeled examples:\n";
  for (const auto& [metrics, label] : prototypes.examples) {
    sys += metrics_object(metrics, excluded_fields).dump();
    sys += " -> " + to_string(label) + "\n";
  }
  sys += "\nInput format: one JSON object with the metric fields above.\n";
  sys += "Output format: respond with exactly one of: low, medium, high\n";

  PromptBundle bundle;
  bundle.system_content = std::move(sys);
  bundle.user_content = metrics_object(vector, excluded_fields).dump();
  return bundle;
}

std::string render_user_content(const MetricVector& vector,
                                const std::vector<std::string>& excluded_fields) {
  return metrics_object(vector, excluded_fields).dump();
}

FluencyLabel parse_response(std::string_view raw) {
  std::string word;
  for (size_t i = 0; i <= raw.size(); ++i) {
    char c = i < raw.size() ? raw[i] : ' ';
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      if (word == "low" || word == "medium" || word == "high") {
        return parse_label(word);
      }
      word.clear();
    }
  }
  // Fall back to a structured reply: {"fluency": ...}
  try {
    json obj = json::parse(raw);
    if (obj.is_object() && obj.contains("fluency")) {
      const json& v = obj["fluency"];
      if (v.is_string()) return parse_label(v.get<std::string>());
      if (v.is_number_integer()) return label_from_ordinal(v.get<int>());
    }
  } catch (const std::exception&) {
  }
  std::string prefix(raw.substr(0, 120));
  throw ParseError("no fluency class in response: \"" + prefix + "\"");
}

namespace {

struct EndpointParts {
  std::string host;       // scheme://host[:port]
  std::string path_prefix;
};

EndpointParts split_base_url(const std::string& base_url) {
  size_t scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint URL must include a scheme: " + base_url);
  }
  size_t slash = base_url.find('/', scheme + 3);
  EndpointParts parts;
  if (slash == std::string::npos) {
    parts.host = base_url;
  } else {
    parts.host = base_url.substr(0, slash);
    parts.path_prefix = base_url.substr(slash);
    while (!parts.path_prefix.empty() && parts.path_prefix.back() == '/') {
      parts.path_prefix.pop_back();
    }
  }
  return parts;
}

}  // namespace

ScoreResponse score_via_llm(const PromptBundle& bundle,
                            const LlmEndpointConfig& config) {
  if (config.base_url.empty()) throw ConfigError("no endpoint URL configured");
  std::string token;
  if (!config.token_env.empty()) {
    const char* value = std::getenv(config.token_env.c_str());
    if (value == nullptr) {
      throw ConfigError("auth token environment variable " + config.token_env +
                        " is not set");
    }
    token = value;
  }
  EndpointParts parts = split_base_url(config.base_url);
  httplib::Client client(parts.host);
  client.set_connection_timeout(static_cast<time_t>(config.timeout_seconds), 0);
  client.set_read_timeout(static_cast<time_t>(config.timeout_seconds), 0);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", bundle.system_content}});
  messages.push_back({{"role", "user"}, {"content", bundle.user_content}});

  std::string last_error;
  std::string last_raw;
  bool saw_reply = false;
  int attempts = 0;
  for (; attempts <= config.max_retries; ++attempts) {
    json body = {{"model", config.model},
                 {"temperature", config.temperature},
                 {"messages", messages}};
    auto res = client.Post(parts.path_prefix + "/chat/completions", headers,
                           body.dump(), "application/json");
    if (!res || res->status < 200 || res->status >= 300) {
      last_error = res ? "HTTP status " + std::to_string(res->status)
                       : "transport error: " + httplib::to_string(res.error());
      continue;
    }
    std::string content;
    try {
      json reply = json::parse(res->body);
      content = reply.at("choices").at(0).at("message").at("content")
                    .get<std::string>();
    } catch (const std::exception& e) {
      last_error = std::string("malformed completion body: ") + e.what();
      continue;
    }
    saw_reply = true;
    last_raw = content;
    try {
      ScoreResponse response;
      response.label = parse_response(content);
      response.raw = content;
      response.attempts = attempts + 1;
      return response;
    } catch (const ParseError&) {
      messages.push_back({{"role", "assistant"}, {"content", content}});
      messages.push_back(
          {{"role", "user"},
           {"content",
            "Respond with exactly one of: low, medium, high"}});
    }
  }
  if (saw_reply) {
    throw ParseError("no fluency class after " + std::to_string(attempts) +
                     " attempts; last reply: \"" + last_raw + "\"");
  }
  throw EndpointError("endpoint failed after " + std::to_string(attempts) +
                      " attempts: " + last_error);
}

std::vector<ScoreOutcome> score_batch(const std::vector<PromptBundle>& bundles,
                                      const LlmEndpointConfig& config) {
  if (config.max_concurrent < 1) throw ConfigError("max_concurrent must be >= 1");
  std::vector<ScoreOutcome> outcomes(bundles.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= bundles.size()) return;
      try {
        outcomes[i].response = score_via_llm(bundles[i], config);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  size_t threads = std::min<size_t>(config.max_concurrent, bundles.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return outcomes;
}

ScoreResponse stub_evaluate(const PromptBundle& bundle) {
  json obj;
  try {
    obj = json::parse(bundle.user_content);
  } catch (const std::exception& e) {
    throw ParseError(std::string("malformed user_content: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError("user_content is not an object");
  double composite = 0.0;
  if (obj.contains("wer")) composite += obj["wer"].get<double>();
  if (obj.contains("pause_ratio")) {
    composite += 0.5 * obj["pause_ratio"].get<double>();
  }
  ScoreResponse response;
  response.label = composite < 0.15   ? FluencyLabel::High
                   : composite < 0.45 ? FluencyLabel::Medium
                                      : FluencyLabel::Low;
  response.raw = to_string(response.label);
  response.attempts = 1;
  return response;
}

}  // namespace fluency::llm
