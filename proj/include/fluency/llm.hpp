#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fluency/types.hpp"

namespace fluency::llm {

// The two-part chat prompt: fixed system content (task, metric semantics,
// I/O format, prototypes, class boundaries) plus one JSON object of
// per-utterance metrics as user content.
struct PromptBundle {
  std::string system_content;
  std::string user_content;
};

// Human-labeled (metric vector, class) examples embedded in the prompt.
struct PrototypeSet {
  std::vector<std::pair<MetricVector, FluencyLabel>> examples;
  int per_class = 0;
};

struct LlmEndpointConfig {
  std::string base_url;           // e.g. http://localhost:8080/v1
  std::string model = "gpt-4o-mini";
  std::string token_env = "FLUENCY_LLM_TOKEN";
  double temperature = 0.0;
  int max_retries = 2;
  double timeout_seconds = 30.0;
  int max_concurrent = 4;
};

struct ScoreResponse {
  FluencyLabel label = FluencyLabel::Low;
  std::string raw;
  int attempts = 0;
};

inline constexpr int kDefaultPrototypesPerClass = 3;

// Seeded per-class uniform sample of labeled records. Records whose id is in
// exclude_ids are never selected, so prototypes cannot leak into the
// evaluation set. Throws ValidationError naming the class when a class has
// fewer than per_class usable records.
PrototypeSet select_prototypes(const Dataset& dataset, int per_class,
                               uint64_t seed,
                               const std::set<std::string>& exclude_ids = {});

// Byte-deterministic prompt construction. excluded_fields removes metric
// keys from both the target object and the rendered prototypes (the
// ablation hook).
PromptBundle build_prompt(const MetricVector& vector,
                          const PrototypeSet& prototypes,
                          const std::vector<std::string>& excluded_fields = {});

// The user-content JSON object on its own (what build_prompt embeds);
// enough to drive stub_evaluate without prototypes.
std::string render_user_content(const MetricVector& vector,
                                const std::vector<std::string>& excluded_fields = {});

// First standalone occurrence of "low"/"medium"/"high" (case-insensitive);
// also accepts a JSON object with a "fluency" key. Throws ParseError when
// neither matches.
FluencyLabel parse_response(std::string_view raw);

// Sends the prompt to a chat-completion endpoint. Malformed replies are
// retried up to max_retries times with an appended clarification turn.
// Throws EndpointError (transport), ParseError (persistent bad output),
// ConfigError (unresolvable auth).
ScoreResponse score_via_llm(const PromptBundle& bundle,
                            const LlmEndpointConfig& config);

struct ScoreOutcome {
  std::optional<ScoreResponse> response;
  std::string error;  // non-empty when response is absent
};

// Batch scoring with at most config.max_concurrent in-flight requests;
// outcomes in input order, per-request failures captured per row.
std::vector<ScoreOutcome> score_batch(const std::vector<PromptBundle>& bundles,
                                      const LlmEndpointConfig& config);

// Offline deterministic stand-in: composite = wer + 0.5*pause_ratio
// (pause_ratio-only when "wer" was ablated away); < 0.15 -> high,
// < 0.45 -> medium, else low.
ScoreResponse stub_evaluate(const PromptBundle& bundle);

}  // namespace fluency::llm
