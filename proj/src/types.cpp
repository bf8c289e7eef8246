#include "fluency/types.hpp"

#include <cmath>

#include "fluency/unicode.hpp"

namespace fluency {

std::string to_string(Language lang) {
  return lang == Language::Malay ? "malay" : "tamil";
}

std::string to_string(TaskType task) {
  return task == TaskType::Reading ? "R" : "P";
}

std::string to_string(FluencyLabel label) {
  switch (label) {
    case FluencyLabel::Low: return "low";
    case FluencyLabel::Medium: return "medium";
    case FluencyLabel::High: return "high";
  }
  return "low";
}

Language parse_language(std::string_view s) {
  if (s == "malay") return Language::Malay;
  if (s == "tamil") return Language::Tamil;
  throw ValidationError("unknown language: \"" + std::string(s) + "\"");
}

TaskType parse_task(std::string_view s) {
  if (s == "R") return TaskType::Reading;
  if (s == "P") return TaskType::Picture;
  throw ValidationError("unknown task: \"" + std::string(s) + "\"");
}

FluencyLabel parse_label(std::string_view s) {
  if (s == "low") return FluencyLabel::Low;
  if (s == "medium") return FluencyLabel::Medium;
  if (s == "high") return FluencyLabel::High;
  throw ValidationError("unknown fluency label: \"" + std::string(s) + "\"");
}

int ordinal_value(FluencyLabel label) {
  switch (label) {
    case FluencyLabel::Low: return 1;
    case FluencyLabel::Medium: return 2;
    case FluencyLabel::High: return 3;
  }
  return 1;
}

FluencyLabel label_from_ordinal(int ordinal) {
  switch (ordinal) {
    case 1: return FluencyLabel::Low;
    case 2: return FluencyLabel::Medium;
    case 3: return FluencyLabel::High;
  }
  throw DomainError("label ordinal out of range: " + std::to_string(ordinal));
}

FluencyLabel map_score_to_label(int score) {
  switch (score) {
    case 1:
    case 2: return FluencyLabel::Low;
    case 3: return FluencyLabel::Medium;
    case 4: return FluencyLabel::High;
  }
  throw DomainError("human_score out of range 1-4: " + std::to_string(score));
}

const std::vector<std::string>& metric_field_names() {
  static const std::vector<std::string> names = {
      "wer",           "cer",        "per",        "pause_duration",
      "total_duration", "num_pauses", "speed",      "pause_ratio"};
  return names;
}

double metric_field(const MetricVector& vec, std::string_view name) {
  if (name == "wer") return vec.wer;
  if (name == "cer") return vec.cer;
  if (name == "per") return vec.per;
  if (name == "pause_duration") return vec.pause_duration;
  if (name == "total_duration") return vec.total_duration;
  if (name == "num_pauses") return static_cast<double>(vec.num_pauses);
  if (name == "speed") return vec.speed;
  if (name == "pause_ratio") return vec.pause_ratio;
  throw DomainError("unknown metric field: \"" + std::string(name) + "\"");
}

void validate_record(const UtteranceRecord& record) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("record \"" + record.id + "\": " + what);
  };
  if (record.id.empty()) throw ValidationError("record with empty id");
  if (record.human_score &&
      (*record.human_score < 1 || *record.human_score > 4)) {
    fail("human_score " + std::to_string(*record.human_score) +
         " outside 1-4");
  }
  if (record.audio_duration &&
      (!std::isfinite(*record.audio_duration) || *record.audio_duration <= 0)) {
    fail("audio_duration must be finite and positive");
  }
  for (size_t i = 0; i < record.timings.size(); ++i) {
    const WordTiming& t = record.timings[i];
    if (!std::isfinite(t.start) || !std::isfinite(t.end)) fail("non-finite timing");
    if (t.start < 0) fail("timing start < 0");
    if (t.end <= t.start) fail("timing end <= start for token \"" + t.token + "\"");
    if (i > 0 && t.start < record.timings[i - 1].end) {
      fail("overlapping timings at index " + std::to_string(i));
    }
  }
  if (!record.timings.empty()) {
    size_t tokens = unicode::split_tokens(record.hypothesis).size();
    if (record.timings.size() != tokens) {
      fail("timing count " + std::to_string(record.timings.size()) +
           " != hypothesis token count " + std::to_string(tokens));
    }
  }
}

}  // namespace fluency
