#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fluency/errors.hpp"

namespace fluency {

enum class Language { Malay, Tamil };
enum class TaskType { Reading, Picture };
enum class FluencyLabel { Low, Medium, High };

std::string to_string(Language lang);
std::string to_string(TaskType task);   // "R" / "P", the report serialization
std::string to_string(FluencyLabel label);

Language parse_language(std::string_view s);       // "malay" | "tamil"
TaskType parse_task(std::string_view s);           // "R" | "P"
FluencyLabel parse_label(std::string_view s);      // "low" | "medium" | "high"

// Ordinal encoding used wherever labels enter numeric computations
// (Pearson correlation in particular): Low=1, Medium=2, High=3.
int ordinal_value(FluencyLabel label);
FluencyLabel label_from_ordinal(int ordinal);

// Merges the 1-4 human fluency scores into three classes:
// 1,2 -> Low; 3 -> Medium; 4 -> High.
FluencyLabel map_score_to_label(int score);

struct WordTiming {
  std::string token;
  double start = 0.0;  // seconds
  double end = 0.0;    // seconds, > start
};

struct UtteranceRecord {
  std::string id;
  Language language = Language::Malay;
  TaskType task = TaskType::Reading;
  std::string reference;   // human transcript
  std::string hypothesis;  // ASR output
  std::vector<WordTiming> timings;  // over hypothesis tokens, may be empty
  std::optional<double> audio_duration;
  std::optional<int> human_score;  // 1-4
};

// The ten per-utterance fields fed to the classifiers and the LLM.
struct MetricVector {
  Language language = Language::Malay;
  TaskType task = TaskType::Reading;
  double wer = 0.0;
  double cer = 0.0;
  double per = 0.0;
  double pause_duration = 0.0;  // seconds
  double total_duration = 0.0;  // seconds, > 0
  int num_pauses = 0;
  double speed = 0.0;           // words/minute
  double pause_ratio = 0.0;     // in [0,1]
};

// Names of the eight numeric metric fields, in canonical feature order.
const std::vector<std::string>& metric_field_names();

// Value of one numeric metric field by canonical name; throws DomainError on
// an unknown name.
double metric_field(const MetricVector& vec, std::string_view name);

struct Dataset {
  std::vector<UtteranceRecord> records;
  // Index-aligned with records when non-empty.
  std::vector<MetricVector> metrics;
  std::vector<std::optional<FluencyLabel>> labels;

  bool has_metrics() const { return metrics.size() == records.size(); }
};

// Checks every UtteranceRecord invariant; throws ValidationError naming the
// record id on the first violation.
void validate_record(const UtteranceRecord& record);

}  // namespace fluency
