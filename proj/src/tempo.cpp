#include "fluency/tempo.hpp"

#include <cmath>

#include "fluency/alignment.hpp"
#include "fluency/unicode.hpp"

namespace fluency {

PauseStats pause_stats(const std::vector<WordTiming>& timings, double threshold) {
  if (threshold <= 0) throw DomainError("pause threshold must be > 0");
  PauseStats stats;
  for (size_t i = 0; i + 1 < timings.size(); ++i) {
    if (timings[i].end <= timings[i].start) {
      throw ValidationError("timing end <= start at index " + std::to_string(i));
    }
    double gap = timings[i + 1].start - timings[i].end;
    if (gap < 0) {
      throw ValidationError("overlapping timings at index " +
                            std::to_string(i + 1));
    }
    stats.gaps.push_back(gap);
    // tolerance: a gap computed as a difference of timestamps (e.g. 0.7-0.5)
    // can land one ulp short of an exactly-representable threshold
    if (gap >= threshold - 1e-9) {
      stats.pause_duration += gap;
      ++stats.num_pauses;
    }
  }
  return stats;
}

double total_duration(const UtteranceRecord& record) {
  if (record.audio_duration) return *record.audio_duration;
  if (!record.timings.empty()) {
    return record.timings.back().end - record.timings.front().start;
  }
  throw DomainError("record \"" + record.id + "\": no duration source");
}

double speed(int word_count, double total_duration_s) {
  if (total_duration_s <= 0) throw DomainError("total_duration must be > 0");
  return static_cast<double>(word_count) / total_duration_s * 60.0;
}

double pause_ratio(double pause_duration_s, double total_duration_s) {
  if (total_duration_s <= 0) throw DomainError("total_duration must be > 0");
  if (pause_duration_s < 0 || pause_duration_s > total_duration_s) {
    throw DomainError("pause_duration outside [0, total_duration]");
  }
  return pause_duration_s / total_duration_s;
}

MetricVector extract_metric_vector(const UtteranceRecord& record,
                                   const RuleTable& table, double threshold) {
  if (table.language != record.language) {
    throw DomainError("record \"" + record.id +
                      "\": rule table language mismatch");
  }
  MetricVector m;
  m.language = record.language;
  m.task = record.task;
  m.wer = wer(record.reference, record.hypothesis);
  m.cer = cer(record.reference, record.hypothesis);
  m.per = per(transcribe_utterance(record.reference, table),
              transcribe_utterance(record.hypothesis, table));
  PauseStats ps = pause_stats(record.timings, threshold);
  m.pause_duration = ps.pause_duration;
  m.num_pauses = ps.num_pauses;
  m.total_duration = total_duration(record);
  int words = static_cast<int>(unicode::split_tokens(record.hypothesis).size());
  m.speed = speed(words, m.total_duration);
  m.pause_ratio = pause_ratio(m.pause_duration, m.total_duration);
  return m;
}

}  // namespace fluency
