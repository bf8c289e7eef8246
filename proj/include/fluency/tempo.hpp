#pragma once

#include <vector>

#include "fluency/g2p.hpp"
#include "fluency/types.hpp"

namespace fluency {

inline constexpr double kDefaultPauseThreshold = 0.2;  // seconds

struct PauseStats {
  double pause_duration = 0.0;  // sum of gaps >= threshold
  int num_pauses = 0;
  std::vector<double> gaps;     // every inter-word gap, for diagnostics
};

// Inter-word gap analysis: gap_i = timings[i+1].start - timings[i].end; only
// gaps >= threshold count as pauses. Throws ValidationError on unsorted or
// overlapping timings, DomainError on threshold <= 0.
PauseStats pause_stats(const std::vector<WordTiming>& timings, double threshold);

// audio_duration when present, otherwise the timing span. Throws DomainError
// when neither source is available.
double total_duration(const UtteranceRecord& record);

// words per minute: word_count / total_duration * 60.
double speed(int word_count, double total_duration_s);

double pause_ratio(double pause_duration_s, double total_duration_s);

// Assembles the full ten-field MetricVector for one record.
MetricVector extract_metric_vector(const UtteranceRecord& record,
                                   const RuleTable& table,
                                   double threshold = kDefaultPauseThreshold);

}  // namespace fluency
