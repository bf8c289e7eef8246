#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fluency/types.hpp"

namespace fluency::eval {

struct EvaluationReport {
  std::optional<double> pearson_r;  // absent when undefined (zero variance)
  double accuracy = 0.0;            // plain accuracy
  double balanced_accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::array<std::array<int64_t, 3>, 3> confusion{};  // [true][predicted]
  size_t n = 0;
};

// Product-moment correlation. Throws DomainError on length mismatch,
// fewer than 2 points, or zero variance on either side.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Mean per-class recall over classes present in truth.
double balanced_accuracy(const std::vector<FluencyLabel>& truth,
                         const std::vector<FluencyLabel>& pred);

// Support-weighted mean of per-class F1; F1 is 0 where precision+recall is 0.
double weighted_f1(const std::vector<FluencyLabel>& truth,
                   const std::vector<FluencyLabel>& pred);

// All of the above plus confusion counts in one pass. Labels enter Pearson
// via their ordinal values; an undefined correlation leaves pearson_r unset
// while the other metrics are still computed.
EvaluationReport evaluate(const std::vector<FluencyLabel>& truth,
                          const std::vector<FluencyLabel>& pred);

// Predicts a label per dataset record, with the named metric features
// removed from its inputs (empty list = baseline).
using AblationScorer = std::function<std::vector<FluencyLabel>(
    const Dataset& dataset, const std::vector<std::string>& excluded_features)>;

struct AblationRow {
  std::string excluded_feature;
  std::optional<EvaluationReport> report;
  std::string error;  // non-empty when the scorer failed on this cell
};

struct AblationReport {
  EvaluationReport baseline;
  std::vector<AblationRow> rows;  // one per excluded feature, input order
};

// Re-evaluates the scorer once per excluded feature plus a baseline with
// nothing excluded. Requires human labels on every record.
AblationReport run_ablation(const Dataset& dataset, const AblationScorer& scorer,
                            const std::vector<std::string>& features =
                                metric_field_names());

// Plain-text table, one row per (method, report): Corr, Acc, BalAcc, F1.
std::string render_report_table(
    const std::vector<std::pair<std::string, EvaluationReport>>& rows);

std::string render_ablation_table(const AblationReport& report);

// Machine-readable JSON mirrors of the tables above.
std::string report_to_json(const EvaluationReport& report);
std::string ablation_to_json(const AblationReport& report);

}  // namespace fluency::eval
