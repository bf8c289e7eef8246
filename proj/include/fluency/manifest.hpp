#pragma once

#include <string>
#include <string_view>

#include "fluency/types.hpp"

namespace fluency {

// Parses a line-delimited JSON manifest (one UtteranceRecord per line).
// Throws ParseError with the line number on malformed lines, ValidationError
// with the record id on invariant violations (including duplicate ids).
Dataset parse_manifest(std::string_view bytes);

// Inverse of parse_manifest for valid datasets: one JSON object per line,
// stable key order, LF line endings.
std::string serialize_manifest(const Dataset& dataset);

// CSV export of per-record metrics: header row plus one row per record with
// id, language, task, the 8 numeric metrics at 6 decimal places, and the
// human label when present. Requires metrics attached to every record.
std::string export_metrics(const Dataset& dataset);

// Parses the output of export_metrics back into a Dataset carrying metrics
// and labels (reference/hypothesis/timings are not part of the CSV).
Dataset parse_metrics_csv(std::string_view bytes);

}  // namespace fluency
