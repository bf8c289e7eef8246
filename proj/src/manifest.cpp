#include "fluency/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace fluency {

using nlohmann::json;

namespace {

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

UtteranceRecord record_from_json(const json& obj) {
  UtteranceRecord rec;
  rec.id = obj.at("id").get<std::string>();
  rec.language = parse_language(obj.at("language").get<std::string>());
  rec.task = parse_task(obj.at("task").get<std::string>());
  rec.reference = obj.at("reference").get<std::string>();
  rec.hypothesis = obj.at("hypothesis").get<std::string>();
  if (obj.contains("timings")) {
    for (const json& t : obj.at("timings")) {
      rec.timings.push_back({t.at("token").get<std::string>(),
                             t.at("start").get<double>(),
                             t.at("end").get<double>()});
    }
  }
  if (obj.contains("audio_duration") && !obj.at("audio_duration").is_null()) {
    rec.audio_duration = obj.at("audio_duration").get<double>();
  }
  if (obj.contains("human_score") && !obj.at("human_score").is_null()) {
    if (!obj.at("human_score").is_number_integer()) {
      throw ValidationError("record \"" + rec.id +
                            "\": human_score must be an integer");
    }
    rec.human_score = obj.at("human_score").get<int>();
  }
  return rec;
}

json record_to_json(const UtteranceRecord& rec) {
  json obj;
  obj["id"] = rec.id;
  obj["language"] = to_string(rec.language);
  obj["task"] = to_string(rec.task);
  obj["reference"] = rec.reference;
  obj["hypothesis"] = rec.hypothesis;
  json timings = json::array();
  for (const WordTiming& t : rec.timings) {
    timings.push_back({{"token", t.token}, {"start", t.start}, {"end", t.end}});
  }
  obj["timings"] = timings;
  if (rec.audio_duration) obj["audio_duration"] = *rec.audio_duration;
  if (rec.human_score) obj["human_score"] = *rec.human_score;
  return obj;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

Dataset parse_manifest(std::string_view bytes) {
  Dataset ds;
  std::unordered_set<std::string> seen_ids;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= bytes.size()) {
    size_t eol = bytes.find('\n', pos);
    std::string_view line = bytes.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? bytes.size() + 1 : eol + 1;
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    UtteranceRecord rec;
    try {
      rec = record_from_json(obj);
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    validate_record(rec);
    if (!seen_ids.insert(rec.id).second) {
      throw ValidationError("duplicate record id \"" + rec.id + "\" at line " +
                            std::to_string(line_no));
    }
    std::optional<FluencyLabel> label;
    if (rec.human_score) label = map_score_to_label(*rec.human_score);
    ds.records.push_back(std::move(rec));
    ds.labels.push_back(label);
  }
  return ds;
}

std::string serialize_manifest(const Dataset& dataset) {
  std::string out;
  for (const UtteranceRecord& rec : dataset.records) {
    out += record_to_json(rec).dump();
    out += '\n';
  }
  return out;
}

std::string export_metrics(const Dataset& dataset) {
  if (!dataset.has_metrics()) {
    std::string offender =
        dataset.records.empty() ? std::string("<none>")
                                : dataset.records[dataset.metrics.size()].id;
    throw ValidationError("metrics missing, first offending record \"" +
                          offender + "\"");
  }
  std::string out =
      "id,language,task,wer,cer,per,pause_duration,total_duration,num_pauses,"
      "speed,pause_ratio,human_label\n";
  for (size_t i = 0; i < dataset.records.size(); ++i) {
    const UtteranceRecord& rec = dataset.records[i];
    const MetricVector& m = dataset.metrics[i];
    out += rec.id + ',' + to_string(m.language) + ',' + to_string(m.task);
    for (const std::string& name : metric_field_names()) {
      out += ',' + format_fixed6(metric_field(m, name));
    }
    out += ',';
    if (i < dataset.labels.size() && dataset.labels[i]) {
      out += to_string(*dataset.labels[i]);
    }
    out += '\n';
  }
  return out;
}

Dataset parse_metrics_csv(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty metrics file");
  const std::string expected_header =
      "id,language,task,wer,cer,per,pause_duration,total_duration,num_pauses,"
      "speed,pause_ratio,human_label";
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw ParseError("unexpected metrics header: \"" + line + "\"");
  }
  Dataset ds;
  std::unordered_set<std::string> seen_ids;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 12) {
      throw ParseError("metrics line " + std::to_string(line_no) +
                       ": expected 12 columns, got " +
                       std::to_string(cells.size()));
    }
    UtteranceRecord rec;
    rec.id = cells[0];
    rec.language = parse_language(cells[1]);
    rec.task = parse_task(cells[2]);
    if (!seen_ids.insert(rec.id).second) {
      throw ValidationError("duplicate record id \"" + rec.id + "\" at line " +
                            std::to_string(line_no));
    }
    MetricVector m;
    m.language = rec.language;
    m.task = rec.task;
    try {
      m.wer = std::stod(cells[3]);
      m.cer = std::stod(cells[4]);
      m.per = std::stod(cells[5]);
      m.pause_duration = std::stod(cells[6]);
      m.total_duration = std::stod(cells[7]);
      m.num_pauses = std::stoi(cells[8]);
      m.speed = std::stod(cells[9]);
      m.pause_ratio = std::stod(cells[10]);
    } catch (const std::exception&) {
      throw ParseError("metrics line " + std::to_string(line_no) +
                       ": non-numeric metric cell");
    }
    std::optional<FluencyLabel> label;
    if (!cells[11].empty()) label = parse_label(cells[11]);
    ds.records.push_back(std::move(rec));
    ds.metrics.push_back(m);
    ds.labels.push_back(label);
  }
  return ds;
}

}  // namespace fluency
