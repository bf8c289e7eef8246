#include "fluency/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Core>
#include <json.hpp>

namespace fluency::eval {

using nlohmann::json;

namespace {

void check_lengths(size_t a, size_t b) {
  if (a != b) {
    throw DomainError("label list length mismatch: " + std::to_string(a) +
                      " vs " + std::to_string(b));
  }
  if (a == 0) throw DomainError("label lists are empty");
}

std::array<std::array<int64_t, 3>, 3> confusion_matrix(
    const std::vector<FluencyLabel>& truth,
    const std::vector<FluencyLabel>& pred) {
  std::array<std::array<int64_t, 3>, 3> confusion{};
  for (size_t i = 0; i < truth.size(); ++i) {
    confusion[ordinal_value(truth[i]) - 1][ordinal_value(pred[i]) - 1] += 1;
  }
  return confusion;
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%8.3f", v);
  return buf;
}

}  // namespace

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  check_lengths(x.size(), y.size());
  if (x.size() < 2) throw DomainError("pearson needs at least 2 points");
  Eigen::Map<const Eigen::VectorXd> vx(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::Map<const Eigen::VectorXd> vy(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::VectorXd cx = vx.array() - vx.mean();
  Eigen::VectorXd cy = vy.array() - vy.mean();
  double nx = cx.norm();
  double ny = cy.norm();
  if (nx == 0.0 || ny == 0.0) {
    throw DomainError("pearson undefined: zero variance input");
  }
  return cx.dot(cy) / (nx * ny);
}

double balanced_accuracy(const std::vector<FluencyLabel>& truth,
                         const std::vector<FluencyLabel>& pred) {
  check_lengths(truth.size(), pred.size());
  auto confusion = confusion_matrix(truth, pred);
  double recall_sum = 0.0;
  int present = 0;
  for (int c = 0; c < 3; ++c) {
    int64_t support = confusion[c][0] + confusion[c][1] + confusion[c][2];
    if (support == 0) continue;
    recall_sum += static_cast<double>(confusion[c][c]) /
                  static_cast<double>(support);
    ++present;
  }
  return recall_sum / static_cast<double>(present);
}

double weighted_f1(const std::vector<FluencyLabel>& truth,
                   const std::vector<FluencyLabel>& pred) {
  check_lengths(truth.size(), pred.size());
  auto confusion = confusion_matrix(truth, pred);
  double total = static_cast<double>(truth.size());
  double f1_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    int64_t tp = confusion[c][c];
    int64_t support = confusion[c][0] + confusion[c][1] + confusion[c][2];
    int64_t predicted = confusion[0][c] + confusion[1][c] + confusion[2][c];
    if (support == 0) continue;
    double precision = predicted == 0 ? 0.0
                                      : static_cast<double>(tp) /
                                            static_cast<double>(predicted);
    double recall = static_cast<double>(tp) / static_cast<double>(support);
    double f1 = precision + recall == 0.0
                    ? 0.0
                    : 2.0 * precision * recall / (precision + recall);
    f1_sum += static_cast<double>(support) / total * f1;
  }
  return f1_sum;
}

EvaluationReport evaluate(const std::vector<FluencyLabel>& truth,
                          const std::vector<FluencyLabel>& pred) {
  check_lengths(truth.size(), pred.size());
  EvaluationReport report;
  report.n = truth.size();
  report.confusion = confusion_matrix(truth, pred);
  int64_t correct = 0;
  for (int c = 0; c < 3; ++c) correct += report.confusion[c][c];
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n);
  report.balanced_accuracy = balanced_accuracy(truth, pred);
  report.weighted_f1 = weighted_f1(truth, pred);
  std::vector<double> x(truth.size()), y(pred.size());
  for (size_t i = 0; i < truth.size(); ++i) {
    x[i] = ordinal_value(truth[i]);
    y[i] = ordinal_value(pred[i]);
  }
  try {
    report.pearson_r = pearson(x, y);
  } catch (const DomainError&) {
    report.pearson_r.reset();
  }
  return report;
}

AblationReport run_ablation(const Dataset& dataset, const AblationScorer& scorer,
                            const std::vector<std::string>& features) {
  std::vector<FluencyLabel> truth;
  truth.reserve(dataset.records.size());
  for (size_t i = 0; i < dataset.records.size(); ++i) {
    if (i >= dataset.labels.size() || !dataset.labels[i]) {
      throw ValidationError("ablation requires human labels; record \"" +
                            dataset.records[i].id + "\" has none");
    }
    truth.push_back(*dataset.labels[i]);
  }
  AblationReport report;
  report.baseline = evaluate(truth, scorer(dataset, {}));
  for (const std::string& feature : features) {
    AblationRow row;
    row.excluded_feature = feature;
    try {
      row.report = evaluate(truth, scorer(dataset, {feature}));
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string render_report_table(
    const std::vector<std::pair<std::string, EvaluationReport>>& rows) {
  std::ostringstream out;
  out << "method            Corr     Acc  BalAcc      F1     n\n";
  for (const auto& [method, report] : rows) {
    char name[32];
    std::snprintf(name, sizeof(name), "%-14s", method.c_str());
    out << name;
    out << (report.pearson_r ? fmt3(*report.pearson_r) : "   undef");
    out << fmt3(report.accuracy) << fmt3(report.balanced_accuracy)
        << fmt3(report.weighted_f1);
    char tail[16];
    std::snprintf(tail, sizeof(tail), "%6zu", report.n);
    out << tail << "\n";
  }
  return out.str();
}

std::string render_ablation_table(const AblationReport& report) {
  std::ostringstream out;
  out << "excluded            Corr     Acc  BalAcc      F1\n";
  auto line = [&](const std::string& name, const EvaluationReport& r) {
    char head[32];
    std::snprintf(head, sizeof(head), "%-16s", name.c_str());
    out << head;
    out << (r.pearson_r ? fmt3(*r.pearson_r) : "   undef");
    out << fmt3(r.accuracy) << fmt3(r.balanced_accuracy)
        << fmt3(r.weighted_f1) << "\n";
  };
  line("base", report.baseline);
  for (const AblationRow& row : report.rows) {
    if (row.report) {
      line("-" + row.excluded_feature, *row.report);
    } else {
      char head[32];
      std::snprintf(head, sizeof(head), "%-16s",
                    ("-" + row.excluded_feature).c_str());
      out << head << "error: " << row.error << "\n";
    }
  }
  return out.str();
}

namespace {

json report_json(const EvaluationReport& report) {
  json obj;
  if (report.pearson_r) {
    obj["pearson_r"] = *report.pearson_r;
  } else {
    obj["pearson_r"] = nullptr;
  }
  obj["accuracy"] = report.accuracy;
  obj["balanced_accuracy"] = report.balanced_accuracy;
  obj["weighted_f1"] = report.weighted_f1;
  obj["n"] = report.n;
  json confusion = json::array();
  for (const auto& row : report.confusion) {
    confusion.push_back(json(row));
  }
  obj["confusion"] = confusion;
  return obj;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string ablation_to_json(const AblationReport& report) {
  json obj;
  obj["baseline"] = report_json(report.baseline);
  json rows = json::array();
  for (const AblationRow& row : report.rows) {
    json cell;
    cell["excluded_feature"] = row.excluded_feature;
    if (row.report) {
      cell["report"] = report_json(*row.report);
    } else {
      cell["error"] = row.error;
    }
    rows.push_back(cell);
  }
  obj["rows"] = rows;
  return obj.dump(2) + "\n";
}

}  // namespace fluency::eval
