// Copyright 2026 The ClaimLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "claimlens/evalviz.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "claimlens/errors.h"
#include "claimlens/text.h"

namespace claimlens {

namespace fs = std::filesystem;
using boost::multiprecision::cpp_int;

double ToDouble(const Rational &value) { return value.convert_to<double>(); }

std::string FormatRational(const Rational &value, int digits) {
  if (digits < 0) throw ArgumentError("digits must be non-negative");
  const bool negative = value < 0;
  cpp_int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const Rational scaled = (negative ? Rational(-value) : value) * scale + Rational(1, 2);
  const cpp_int rounded = numerator(scaled) / denominator(scaled);
  std::string whole = cpp_int(rounded / scale).str();
  std::string frac = cpp_int(rounded % scale).str();
  if (negative && rounded != 0) whole = "-" + whole;
  if (digits == 0) return whole;
  return whole + "." + std::string(digits - frac.size(), '0') + frac;
}

namespace {

Rational Ratio(int64_t num, int64_t den, bool *undefined) {
  if (den == 0) {
    *undefined = true;
    return Rational(0);
  }
  return Rational(num, den);
}

void CheckIndex(int value, size_t classes, const char *what) {
  if (value < 0 || static_cast<size_t>(value) >= classes) {
    throw ArgumentError(std::string(what) + " label index " + std::to_string(value) +
                        " outside the scheme");
  }
}

}  // namespace

EvalReport ReportFromConfusion(const std::vector<std::vector<int64_t>> &confusion,
                               const std::vector<std::string> &labels) {
  const size_t c = labels.size();
  if (c == 0 || confusion.size() != c) throw ArgumentError("confusion shape mismatch");
  for (const auto &row : confusion) {
    if (row.size() != c) throw ArgumentError("confusion shape mismatch");
  }
  EvalReport r;
  r.labels = labels;
  r.confusion = confusion;
  int64_t trace = 0;
  for (size_t i = 0; i < c; ++i) {
    for (size_t j = 0; j < c; ++j) {
      if (confusion[i][j] < 0) throw ArgumentError("negative confusion count");
      r.total += confusion[i][j];
    }
    trace += confusion[i][i];
  }
  if (r.total == 0) throw ArgumentError("cannot evaluate zero instances");
  for (size_t k = 0; k < c; ++k) {
    ClassMetrics m;
    m.label = labels[k];
    const int64_t tp = confusion[k][k];
    for (size_t j = 0; j < c; ++j) m.support += confusion[k][j];
    for (size_t i = 0; i < c; ++i) m.predicted += confusion[i][k];
    m.precision = Ratio(tp, m.predicted, &m.precision_undefined);
    m.recall = Ratio(tp, m.support, &m.recall_undefined);
    // 2PR/(P+R) = 2TP/(2TP+FP+FN), and 0 when P+R = 0.
    if (tp == 0) {
      m.f1 = 0;
      m.f1_undefined = true;
    } else {
      m.f1 = Rational(2 * tp, m.predicted + m.support);
    }
    r.zero_division = r.zero_division || m.precision_undefined || m.recall_undefined;
    r.per_class.push_back(std::move(m));
  }
  for (const auto &m : r.per_class) {
    r.macro.precision += m.precision;
    r.macro.recall += m.recall;
    r.macro.f1 += m.f1;
    r.weighted.precision += m.precision * m.support;
    r.weighted.recall += m.recall * m.support;
    r.weighted.f1 += m.f1 * m.support;
  }
  const Rational n_classes(static_cast<int64_t>(c));
  r.macro.precision /= n_classes;
  r.macro.recall /= n_classes;
  r.macro.f1 /= n_classes;
  r.weighted.precision /= r.total;
  r.weighted.recall /= r.total;
  r.weighted.f1 /= r.total;
  r.accuracy = Rational(trace, r.total);
  return r;
}

EvalReport Evaluate(const std::vector<int> &gold, const std::vector<int> &pred,
                    const LabelScheme &scheme) {
  if (gold.size() != pred.size()) {
    throw ArgumentError("gold has " + std::to_string(gold.size()) +
                        " labels, predictions have " + std::to_string(pred.size()));
  }
  if (gold.empty()) throw ArgumentError("cannot evaluate zero instances");
  const size_t c = scheme.labels().size();
  std::vector<std::vector<int64_t>> confusion(c, std::vector<int64_t>(c, 0));
  for (size_t i = 0; i < gold.size(); ++i) {
    CheckIndex(gold[i], c, "gold");
    CheckIndex(pred[i], c, "predicted");
    ++confusion[gold[i]][pred[i]];
  }
  return ReportFromConfusion(confusion, scheme.labels());
}

EvalReport EvaluateNames(const std::vector<std::string> &gold,
                         const std::vector<std::string> &pred,
                         const LabelScheme &scheme) {
  auto index = [&](const std::string &name) {
    const auto i = scheme.IndexOf(name);
    if (!i) throw ArgumentError("label '" + name + "' is not in the scheme");
    return *i;
  };
  std::vector<int> g, p;
  for (const auto &name : gold) g.push_back(index(name));
  for (const auto &name : pred) p.push_back(index(name));
  return Evaluate(g, p, scheme);
}

namespace {

nlohmann::json MetricJson(const Rational &value) {
  std::string exact = numerator(value).str() + "/" + denominator(value).str();
  return {{"value", ToDouble(value)}, {"exact", exact}};
}

nlohmann::json TripleJson(const MetricTriple &t) {
  return {{"precision", MetricJson(t.precision)},
          {"recall", MetricJson(t.recall)},
          {"f1", MetricJson(t.f1)}};
}

std::string Pad(const std::string &s, size_t width, bool right) {
  const size_t len = CountCodePoints(s);
  if (len >= width) return s;
  const std::string fill(width - len, ' ');
  return right ? fill + s : s + fill;
}

std::string RightTrim(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

// Aligned columns separated by two spaces; `right[j]` right-aligns column j.
std::string RenderColumns(const std::vector<std::vector<std::string>> &cells,
                          const std::vector<bool> &right) {
  std::vector<size_t> width(right.size(), 0);
  for (const auto &row : cells) {
    for (size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], CountCodePoints(row[j]));
  }
  std::string out;
  for (const auto &row : cells) {
    std::string line;
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) line += "  ";
      line += Pad(row[j], width[j], right[j]);
    }
    out += RightTrim(line) + "\n";
  }
  return out;
}

}  // namespace

std::string ReportToJson(const EvalReport &report) {
  nlohmann::json j;
  j["labels"] = report.labels;
  j["confusion"] = report.confusion;
  j["total"] = report.total;
  j["accuracy"] = MetricJson(report.accuracy);
  j["macro"] = TripleJson(report.macro);
  j["weighted"] = TripleJson(report.weighted);
  j["zero_division"] = report.zero_division;
  j["per_class"] = nlohmann::json::array();
  for (const auto &m : report.per_class) {
    j["per_class"].push_back({{"label", m.label},
                              {"precision", MetricJson(m.precision)},
                              {"recall", MetricJson(m.recall)},
                              {"f1", MetricJson(m.f1)},
                              {"support", m.support},
                              {"predicted", m.predicted},
                              {"precision_undefined", m.precision_undefined},
                              {"recall_undefined", m.recall_undefined},
                              {"f1_undefined", m.f1_undefined}});
  }
  return j.dump(2) + "\n";
}

std::string FormatClassificationReport(const EvalReport &report, int digits) {
  const std::string total = std::to_string(report.total);
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"", "precision", "recall", "f1-score", "support"});
  for (const auto &m : report.per_class) {
    cells.push_back({m.label, FormatRational(m.precision, digits),
                     FormatRational(m.recall, digits), FormatRational(m.f1, digits),
                     std::to_string(m.support)});
  }
  cells.push_back({"", "", "", "", ""});
  cells.push_back({"accuracy", "", "", FormatRational(report.accuracy, digits), total});
  cells.push_back({"macro avg", FormatRational(report.macro.precision, digits),
                   FormatRational(report.macro.recall, digits),
                   FormatRational(report.macro.f1, digits), total});
  cells.push_back({"weighted avg", FormatRational(report.weighted.precision, digits),
                   FormatRational(report.weighted.recall, digits),
                   FormatRational(report.weighted.f1, digits), total});
  std::string out = RenderColumns(cells, {true, true, true, true, true});
  if (report.zero_division) out += "(undefined precision or recall reported as 0)\n";
  return out;
}

ResultRow ResultRow::FromReport(const std::string &model, const EvalReport &report,
                                int digits) {
  ResultRow r;
  r.model = model;
  r.macro_precision = FormatRational(report.macro.precision, digits);
  r.macro_recall = FormatRational(report.macro.recall, digits);
  r.macro_f1 = FormatRational(report.macro.f1, digits);
  r.weighted_precision = FormatRational(report.weighted.precision, digits);
  r.weighted_recall = FormatRational(report.weighted.recall, digits);
  r.weighted_f1 = FormatRational(report.weighted.f1, digits);
  r.accuracy = FormatRational(report.accuracy, digits);
  return r;
}

std::string FormatResultsTable(const std::vector<ResultRow> &rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "", "Precision", "Recall", "F1-score", "Accuracy"});
  for (const auto &r : rows) {
    cells.push_back({r.model, "macro avg", r.macro_precision, r.macro_recall, r.macro_f1,
                     r.accuracy});
    cells.push_back({"", "weighted avg", r.weighted_precision, r.weighted_recall,
                     r.weighted_f1, ""});
  }
  return RenderColumns(cells, {false, false, true, true, true, true});
}

int64_t DisagreementTable::Total() const {
  int64_t total = 0;
  for (const auto &r : rows) total += r.a_only + r.b_only;
  return total;
}

DisagreementTable Disagreement(const std::vector<int> &gold,
                               const std::vector<int> &pred_a,
                               const std::vector<int> &pred_b,
                               const LabelScheme &scheme, const std::string &model_a,
                               const std::string &model_b) {
  if (gold.size() != pred_a.size() || gold.size() != pred_b.size()) {
    throw ArgumentError("gold and prediction lists differ in length");
  }
  const size_t c = scheme.labels().size();
  DisagreementTable t;
  t.model_a = model_a;
  t.model_b = model_b;
  for (const auto &label : scheme.labels()) t.rows.push_back({label, 0, 0, 0});
  for (size_t i = 0; i < gold.size(); ++i) {
    CheckIndex(gold[i], c, "gold");
    CheckIndex(pred_a[i], c, "predicted");
    CheckIndex(pred_b[i], c, "predicted");
    DisagreementRow &row = t.rows[gold[i]];
    ++row.support;
    const bool a = pred_a[i] == gold[i];
    const bool b = pred_b[i] == gold[i];
    if (a && !b) ++row.a_only;
    if (!a && b) ++row.b_only;
  }
  return t;
}

std::string DisagreementToJson(const DisagreementTable &table) {
  nlohmann::json j = {{"model_a", table.model_a}, {"model_b", table.model_b},
                      {"total", table.Total()}, {"classes", nlohmann::json::array()}};
  for (const auto &r : table.rows) {
    j["classes"].push_back({{"label", r.label},
                            {"a_correct_b_incorrect", r.a_only},
                            {"a_incorrect_b_correct", r.b_only},
                            {"support", r.support}});
  }
  return j.dump(2) + "\n";
}

std::string FormatDisagreementTable(const DisagreementTable &table,
                                    const std::vector<std::string> &column_order) {
  std::vector<const DisagreementRow *> columns;
  if (column_order.empty()) {
    for (const auto &r : table.rows) columns.push_back(&r);
  } else {
    for (const auto &label : column_order) {
      auto it = std::find_if(table.rows.begin(), table.rows.end(),
                             [&](const DisagreementRow &r) { return r.label == label; });
      if (it == table.rows.end()) throw ArgumentError("unknown column '" + label + "'");
      columns.push_back(&*it);
    }
  }
  std::vector<std::vector<std::string>> cells(3);
  cells[0].push_back("(# of samples in the error set)");
  cells[1].push_back(table.model_a + " correct, " + table.model_b + " incorrect");
  cells[2].push_back(table.model_a + " incorrect, " + table.model_b + " correct");
  std::vector<bool> right = {false};
  for (const DisagreementRow *r : columns) {
    cells[0].push_back(r->label);
    cells[1].push_back(std::to_string(r->a_only));
    cells[2].push_back(std::to_string(r->b_only));
    right.push_back(true);
  }
  return RenderColumns(cells, right);
}

namespace {

bool IsSpecialPiece(const std::string &piece) {
  return piece == "[CLS]" || piece == "[SEP]" || piece == "[PAD]";
}

}  // namespace

TokenWeightMap AggregateClsAttention(const EncoderOutput &output,
                                     const std::string &sentence_id, int layers) {
  if (layers < 1) throw ArgumentError("at least one layer must be aggregated");
  if (output.attention.empty()) throw CapabilityError("encoder output carries no attention");
  const int total = static_cast<int>(output.attention.size());
  const int first = std::max(0, total - layers);
  const Eigen::Index n = static_cast<Eigen::Index>(output.tokens.size());
  Eigen::VectorXd received = Eigen::VectorXd::Zero(n);
  int count = 0;
  for (int l = first; l < total; ++l) {
    for (const Eigen::MatrixXd &a : output.attention[l]) {
      if (a.rows() != n || a.cols() != n) {
        throw ArgumentError("attention matrix does not match the token count");
      }
      received += a.row(0).transpose();
      ++count;
    }
  }
  if (count == 0) throw CapabilityError("encoder output carries no attention heads");
  received /= count;

  TokenWeightMap map;
  map.sentence_id = sentence_id;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (IsSpecialPiece(output.tokens[j])) continue;
    map.tokens.push_back(output.tokens[j]);
    map.weights.push_back(received[j]);
  }
  if (map.weights.empty()) return map;
  const auto [lo, hi] = std::minmax_element(map.weights.begin(), map.weights.end());
  const double min = *lo, range = *hi - *lo;
  for (double &w : map.weights) w = range > 0 ? (w - min) / range : 1.0;
  return map;
}

TokenWeightMap AttentionWeights(const Encoder &encoder, const std::string &sentence_id,
                                const std::string &text, int layers) {
  if (!encoder.provides_attention()) {
    throw CapabilityError("encoder '" + encoder.name() + "' does not expose attention");
  }
  return AggregateClsAttention(encoder.EncodeWithAttention(text), sentence_id, layers);
}

namespace {

std::string EscapeHtml(const std::string &s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string Fixed(double value, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace

std::string RenderHighlightHtml(const std::vector<TokenWeightMap> &maps,
                                const std::string &title) {
  std::string out;
  out += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<title>" + EscapeHtml(title) + "</title>\n";
  out += "<style>\n"
         "body { font-family: sans-serif; }\n"
         "table { border-collapse: collapse; }\n"
         "td { padding: 4px 8px; vertical-align: top; border-bottom: 1px solid #ddd; }\n"
         ".tok { padding: 1px 2px; border-radius: 2px; }\n"
         "</style>\n</head>\n<body>\n";
  out += "<h1>" + EscapeHtml(title) + "</h1>\n<table>\n";
  out += "<tr><th>id</th><th>sentence</th><th>note</th></tr>\n";
  for (const auto &m : maps) {
    if (m.tokens.size() != m.weights.size()) {
      throw ArgumentError("sentence " + m.sentence_id + " has mismatched weights");
    }
    std::string row;
    for (size_t i = 0; i < m.tokens.size(); ++i) {
      std::string tok = m.tokens[i];
      const bool continuation = tok.rfind("##", 0) == 0 && tok.size() > 2;
      if (continuation) tok = tok.substr(2);
      if (i > 0 && !continuation) row += " ";
      const double w = std::clamp(m.weights[i], 0.0, 1.0);
      row += "<span class=\"tok\"";
      if (w > 0) row += " style=\"background-color: rgba(180, 30, 30, " + Fixed(w, 3) + ")\"";
      row += " title=\"" + Fixed(m.weights[i], 4) + "\">" + EscapeHtml(tok) + "</span>";
    }
    out += "<tr><td>" + EscapeHtml(m.sentence_id) + "</td><td>" + row + "</td><td>" +
           EscapeHtml(m.note) + "</td></tr>\n";
  }
  out += "</table>\n</body>\n</html>\n";
  return out;
}

std::string WeightsToJson(const std::vector<TokenWeightMap> &maps) {
  nlohmann::json j = {{"sentences", nlohmann::json::array()}};
  for (const auto &m : maps) {
    j["sentences"].push_back({{"id", m.sentence_id},
                              {"tokens", m.tokens},
                              {"weights", m.weights},
                              {"note", m.note}});
  }
  return j.dump(2) + "\n";
}

std::vector<TokenWeightMap> WeightsFromJson(const std::string &json) {
  std::vector<TokenWeightMap> out;
  try {
    const nlohmann::json j = nlohmann::json::parse(json);
    for (const auto &s : j.at("sentences")) {
      TokenWeightMap m;
      m.sentence_id = s.at("id").get<std::string>();
      m.tokens = s.at("tokens").get<std::vector<std::string>>();
      m.weights = s.at("weights").get<std::vector<double>>();
      m.note = s.value("note", "");
      out.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("attention weights: ") + e.what());
  }
  return out;
}

void ExportHighlightHtml(const std::vector<TokenWeightMap> &maps, const std::string &path,
                         const std::string &title) {
  if (maps.empty()) throw ArgumentError("no sentences to highlight");
  const std::string html = RenderHighlightHtml(maps, title);
  WriteFile(path, html);
  fs::path sidecar(path);
  sidecar.replace_extension(".weights.json");
  WriteFile(sidecar.string(), WeightsToJson(maps));
}

}  // namespace claimlens
