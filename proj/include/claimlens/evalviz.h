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

#ifndef CLAIMLENS_EVALVIZ_H_
#define CLAIMLENS_EVALVIZ_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "claimlens/corpus.h"
#include "claimlens/encoder.h"

namespace claimlens {

// Metrics are exact until they are printed.
using Rational = boost::multiprecision::cpp_rational;

double ToDouble(const Rational &value);
// Round half up to `digits` decimals, computed exactly: "0.74".
std::string FormatRational(const Rational &value, int digits = 2);

struct MetricTriple {
  Rational precision;
  Rational recall;
  Rational f1;
};

struct ClassMetrics {
  std::string label;
  Rational precision;
  Rational recall;
  Rational f1;
  int64_t support = 0;    // gold count
  int64_t predicted = 0;  // predicted count
  // Set when the metric's denominator was zero and 0 was reported.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct EvalReport {
  std::vector<std::string> labels;
  std::vector<std::vector<int64_t>> confusion;  // [gold][pred]
  std::vector<ClassMetrics> per_class;
  MetricTriple macro;
  MetricTriple weighted;
  Rational accuracy;
  int64_t total = 0;
  bool zero_division = false;  // any metric fell back to 0
};

// Labels are indices into `scheme`. ArgumentError on length mismatch, an
// empty input, or an index outside the scheme.
EvalReport Evaluate(const std::vector<int> &gold, const std::vector<int> &pred,
                    const LabelScheme &scheme);
EvalReport EvaluateNames(const std::vector<std::string> &gold,
                         const std::vector<std::string> &pred,
                         const LabelScheme &scheme);
EvalReport ReportFromConfusion(const std::vector<std::vector<int64_t>> &confusion,
                               const std::vector<std::string> &labels);

// JSON with doubles plus exact "n/d" strings for every metric.
std::string ReportToJson(const EvalReport &report);
// Per-class rows followed by accuracy, macro avg and weighted avg.
std::string FormatClassificationReport(const EvalReport &report, int digits = 2);

// One model's summary in the two-row (macro avg / weighted avg) layout of
// the results tables.
struct ResultRow {
  std::string model;
  std::string macro_precision, macro_recall, macro_f1;
  std::string weighted_precision, weighted_recall, weighted_f1;
  std::string accuracy;

  static ResultRow FromReport(const std::string &model, const EvalReport &report,
                              int digits = 2);
};
std::string FormatResultsTable(const std::vector<ResultRow> &rows);

struct DisagreementRow {
  std::string label;
  int64_t a_only = 0;  // gold = c, a = c, b != c
  int64_t b_only = 0;  // gold = c, a != c, b = c
  int64_t support = 0;
};

struct DisagreementTable {
  std::string model_a;
  std::string model_b;
  std::vector<DisagreementRow> rows;  // scheme order

  // Instances where exactly one model is correct.
  int64_t Total() const;
};

DisagreementTable Disagreement(const std::vector<int> &gold,
                               const std::vector<int> &pred_a,
                               const std::vector<int> &pred_b,
                               const LabelScheme &scheme,
                               const std::string &model_a = "A",
                               const std::string &model_b = "B");
std::string DisagreementToJson(const DisagreementTable &table);
// Rows are the two outcomes, columns the classes in `column_order` (all
// classes in scheme order when empty).
std::string FormatDisagreementTable(const DisagreementTable &table,
                                    const std::vector<std::string> &column_order = {});

struct TokenWeightMap {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<double> weights;  // in [0, 1], max 1
  std::string note;             // free text shown beside the sentence

  bool operator==(const TokenWeightMap &) const = default;
};

// Mean over the last `layers` layers and all heads of the attention the
// CLS query gives each token, restricted to non-special tokens and min-max
// normalized; all-equal weights become 1.
TokenWeightMap AggregateClsAttention(const EncoderOutput &output,
                                     const std::string &sentence_id, int layers = 4);
// CapabilityError when the encoder exposes no attention.
TokenWeightMap AttentionWeights(const Encoder &encoder, const std::string &sentence_id,
                                const std::string &text, int layers = 4);

// Self-contained HTML, one row per map, darker background for higher
// weight and no shading at weight 0. Writes raw weights to
// `<path without extension>.weights.json`. FileError when unwritable.
void ExportHighlightHtml(const std::vector<TokenWeightMap> &maps, const std::string &path,
                         const std::string &title = "Token attention");
std::string RenderHighlightHtml(const std::vector<TokenWeightMap> &maps,
                                const std::string &title = "Token attention");
std::string WeightsToJson(const std::vector<TokenWeightMap> &maps);
std::vector<TokenWeightMap> WeightsFromJson(const std::string &json);

}  // namespace claimlens

#endif  // CLAIMLENS_EVALVIZ_H_
