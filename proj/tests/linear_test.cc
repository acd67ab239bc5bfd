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

#include "claimlens/linear.h"

#include <algorithm>
#include <cmath>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "doctest.h"
#include "test_util.h"

namespace claimlens {
namespace {

FeatureMatrix DenseRows(const std::vector<Eigen::VectorXd> &rows) {
  FeatureMatrix m;
  m.cols = rows.empty() ? 0 : rows[0].size();
  for (const auto &r : rows) m.rows.push_back(SparseVector::FromDense(r));
  return m;
}

// Two Gaussian blobs at (+-3, +-3) with unit noise clipped to 1.
void Blobs(uint64_t seed, int n, FeatureMatrix *x, std::vector<int> *y) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> rows;
  y->clear();
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const double c = label ? 3.0 : -3.0;
    Eigen::VectorXd v(2);
    v << c + std::clamp(rng.Normal(), -1.0, 1.0),
        c + std::clamp(rng.Normal(), -1.0, 1.0);
    rows.push_back(v);
    y->push_back(label);
  }
  *x = DenseRows(rows);
}

double Accuracy(const std::vector<int> &a, const std::vector<int> &b) {
  int hits = 0;
  for (size_t i = 0; i < a.size(); ++i) hits += a[i] == b[i];
  return static_cast<double>(hits) / a.size();
}

// Oracle objectives written directly from their definitions, for one
// binary one-vs-rest problem on 1-D inputs.
double HingePrimal(const std::vector<double> &x, const std::vector<double> &s,
                   double c, double w, double b) {
  double f = 0.5 * w * w;
  for (size_t i = 0; i < x.size(); ++i) f += c * std::max(0.0, 1 - s[i] * (w * x[i] + b));
  return f;
}

double LogisticPrimal(const std::vector<double> &x, const std::vector<double> &s,
                      double c, double w, double b) {
  double f = 0.5 * w * w;
  for (size_t i = 0; i < x.size(); ++i) f += c * std::log1p(std::exp(-s[i] * (w * x[i] + b)));
  return f;
}

TEST_CASE("linear kinds parse") {
  CHECK(ParseLinearKind("svm") == LinearKind::kSvmHinge);
  CHECK(ParseLinearKind("logreg") == LinearKind::kLogReg);
  CHECK_THROWS_AS(ParseLinearKind("tree"), ArgumentError);
}

TEST_CASE("both kinds separate well-separated blobs perfectly") {
  for (LinearKind kind : {LinearKind::kSvmHinge, LinearKind::kLogReg}) {
    FeatureMatrix x;
    std::vector<int> y;
    Blobs(7, 200, &x, &y);
    LinearOptions opt;
    opt.kind = kind;
    const LinearModel m = TrainLinear(x, y, 2, opt);
    CHECK(Accuracy(m.Predict(x), y) == 1.0);
  }
}

TEST_CASE("vanishing C predicts the majority class") {
  Rng rng(3);
  std::vector<Eigen::VectorXd> rows;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd v(3);
    v << rng.Normal(), rng.Normal(), rng.Normal();
    rows.push_back(v);
    y.push_back(i < 70 ? 1 : 0);
  }
  const FeatureMatrix x = DenseRows(rows);
  for (LinearKind kind : {LinearKind::kSvmHinge, LinearKind::kLogReg}) {
    LinearOptions opt;
    opt.kind = kind;
    opt.C = 1e-8;
    const LinearModel m = TrainLinear(x, y, 2, opt);
    CHECK(m.weights().norm() < 1e-6);
    for (int p : m.Predict(x)) CHECK(p == 1);
  }
}

TEST_CASE("conflicting duplicates cannot be fit exactly") {
  std::vector<Eigen::VectorXd> rows;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd v(2);
    v << i, 10 - i;
    rows.push_back(v);
    rows.push_back(v);
    y.push_back(0);
    y.push_back(1);
  }
  const FeatureMatrix x = DenseRows(rows);
  for (LinearKind kind : {LinearKind::kSvmHinge, LinearKind::kLogReg}) {
    LinearOptions opt;
    opt.kind = kind;
    const LinearModel m = TrainLinear(x, y, 2, opt);
    CHECK(Accuracy(m.Predict(x), y) < 1.0);
  }
}

TEST_CASE("single-class training raises and absent classes are never predicted") {
  FeatureMatrix x;
  std::vector<int> y;
  Blobs(5, 20, &x, &y);
  std::vector<int> one(y.size(), 1);
  CHECK_THROWS_AS(TrainLinear(x, one, 2, LinearOptions()), ArgumentError);
  const LinearModel m = TrainLinear(x, y, 3, LinearOptions());
  CHECK(m.weights().row(2).norm() == 0.0);
  for (int p : m.Predict(x)) CHECK(p != 2);
}

TEST_CASE("solutions match grid-search optima of the primal objectives") {
  // 1-D overlapping classes; dense block off so no scaling is applied.
  Rng rng(11);
  std::vector<Eigen::VectorXd> rows;
  std::vector<int> y;
  std::vector<double> xs, signs;
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2;
    const double v = (label ? 0.7 : -0.7) + rng.Normal();
    rows.push_back(Eigen::VectorXd::Constant(1, v));
    y.push_back(label);
    xs.push_back(v);
    signs.push_back(label ? 1.0 : -1.0);
  }
  const FeatureMatrix x = DenseRows(rows);
  for (LinearKind kind : {LinearKind::kSvmHinge, LinearKind::kLogReg}) {
    LinearOptions opt;
    opt.kind = kind;
    opt.C = 0.5;
    const LinearModel m = TrainLinear(x, y, 2, opt);
    auto objective = kind == LinearKind::kSvmHinge ? HingePrimal : LogisticPrimal;
    const double got = objective(xs, signs, opt.C, m.weights()(1, 0), m.bias()[1]);
    double best = INFINITY;
    for (double w = -3; w <= 3; w += 0.005) {
      for (double b = -3; b <= 3; b += 0.005) {
        best = std::min(best, objective(xs, signs, opt.C, w, b));
      }
    }
    INFO("kind ", LinearKindName(kind), " got ", got, " grid ", best);
    CHECK(got <= best + 1e-6);
    CHECK(got >= best - 0.05);
  }
}

TEST_CASE("dense columns are standardized so affine rescaling is harmless") {
  FeatureMatrix x;
  std::vector<int> y;
  Blobs(9, 100, &x, &y);
  FeatureMatrix shifted = x;
  for (auto &row : shifted.rows) {
    Eigen::VectorXd d = row.ToDense();
    d = d * 1000.0 + Eigen::VectorXd::Constant(2, 50.0);
    row = SparseVector::FromDense(d);
  }
  LinearOptions opt;
  const LinearModel a = TrainLinear(x, y, 2, opt, 0);
  const LinearModel b = TrainLinear(shifted, y, 2, opt, 0);
  const Eigen::MatrixXd da = a.DecisionFunction(x);
  const Eigen::MatrixXd db = b.DecisionFunction(shifted);
  CHECK((da - db).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("linear models are deterministic and round-trip through disk") {
  FeatureMatrix x;
  std::vector<int> y;
  Blobs(2, 60, &x, &y);
  for (LinearKind kind : {LinearKind::kSvmHinge, LinearKind::kLogReg}) {
    LinearOptions opt;
    opt.kind = kind;
    const LinearModel a = TrainLinear(x, y, 2, opt, 1);
    const LinearModel b = TrainLinear(x, y, 2, opt, 1);
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());
    testing::TempDir dir;
    a.Save(dir.File("m"));
    const LinearModel c = LinearModel::Load(dir.File("m"));
    CHECK(c.kind() == kind);
    CHECK(c.DecisionFunction(x) == a.DecisionFunction(x));
  }
}

}  // namespace
}  // namespace claimlens
