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

#include "claimlens/wordvec.h"

#include <cmath>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "claimlens/text.h"
#include "doctest.h"
#include "test_util.h"

namespace claimlens {
namespace {

double RelativeError(double a, double b) {
  return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

Eigen::VectorXd RandomVector(Rng &rng, int n, double scale) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.Uniform(-scale, scale);
  return v;
}

TEST_CASE("LoadPretrained parses the textual format") {
  testing::TempDir dir;
  const std::string path = dir.File("vec.txt");
  WriteFile(path, "2 3\nhello 0.1 0.2 0.3\nworld -1 0 1e-2\n");
  EmbeddingLoadReport report;
  EmbeddingTable table = LoadPretrained(path, &report);
  CHECK(table.size() == 2);
  CHECK(table.dim() == 3);
  CHECK(report.rows == 2);
  CHECK((*table.Find("world"))[2] == doctest::Approx(0.01));
  CHECK(table.Find("missing") == nullptr);
}

TEST_CASE("LoadPretrained rejects a short row with its line number") {
  testing::TempDir dir;
  const std::string path = dir.File("vec.txt");
  WriteFile(path, "2 3\nhello 0.1 0.2 0.3\nworld 0.5 0.6\n");
  try {
    LoadPretrained(path);
    FAIL("expected FormatError");
  } catch (const FormatError &e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("LoadPretrained keeps the last duplicate") {
  testing::TempDir dir;
  const std::string path = dir.File("vec.txt");
  WriteFile(path, "3 2\nx 1 1\ny 2 2\nx 3 4\n");
  EmbeddingLoadReport report;
  EmbeddingTable table = LoadPretrained(path, &report);
  CHECK(table.size() == 2);
  CHECK(report.duplicates == 1);
  CHECK((*table.Find("x"))[0] == 3.0);
  CHECK((*table.Find("x"))[1] == 4.0);
}

TEST_CASE("word2vec text round trip is exact") {
  testing::TempDir dir;
  Rng rng(3);
  EmbeddingTable table(4);
  for (const char *t : {"alpha", "beta", "gamma"}) {
    table.Set(t, RandomVector(rng, 4, 1.0));
  }
  SaveWord2VecText(table, dir.File("out.txt"));
  CHECK(LoadPretrained(dir.File("out.txt")) == table);
}

TEST_CASE("SGNS gradients match central differences") {
  Rng rng(11);
  int checked = 0;
  for (int config = 0; config < 50; ++config) {
    const int dim = 2 + static_cast<int>(rng.Below(6));
    const int k = static_cast<int>(rng.Below(5));
    Eigen::VectorXd c = RandomVector(rng, dim, 1.0);
    Eigen::VectorXd o = RandomVector(rng, dim, 1.0);
    Eigen::MatrixXd neg(k, dim);
    for (int r = 0; r < k; ++r) neg.row(r) = RandomVector(rng, dim, 1.0);
    Eigen::VectorXd gc, go;
    Eigen::MatrixXd gn;
    SgnsLoss(c, o, neg, &gc, &go, &gn);
    const double h = 1e-6;
    auto central = [&](double *x) {
      const double saved = *x;
      *x = saved + h;
      const double up = SgnsLoss(c, o, neg);
      *x = saved - h;
      const double down = SgnsLoss(c, o, neg);
      *x = saved;
      return (up - down) / (2 * h);
    };
    for (int i = 0; i < dim; ++i) {
      CHECK(RelativeError(central(&c[i]), gc[i]) < 1e-4);
      CHECK(RelativeError(central(&o[i]), go[i]) < 1e-4);
      for (int r = 0; r < k; ++r) {
        CHECK(RelativeError(central(&neg(r, i)), gn(r, i)) < 1e-4);
      }
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("SGNS loss stays finite for large scores") {
  Eigen::VectorXd c = Eigen::VectorXd::Constant(3, 40.0);
  Eigen::VectorXd o = Eigen::VectorXd::Constant(3, -40.0);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Constant(1, 3, 40.0);
  const double loss = SgnsLoss(c, o, neg);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(2 * 4800.0).epsilon(1e-9));
}

TEST_CASE("skip-gram separates co-occurring from disjoint tokens") {
  SkipGramOptions options;
  options.dim = 16;
  options.window = 2;
  options.epochs = 10;
  int wins = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    options.seed = seed;
    EmbeddingTable table =
        SkipGramTrainer(options).Train(testing::CooccurrenceToyCorpus(seed));
    if (table.Cosine("a", "b") > table.Cosine("a", "z")) ++wins;
  }
  CHECK(wins == 10);
}

TEST_CASE("skip-gram determinism and epochs=0") {
  SkipGramOptions options;
  options.dim = 8;
  options.epochs = 2;
  options.seed = 42;
  auto corpus = testing::CooccurrenceToyCorpus(5, 40);
  SkipGramTrainer trainer(options);
  CHECK(trainer.Train(corpus) == trainer.Train(corpus));

  options.epochs = 0;
  EmbeddingTable init = SkipGramTrainer(options).Train(corpus);
  options.epochs = 1;
  EmbeddingTable trained = SkipGramTrainer(options).Train(corpus);
  CHECK(init.tokens() == trained.tokens());
  // Same seed yields the same starting point; zero epochs leaves it there.
  for (size_t i = 0; i < init.size(); ++i) {
    CHECK(init.vector(i).cwiseAbs().maxCoeff() <= 0.5 / options.dim);
  }
  CHECK_FALSE(init == trained);
}

TEST_CASE("skip-gram argument checks") {
  SkipGramOptions options;
  options.dim = 1;
  CHECK_THROWS_AS(SkipGramTrainer{options}, ArgumentError);
  options.dim = 4;
  Corpus empty(LabelScheme::ClaimBuster3());
  CHECK_THROWS_AS(TrainSkipGram(empty, options), ArgumentError);
}

TEST_CASE("AggregateSequence pads, trims and averages") {
  EmbeddingTable table(3);
  table.Set("a", Eigen::Vector3d(1, 2, 3));
  table.Set("b", Eigen::Vector3d(4, 5, 6));
  table.Set("c", Eigen::Vector3d(7, 8, 9));
  table.Set("d", Eigen::Vector3d(-1, -2, -3));
  table.Set("e", Eigen::Vector3d(9, 9, 9));

  Eigen::VectorXd padded =
      AggregateSequence({"a", "b"}, table, 4, AggregationMode::kConcatPad);
  REQUIRE(padded.size() == 12);
  CHECK(padded.head(6) == (Eigen::VectorXd(6) << 1, 2, 3, 4, 5, 6).finished());
  CHECK(padded.tail(6).isZero(0));

  Eigen::VectorXd trimmed = AggregateSequence({"a", "b", "c", "d", "e"}, table,
                                              4, AggregationMode::kConcatPad);
  REQUIRE(trimmed.size() == 12);
  CHECK(trimmed.tail(3) == Eigen::Vector3d(-1, -2, -3));

  Eigen::VectorXd unknown =
      AggregateSequence({"q", "a"}, table, 2, AggregationMode::kConcatPad);
  CHECK(unknown.head(3).isZero(0));
  CHECK(unknown.tail(3) == Eigen::Vector3d(1, 2, 3));

  CHECK(AggregateSequence({"b"}, table, 4, AggregationMode::kMean) ==
        Eigen::Vector3d(4, 5, 6));
  CHECK(AggregateSequence({"a", "q", "b"}, table, 4, AggregationMode::kMean) ==
        Eigen::Vector3d(2.5, 3.5, 4.5));
  CHECK(AggregateSequence({}, table, 4, AggregationMode::kMean).isZero(0));

  // Output length depends only on mode, max_len and dim.
  for (int len = 0; len < 9; ++len) {
    std::vector<std::string> tokens(len, "a");
    CHECK(AggregateSequence(tokens, table, 5, AggregationMode::kConcatPad)
              .size() == 15);
    CHECK(AggregateSequence(tokens, table, 5, AggregationMode::kMean).size() ==
          3);
  }
  CHECK(ParseAggregationMode("mean") == AggregationMode::kMean);
  CHECK_THROWS_AS(ParseAggregationMode("sum"), ArgumentError);
  CHECK_THROWS_AS(AggregateSequence({"a"}, table, 0, AggregationMode::kMean),
                  ArgumentError);
}

TEST_CASE("FCN defaults and softmax rows") {
  CHECK(FcnOptions{}.hidden == 500);
  FcnOptions options;
  options.hidden = 8;
  FcnClassifier fcn(5, 3, options);
  Rng rng(2);
  Eigen::MatrixXd x(20, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal() * 3;
  Eigen::MatrixXd p = fcn.PredictProba(x);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    CHECK(std::abs(p.row(r).sum() - 1.0) < 1e-6);
    CHECK(p.row(r).minCoeff() > 0.0);
    CHECK(p.row(r).maxCoeff() < 1.0);
  }
  Eigen::MatrixXd big(1, 3);
  big << 1000, 0, -1000;
  CHECK(SoftmaxRows(big)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("FCN gradients match central differences") {
  FcnOptions options;
  options.hidden = 6;
  options.seed = 9;
  FcnClassifier fcn(4, 3, options);
  Rng rng(4);
  Eigen::MatrixXd x(7, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  std::vector<int> y = {0, 1, 2, 1, 0, 2, 2};
  FcnClassifier::Gradients g;
  fcn.Loss(x, y, &g);
  const double h = 1e-6;
  auto check = [&](double *param, double analytic) {
    const double saved = *param;
    *param = saved + h;
    const double up = fcn.Loss(x, y);
    *param = saved - h;
    const double down = fcn.Loss(x, y);
    *param = saved;
    CHECK(RelativeError((up - down) / (2 * h), analytic) < 1e-4);
  };
  for (Eigen::Index i = 0; i < fcn.w1().size(); ++i) {
    check(&fcn.w1().data()[i], g.w1.data()[i]);
  }
  for (Eigen::Index i = 0; i < fcn.w2().size(); ++i) {
    check(&fcn.w2().data()[i], g.w2.data()[i]);
  }
  for (Eigen::Index i = 0; i < fcn.b1().size(); ++i) check(&fcn.b1()[i], g.b1[i]);
  for (Eigen::Index i = 0; i < fcn.b2().size(); ++i) check(&fcn.b2()[i], g.b2[i]);
}

TEST_CASE("FCN fits a linearly separable toy") {
  Rng rng(8);
  const int n = 200;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2;
    const double sign = y[i] ? 1.0 : -1.0;
    x(i, 0) = sign * rng.Uniform(0.5, 2.0);
    x(i, 1) = rng.Uniform(-1.0, 1.0);
  }
  FcnOptions options;
  options.learning_rate = 1e-2;
  options.validation_fraction = 0.0;
  options.max_epochs = 200;
  FcnClassifier fcn(2, 2, options);
  FcnTrainReport report = fcn.Train(x, y);
  CHECK(report.epochs_run <= 200);
  std::vector<int> predicted = fcn.Predict(x);
  int correct = 0;
  for (int i = 0; i < n; ++i) correct += predicted[i] == y[i];
  CHECK(correct == n);

  std::vector<int> bad = y;
  bad[0] = 2;
  CHECK_THROWS_AS(fcn.Train(x, bad), ArgumentError);

  FcnClassifier restored = FcnClassifier::FromTensors(fcn.ToTensors());
  CHECK(restored.PredictProba(x) == fcn.PredictProba(x));
}

TEST_CASE("FCN early stopping restores the best epoch") {
  Rng rng(12);
  Eigen::MatrixXd x(100, 3);
  std::vector<int> y(100);
  for (int i = 0; i < 100; ++i) {
    y[i] = static_cast<int>(rng.Below(2));  // pure noise labels
    for (int k = 0; k < 3; ++k) x(i, k) = rng.Normal();
  }
  FcnOptions options;
  options.hidden = 16;
  options.learning_rate = 0.05;
  options.patience = 3;
  options.max_epochs = 200;
  FcnClassifier fcn(3, 2, options);
  FcnTrainReport report = fcn.Train(x, y);
  CHECK(report.best_epoch >= 1);
  CHECK(report.epochs_run < 200);
  CHECK(report.epochs_run - report.best_epoch == 3);
}

}  // namespace
}  // namespace claimlens
