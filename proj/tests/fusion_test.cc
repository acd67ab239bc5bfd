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

#include "claimlens/fusion.h"

#include <cmath>
#include <cstring>

#include "claimlens/errors.h"
#include "doctest.h"
#include "test_util.h"

namespace claimlens {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

bool SameBytes(const VectorXd &a, const VectorXd &b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

VectorXd RandomVector(Rng &rng, int n) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.Normal();
  return v;
}

// Per-class sigmoid cross-entropy written from the definition.
double OracleBce(const VectorXd &z, int target) {
  double total = 0.0;
  for (int k = 0; k < z.size(); ++k) {
    const double s = 1.0 / (1.0 + std::exp(-z[k]));
    total += k == target ? -std::log(s) : -std::log(1.0 - s);
  }
  return total / z.size();
}

double Recall(const std::vector<int> &gold, const std::vector<int> &pred, int c) {
  int tp = 0, support = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] != c) continue;
    ++support;
    tp += pred[i] == c;
  }
  return support ? static_cast<double>(tp) / support : 0.0;
}

TEST_CASE("hand-computed two-block toy gives logit 5") {
  FusionHead head(2, 2, 1, 0.0);
  head.w_cls() << 1, 0;
  head.w_onto() << 0, 1;
  head.bias() << 0;
  const VectorXd out = head.Forward(Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 3),
                                    FuseMode::kEval);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 5.0);
  CHECK(head.Weights() == (MatrixXd(1, 4) << 1, 0, 0, 1).finished());
}

TEST_CASE("small-integer toys match hand affine arithmetic exactly") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    FusionHead head(2, 2, 3, 0.0);
    MatrixXd w(3, 4);
    VectorXd b(3), cls(2), onto(2);
    auto small = [&] { return static_cast<double>(static_cast<int>(rng.Below(11)) - 5); };
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 4; ++j) w(i, j) = small();
      b[i] = small();
    }
    for (int j = 0; j < 2; ++j) {
      cls[j] = small();
      onto[j] = small();
    }
    head.w_cls() = w.leftCols(2);
    head.w_onto() = w.rightCols(2);
    head.bias() = b;
    const VectorXd out = head.Forward(cls, onto, FuseMode::kEval);
    for (int i = 0; i < 3; ++i) {
      const double hand = w(i, 0) * cls[0] + w(i, 1) * cls[1] + w(i, 2) * onto[0] +
                          w(i, 3) * onto[1] + b[i];
      CHECK(out[i] == hand);
    }
  }
}

TEST_CASE("concatenated input dimension is the sum of the blocks") {
  const FusionHead head = FusionHead::Init(768, 100, 3, 0.1, 1);
  CHECK(head.in_dim() == 868);
  CHECK(head.Weights().cols() == 868);
  const FusionHead text_only = FusionHead::Init(768, 0, 3, 0.1, 1);
  CHECK(text_only.in_dim() == 768);
}

TEST_CASE("zero ontology block contributes nothing, bitwise") {
  Rng rng(8);
  const FusionHead head = FusionHead::Init(32, 10, 3, 0.1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd cls = RandomVector(rng, 32);
    const VectorXd fused = head.Forward(cls, VectorXd::Zero(10), FuseMode::kEval);
    const VectorXd text_only = head.w_cls() * cls + head.bias();
    CHECK(SameBytes(fused, text_only));
  }
}

TEST_CASE("mismatched blocks are named in the error") {
  const FusionHead head = FusionHead::Init(4, 3, 2, 0.0, 1);
  CHECK_THROWS_WITH_AS(head.Forward(VectorXd::Zero(5), VectorXd::Zero(3), FuseMode::kEval),
                       doctest::Contains("cls block"), ArgumentError);
  CHECK_THROWS_WITH_AS(head.Forward(VectorXd::Zero(4), VectorXd::Zero(2), FuseMode::kEval),
                       doctest::Contains("ontology block"), ArgumentError);
}

TEST_CASE("eval mode is an affine map of the concatenated input") {
  Rng rng(12);
  const FusionHead head = FusionHead::Init(16, 8, 3, 0.3, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd cls = RandomVector(rng, 16);
    const VectorXd onto = RandomVector(rng, 8);
    const double alpha = rng.Uniform(-3, 3);
    const VectorXd base = head.Forward(cls, onto, FuseMode::kEval) - head.bias();
    const VectorXd scaled =
        head.Forward(alpha * cls, alpha * onto, FuseMode::kEval) - head.bias();
    CHECK((scaled - alpha * base).norm() <= 1e-12 * (1 + std::abs(alpha) * base.norm()));
  }
}

TEST_CASE("BCE-with-logits at zero logits is ln 2 and matches the definition") {
  CHECK(BceWithLogits(VectorXd::Zero(3), 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd z = 3 * RandomVector(rng, 3);
    const int t = static_cast<int>(rng.Below(3));
    CHECK(BceWithLogits(z, t) == doctest::Approx(OracleBce(z, t)).epsilon(1e-12));
  }
  CHECK(std::isfinite(BceWithLogits(VectorXd::Constant(3, 800.0), 0)));
  CHECK(std::isfinite(BceWithLogits(VectorXd::Constant(3, -800.0), 0)));
}

// Loss of the head on one input as a function of its parameters, with the
// analytic gradient assembled as in training.
TEST_CASE("head gradients match central differences") {
  Rng rng(21);
  for (HeadLoss loss : {HeadLoss::kSigmoidBce, HeadLoss::kSoftmaxCe}) {
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
      FusionHead head = FusionHead::Init(6, 4, 3, 0.0, trial + 1);
      const VectorXd cls = RandomVector(rng, 6);
      const VectorXd onto = RandomVector(rng, 4);
      const int t = static_cast<int>(rng.Below(3));
      auto value = [&](const FusionHead &h) {
        const VectorXd z = h.Forward(cls, onto, FuseMode::kEval);
        return loss == HeadLoss::kSigmoidBce ? BceWithLogits(z, t)
                                             : SoftmaxCrossEntropy(z, t);
      };
      VectorXd g;
      const VectorXd z = head.Forward(cls, onto, FuseMode::kEval);
      if (loss == HeadLoss::kSigmoidBce) {
        BceWithLogits(z, t, &g);
      } else {
        SoftmaxCrossEntropy(z, t, &g);
      }
      VectorXd input(10);
      input << cls, onto;
      const MatrixXd dw = g * input.transpose();
      std::vector<double> analytic, numeric;
      const double h = 1e-6;
      for (int k = 0; k < 3; ++k) {
        for (int j = 0; j < 10; ++j) {
          FusionHead plus = head, minus = head;
          if (j < 6) {
            plus.w_cls()(k, j) += h;
            minus.w_cls()(k, j) -= h;
          } else {
            plus.w_onto()(k, j - 6) += h;
            minus.w_onto()(k, j - 6) -= h;
          }
          analytic.push_back(dw(k, j));
          numeric.push_back((value(plus) - value(minus)) / (2 * h));
        }
        FusionHead plus = head, minus = head;
        plus.bias()[k] += h;
        minus.bias()[k] -= h;
        analytic.push_back(g[k]);
        numeric.push_back((value(plus) - value(minus)) / (2 * h));
      }
      const VectorXd a = Eigen::Map<VectorXd>(analytic.data(), analytic.size());
      const VectorXd n = Eigen::Map<VectorXd>(numeric.data(), numeric.size());
      worst = std::max(worst, (a - n).norm() / std::max(a.norm(), n.norm()));
    }
    INFO("loss ", HeadLossName(loss), " worst relative error ", worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("argmax ignores a constant added to every logit") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const VectorXd z = RandomVector(rng, 3);
    const double c = rng.Uniform(-100, 100);
    CHECK(Argmax(z) == Argmax((z.array() + c).matrix()));
  }
}

TEST_CASE("dropout: rate 0 train equals eval bitwise, eval never drops") {
  Rng rng(6);
  const FusionHead no_drop = FusionHead::Init(8, 4, 3, 0.0, 9);
  const FusionHead drop = FusionHead::Init(8, 4, 3, 0.5, 9);
  Rng mask_rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd cls = RandomVector(rng, 8);
    const VectorXd onto = RandomVector(rng, 4);
    CHECK(SameBytes(no_drop.Forward(cls, onto, FuseMode::kTrain, &mask_rng),
                    no_drop.Forward(cls, onto, FuseMode::kEval)));
    CHECK(SameBytes(drop.Forward(cls, onto, FuseMode::kEval),
                    no_drop.Forward(cls, onto, FuseMode::kEval)));
  }
  // Inverted dropout keeps the expected logits.
  const VectorXd cls = RandomVector(rng, 8);
  const VectorXd onto = RandomVector(rng, 4);
  VectorXd mean = VectorXd::Zero(3);
  const int draws = 20000;
  for (int d = 0; d < draws; ++d) mean += drop.Forward(cls, onto, FuseMode::kTrain, &mask_rng);
  mean /= draws;
  CHECK((mean - drop.Forward(cls, onto, FuseMode::kEval)).cwiseAbs().maxCoeff() < 0.05);
  CHECK_THROWS_AS(drop.Forward(cls, onto, FuseMode::kTrain), ArgumentError);
}

TEST_CASE("train config defaults and validation") {
  TrainConfig cfg;
  CHECK(cfg.lr == 2e-5);
  CHECK(cfg.batch == 16);
  CHECK(cfg.dropout == 0.1);
  CHECK_FALSE(cfg.fine_tune_encoder);
  cfg.lr = 0;
  CHECK_THROWS_AS(cfg.Validate(), ArgumentError);
  cfg = TrainConfig();
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.Validate(), ArgumentError);
}

TEST_CASE("zero epochs return the initialized head") {
  TransformerEncoder encoder = MakeFixtureEncoder();
  const SyntheticOntologySignal syn = MakeSyntheticOntologySignal({});
  TrainConfig cfg;
  cfg.epochs = 0;
  const FusionClassifier m = TrainFusion(MakeFusionData(syn.corpus, syn.onto), &encoder,
                                         16, 3, HeadLoss::kSigmoidBce, cfg);
  const FusionHead init = FusionHead::Init(encoder.dim(), 16, 3, cfg.dropout,
                                           DeriveSeed(cfg.seed, 0));
  CHECK(m.head.Weights() == init.Weights());
  CHECK(m.head.bias() == init.bias());
  CHECK(m.history.empty());
}

TEST_CASE("synthetic corpus has the skewed mix and class-independent text") {
  SyntheticOptions opt;
  opt.size = 1000;
  const SyntheticOntologySignal syn = MakeSyntheticOntologySignal(opt);
  const std::vector<int> labels = syn.corpus.Labels();
  int counts[3] = {0, 0, 0};
  for (int y : labels) ++counts[y];
  CHECK(counts[0] == 710);
  CHECK(counts[1] == 60);
  CHECK(counts[2] == 230);
  // Mean projection on the signal direction separates only the minority.
  double proj[3] = {0, 0, 0};
  for (size_t i = 0; i < labels.size(); ++i) proj[labels[i]] += syn.onto[i].sum() / 4.0;
  CHECK(proj[1] / counts[1] > 3.0);
  CHECK(std::abs(proj[0] / counts[0]) < 0.5);
}

TEST_CASE("ontology-only signal: fused head recovers the minority, text-only does not") {
  TransformerEncoder encoder = MakeFixtureEncoder();
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 30;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticOptions train_opt;
    train_opt.seed = seed;
    SyntheticOptions test_opt = train_opt;
    test_opt.seed = seed + 1000;
    const SyntheticOntologySignal train = MakeSyntheticOntologySignal(train_opt);
    const SyntheticOntologySignal test = MakeSyntheticOntologySignal(test_opt);
    cfg.seed = seed;
    const FusionData train_fused = MakeFusionData(train.corpus, train.onto);
    const FusionData test_fused = MakeFusionData(test.corpus, test.onto);
    const FusionClassifier fused =
        TrainFusion(train_fused, &encoder, 16, 3, HeadLoss::kSigmoidBce, cfg);
    const FusionClassifier text_only = TrainFusion(MakeFusionData(train.corpus), &encoder,
                                                   0, 3, HeadLoss::kSoftmaxCe, cfg);
    const std::vector<int> gold = test.corpus.Labels();
    const std::vector<int> fused_pred = ArgmaxRows(PredictLogits(fused, encoder, test_fused));
    const std::vector<int> text_pred =
        ArgmaxRows(PredictLogits(text_only, encoder, MakeFusionData(test.corpus)));
    INFO("seed ", seed);
    CHECK(Recall(gold, fused_pred, 1) >= 0.9);
    CHECK(Recall(gold, text_pred, 1) <= 0.1);
  }
}

TEST_CASE("training is deterministic, reports per-epoch stats and round-trips") {
  TransformerEncoder encoder = MakeFixtureEncoder();
  SyntheticOptions opt;
  opt.size = 60;
  const SyntheticOntologySignal syn = MakeSyntheticOntologySignal(opt);
  const FusionData data = MakeFusionData(syn.corpus, syn.onto);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.lr = 1e-3;
  std::vector<int> seen;
  auto cb = [&](const EpochStats &s, const FusionClassifier &, const Encoder &) {
    seen.push_back(s.epoch);
  };
  const FusionClassifier a = TrainFusion(data, &encoder, 16, 3, HeadLoss::kSigmoidBce, cfg, cb);
  const FusionClassifier b = TrainFusion(data, &encoder, 16, 3, HeadLoss::kSigmoidBce, cfg);
  CHECK(seen == std::vector<int>{1, 2, 3});
  CHECK(a.history.size() == 3);
  CHECK(a.head.Weights() == b.head.Weights());
  const MatrixXd logits = PredictLogits(a, encoder, data);
  CHECK(logits == PredictLogits(a, encoder, data));

  testing::TempDir dir;
  SaveFusionClassifier(a, dir.File("ckpt"), {{"seed", "1"}});
  const FusionClassifier c = LoadFusionClassifier(dir.File("ckpt"));
  CHECK(c.head.Weights() == a.head.Weights());
  CHECK(c.loss == a.loss);
  CHECK(c.history.size() == 3);
  CHECK(PredictLogits(c, encoder, data) == logits);

  const auto records = MakePredictionRecords(data.ids, data.labels, logits, syn.corpus.scheme());
  WritePredictions(records, dir.File("pred.jsonl"));
  CHECK(ReadPredictions(dir.File("pred.jsonl")) == records);
}

TEST_CASE("fine-tuning updates encoder weights and lowers the loss") {
  TransformerEncoder encoder = MakeFixtureEncoder(3);
  const ParamMap before = encoder.params();
  FusionData data;
  for (int i = 0; i < 16; ++i) {
    data.ids.push_back(std::to_string(i));
    data.texts.push_back(i % 2 ? "zz yy zz" : "ab ba ab");
    data.labels.push_back(i % 2);
  }
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.epochs = 8;
  cfg.batch = 4;
  cfg.dropout = 0.0;
  cfg.fine_tune_encoder = true;
  const FusionClassifier m = TrainFusion(data, &encoder, 0, 2, HeadLoss::kSoftmaxCe, cfg);
  CHECK(m.history.back().mean_loss < m.history.front().mean_loss);
  CHECK(encoder.params().at("embeddings.word_embeddings.weight") !=
        before.at("embeddings.word_embeddings.weight"));
  CHECK(ArgmaxRows(PredictLogits(m, encoder, data)) == data.labels);
}

}  // namespace
}  // namespace claimlens
