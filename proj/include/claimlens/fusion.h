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

#ifndef CLAIMLENS_FUSION_H_
#define CLAIMLENS_FUSION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "claimlens/corpus.h"
#include "claimlens/encoder.h"
#include "claimlens/random.h"

namespace claimlens {

enum class FuseMode { kTrain, kEval };

// Linear classifier over concat(cls, onto) with dropout on the input. The
// weight matrix is held as two column blocks so each input block's
// contribution is computed separately: logits = (W_cls cls + W_onto onto) + b.
class FusionHead {
 public:
  FusionHead() = default;
  // Zero weights.
  FusionHead(int cls_dim, int onto_dim, int num_classes, double dropout_rate);
  // Weights and bias uniform in +-1/sqrt(in_dim).
  static FusionHead Init(int cls_dim, int onto_dim, int num_classes,
                         double dropout_rate, uint64_t seed);

  int cls_dim() const { return static_cast<int>(w_cls_.cols()); }
  int onto_dim() const { return static_cast<int>(w_onto_.cols()); }
  int in_dim() const { return cls_dim() + onto_dim(); }
  int num_classes() const { return static_cast<int>(bias_.size()); }
  double dropout_rate() const { return dropout_rate_; }

  Eigen::MatrixXd &w_cls() { return w_cls_; }
  Eigen::MatrixXd &w_onto() { return w_onto_; }
  Eigen::VectorXd &bias() { return bias_; }
  const Eigen::MatrixXd &w_cls() const { return w_cls_; }
  const Eigen::MatrixXd &w_onto() const { return w_onto_; }
  const Eigen::VectorXd &bias() const { return bias_; }
  // [W_cls | W_onto].
  Eigen::MatrixXd Weights() const;

  // In train mode with dropout_rate > 0, `rng` draws an inverted dropout
  // mask over concat(cls, onto), written to `mask` (scaled keep factors)
  // when non-null. ArgumentError names the mismatching block.
  Eigen::VectorXd Forward(const Eigen::VectorXd &cls,
                          const Eigen::VectorXd &onto, FuseMode mode,
                          Rng *rng = nullptr, Eigen::VectorXd *mask = nullptr) const;

  void Save(const std::string &prefix,
            const std::map<std::string, std::string> &metadata = {}) const;
  static FusionHead Load(const std::string &prefix);

 private:
  void CheckInputs(const Eigen::VectorXd &cls, const Eigen::VectorXd &onto) const;

  Eigen::MatrixXd w_cls_;
  Eigen::MatrixXd w_onto_;
  Eigen::VectorXd bias_;
  double dropout_rate_ = 0.0;
};

// Mean over classes of the per-class sigmoid cross-entropy against a
// one-hot target; `grad` (optional) receives d(loss)/d(logits).
double BceWithLogits(const Eigen::VectorXd &logits, int target,
                     Eigen::VectorXd *grad = nullptr);
// Softmax cross-entropy; `grad` receives d(loss)/d(logits).
double SoftmaxCrossEntropy(const Eigen::VectorXd &logits, int target,
                           Eigen::VectorXd *grad = nullptr);

int Argmax(const Eigen::VectorXd &logits);

enum class HeadLoss { kSigmoidBce, kSoftmaxCe };
HeadLoss ParseHeadLoss(const std::string &name);  // bce | softmax
std::string HeadLossName(HeadLoss loss);

struct TrainConfig {
  double lr = 2e-5;
  int batch = 16;
  int epochs = 3;
  uint64_t seed = 1;
  double dropout = 0.1;
  // Update encoder weights by backpropagating through it; requires a
  // TransformerEncoder.
  bool fine_tune_encoder = false;
  // L2-normalize ontology vectors before concatenation.
  bool normalize_onto = false;
  double weight_decay = 0.0;

  void Validate() const;  // ArgumentError on lr <= 0, batch < 1, etc.
};

// Parallel arrays; `onto` is empty for text-only models.
struct FusionData {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  std::vector<Eigen::VectorXd> onto;
  std::vector<int> labels;

  size_t size() const { return texts.size(); }
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
};

struct FusionClassifier {
  FusionHead head;
  HeadLoss loss = HeadLoss::kSigmoidBce;
  bool normalize_onto = false;
  std::vector<EpochStats> history;
};

// Called after every epoch, e.g. to persist a checkpoint. The encoder
// argument reflects fine-tuned weights when fine-tuning.
using EpochCallback =
    std::function<void(const EpochStats &, const FusionClassifier &, const Encoder &)>;

// Trains the head (and optionally the encoder) with Adam over shuffled
// minibatches. onto_dim 0 gives the text-only baseline. Zero epochs return
// the initialized head.
FusionClassifier TrainFusion(const FusionData &data, Encoder *encoder,
                             int onto_dim, int num_classes, HeadLoss loss,
                             const TrainConfig &config,
                             const EpochCallback &on_epoch = nullptr);

// Eval-mode logits, one row per instance.
Eigen::MatrixXd PredictLogits(const FusionClassifier &model,
                              const Encoder &encoder, const FusionData &data);
std::vector<int> ArgmaxRows(const Eigen::MatrixXd &logits);

// Saves `<dir>/head.bin`, `<dir>/head.json`.
void SaveFusionClassifier(const FusionClassifier &model, const std::string &dir,
                          const std::map<std::string, std::string> &metadata = {});
FusionClassifier LoadFusionClassifier(const std::string &dir);

struct PredictionRecord {
  std::string id;
  std::string gold;
  std::string pred;
  std::vector<double> logits;

  bool operator==(const PredictionRecord &) const = default;
};

std::vector<PredictionRecord> MakePredictionRecords(const std::vector<std::string> &ids,
                                                    const std::vector<int> &gold,
                                                    const Eigen::MatrixXd &logits,
                                                    const LabelScheme &scheme);
// JSON lines {"id","gold","pred","logits":[...]}.
void WritePredictions(const std::vector<PredictionRecord> &records,
                      const std::string &path);
std::vector<PredictionRecord> ReadPredictions(const std::string &path);

// Synthetic three-class corpus with a skewed NFS/UFS/CFS mix where the
// text is class-independent noise and only the ontology vector carries
// the minority (UFS) label.
struct SyntheticOntologySignal {
  Corpus corpus{LabelScheme::ClaimBuster3()};
  std::vector<Eigen::VectorXd> onto;
};

struct SyntheticOptions {
  int size = 400;
  int onto_dim = 16;
  // Expected class shares (NFS, UFS, CFS).
  double nfs_share = 0.71;
  double ufs_share = 0.06;
  // Length of the signal added to minority ontology vectors; noise is
  // standard normal per coordinate.
  double signal = 6.0;
  uint64_t seed = 1;
};

SyntheticOntologySignal MakeSyntheticOntologySignal(const SyntheticOptions &options);

FusionData MakeFusionData(const Corpus &corpus,
                          const std::vector<Eigen::VectorXd> &onto = {});

}  // namespace claimlens

#endif  // CLAIMLENS_FUSION_H_
