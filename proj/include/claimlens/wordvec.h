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

#ifndef CLAIMLENS_WORDVEC_H_
#define CLAIMLENS_WORDVEC_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "claimlens/corpus.h"
#include "claimlens/tensor_io.h"

namespace claimlens {

// Token -> vector map with a fixed dimension. Serves word, entity and
// ontology embeddings.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim);

  int dim() const { return dim_; }
  size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  // Inserts or overwrites; returns true when the token is new.
  bool Set(const std::string &token, const Eigen::VectorXd &vector);

  // Nullptr when absent.
  const Eigen::VectorXd *Find(const std::string &token) const;
  bool Contains(const std::string &token) const { return Find(token) != nullptr; }

  const std::vector<std::string> &tokens() const { return tokens_; }
  const Eigen::VectorXd &vector(size_t index) const { return vectors_[index]; }

  // Cosine similarity of two stored tokens; throws ArgumentError if either
  // is missing.
  double Cosine(const std::string &a, const std::string &b) const;

  bool operator==(const EmbeddingTable &other) const;

 private:
  int dim_;
  std::vector<std::string> tokens_;
  std::vector<Eigen::VectorXd> vectors_;
  std::unordered_map<std::string, size_t> index_;
};

struct EmbeddingLoadReport {
  size_t rows = 0;
  size_t duplicates = 0;
};

// Textual word2vec format: header "count dim", then "token f1 ... fdim" per
// line. A row with the wrong number of values raises FormatError naming the
// line. Duplicate tokens: the last occurrence wins and a warning is logged.
EmbeddingTable LoadPretrained(const std::string &path,
                              EmbeddingLoadReport *report = nullptr);

// Writes the same format with round-trippable values.
void SaveWord2VecText(const EmbeddingTable &table, const std::string &path);

// ---------------------------------------------------------------------------
// Skip-gram with negative sampling

struct SkipGramOptions {
  int dim = 100;
  int window = 5;
  int negative = 5;
  int epochs = 5;
  int min_count = 1;
  double learning_rate = 0.025;
  double min_learning_rate_ratio = 1e-4;
  double unigram_power = 0.75;
  // Samples an effective window in [1, window] per center word.
  bool shrink_window = true;
  uint64_t seed = 1;
};

// Loss -log s(u_o.v) - sum_n log s(-u_n.v) of one (center, context) pair and
// its negatives (one per row), with gradients for every input. Gradient
// pointers may be null.
double SgnsLoss(const Eigen::VectorXd &center, const Eigen::VectorXd &context,
                const Eigen::MatrixXd &negatives,
                Eigen::VectorXd *grad_center = nullptr,
                Eigen::VectorXd *grad_context = nullptr,
                Eigen::MatrixXd *grad_negatives = nullptr);

// Single-threaded and deterministic for a given seed. The returned table
// holds the input (center) vectors, tokens ordered by descending count.
class SkipGramTrainer {
 public:
  explicit SkipGramTrainer(SkipGramOptions options);

  EmbeddingTable Train(
      const std::vector<std::vector<std::string>> &sentences) const;

  const SkipGramOptions &options() const { return options_; }

 private:
  SkipGramOptions options_;
};

// Domain vectors from the training corpus (tokenized with the shared word
// tokenizer).
EmbeddingTable TrainSkipGram(const Corpus &train, const SkipGramOptions &options);

// ---------------------------------------------------------------------------
// Sequence aggregation

enum class AggregationMode { kConcatPad, kMean };

AggregationMode ParseAggregationMode(const std::string &name);

// kConcatPad: max_len * dim vector of the first min(len, max_len) token
// vectors in order, zero rows for padding and unknown tokens.
// kMean: dim vector averaging the known token vectors (zero if none).
Eigen::VectorXd AggregateSequence(const std::vector<std::string> &tokens,
                                  const EmbeddingTable &table, int max_len,
                                  AggregationMode mode);

// ---------------------------------------------------------------------------
// Shallow fully connected classifier: input -> hidden (ReLU) -> softmax.

struct FcnOptions {
  int hidden = 500;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 32;
  int max_epochs = 200;
  // Held out from the training rows for early stopping; 0 disables.
  double validation_fraction = 0.1;
  int patience = 10;
  uint64_t seed = 1;
};

struct FcnTrainReport {
  int epochs_run = 0;
  int best_epoch = 0;
  double final_train_loss = 0.0;
  double best_validation_loss = 0.0;
};

class FcnClassifier {
 public:
  FcnClassifier(int input_dim, int num_classes, const FcnOptions &options = {});

  // Momentum SGD on mean softmax cross-entropy. Labels outside
  // [0, num_classes) raise ArgumentError.
  FcnTrainReport Train(const Eigen::MatrixXd &features,
                       const std::vector<int> &labels);

  // One softmax row per input row.
  Eigen::MatrixXd PredictProba(const Eigen::MatrixXd &features) const;
  std::vector<int> Predict(const Eigen::MatrixXd &features) const;

  // Mean cross-entropy over the rows and gradients w.r.t. all parameters
  // (same layout as the parameters). Exposed for gradient checks.
  struct Gradients {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
  };
  double Loss(const Eigen::MatrixXd &features, const std::vector<int> &labels,
              Gradients *gradients = nullptr) const;

  int input_dim() const { return static_cast<int>(w1_.cols()); }
  int hidden() const { return static_cast<int>(w1_.rows()); }
  int num_classes() const { return static_cast<int>(w2_.rows()); }

  Eigen::MatrixXd &w1() { return w1_; }
  Eigen::MatrixXd &w2() { return w2_; }
  Eigen::VectorXd &b1() { return b1_; }
  Eigen::VectorXd &b2() { return b2_; }

  TensorBundle ToTensors() const;
  static FcnClassifier FromTensors(const TensorBundle &bundle,
                                   const FcnOptions &options = {});

 private:
  FcnOptions options_;
  Eigen::MatrixXd w1_;  // hidden x input
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;  // classes x hidden
  Eigen::VectorXd b2_;
};

// Row-wise numerically stable softmax.
Eigen::MatrixXd SoftmaxRows(const Eigen::MatrixXd &logits);

}  // namespace claimlens

#endif  // CLAIMLENS_WORDVEC_H_
