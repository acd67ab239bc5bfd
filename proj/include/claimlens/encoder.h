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

#ifndef CLAIMLENS_ENCODER_H_
#define CLAIMLENS_ENCODER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "claimlens/tensor_io.h"

namespace claimlens {

// Named parameter tensors; vectors are stored as n x 1.
using ParamMap = std::map<std::string, Eigen::MatrixXd>;

struct EncoderOutput {
  Eigen::VectorXd cls;
  std::vector<std::string> tokens;  // including [CLS] and [SEP]
  // attention[layer][head] is tokens x tokens, rows are queries.
  std::vector<std::vector<Eigen::MatrixXd>> attention;
};

// Sentence encoder contract: a fixed-length vector per text.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int max_tokens() const = 0;
  virtual bool fine_tunable() const = 0;
  virtual bool loaded() const = 0;

  // Deterministic in evaluation mode. StateError when not loaded.
  virtual Eigen::VectorXd Encode(const std::string &text) const = 0;

  virtual bool provides_attention() const { return false; }
  // CapabilityError unless provides_attention().
  virtual EncoderOutput EncodeWithAttention(const std::string &text) const;
};

// BERT-style uncased tokenizer: basic splitting on whitespace and
// punctuation, lowercasing with Latin accent stripping, then greedy
// longest-match-first word pieces.
class WordPieceTokenizer {
 public:
  WordPieceTokenizer() = default;
  explicit WordPieceTokenizer(std::vector<std::string> vocab,
                              bool lowercase = true);
  static WordPieceTokenizer Load(const std::string &vocab_path,
                                 bool lowercase = true);

  std::vector<std::string> BasicTokenize(const std::string &text) const;
  std::vector<std::string> Tokenize(const std::string &text) const;
  // Unknown pieces map to [UNK].
  std::vector<int> ToIds(const std::vector<std::string> &pieces) const;

  int Id(const std::string &piece) const;  // -1 when absent
  const std::vector<std::string> &vocab() const { return vocab_; }
  bool lowercase() const { return lowercase_; }

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> ids_;
  bool lowercase_ = true;
};

struct TransformerConfig {
  int vocab_size = 0;
  int hidden_size = 768;
  int num_layers = 12;
  int num_heads = 12;
  int intermediate_size = 3072;
  int max_position_embeddings = 512;
  int type_vocab_size = 2;
  double layer_norm_eps = 1e-12;
  std::string hidden_act = "gelu";  // gelu (erf) or gelu_new (tanh)
  int max_tokens = 128;             // truncation length including specials

  // Reads and writes the Hugging Face config.json keys.
  static TransformerConfig FromJson(const std::string &text);
  std::string ToJson() const;
};

// Activations kept for backpropagation through one sequence.
struct TransformerCache;
struct TransformerCacheDeleter {
  void operator()(TransformerCache *cache) const;
};
using TransformerCachePtr =
    std::unique_ptr<TransformerCache, TransformerCacheDeleter>;

// Post-LN transformer encoder compatible with BERT checkpoints (parameter
// names follow the Hugging Face BertModel state dict). A model directory
// holds config.json, vocab.txt and weights.cltn.
class TransformerEncoder : public Encoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(TransformerConfig config, WordPieceTokenizer tokenizer,
                     ParamMap params, std::string name = "transformer");
  ~TransformerEncoder() override;
  TransformerEncoder(TransformerEncoder &&) noexcept;
  TransformerEncoder &operator=(TransformerEncoder &&) noexcept;

  static TransformerEncoder Load(const std::string &dir);
  void Save(const std::string &dir) const;

  std::string name() const override { return name_; }
  int dim() const override { return config_.hidden_size; }
  int max_tokens() const override;
  bool fine_tunable() const override { return true; }
  bool loaded() const override { return !params_.empty(); }
  Eigen::VectorXd Encode(const std::string &text) const override;
  bool provides_attention() const override { return true; }
  EncoderOutput EncodeWithAttention(const std::string &text) const override;

  // [CLS] pieces [SEP] truncated to max_tokens().
  std::vector<std::string> Pieces(const std::string &text) const;

  // Final hidden state of position 0. `cache` may be null.
  Eigen::VectorXd Forward(const std::vector<int> &ids,
                          TransformerCache *cache = nullptr) const;
  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(cls).
  void Backward(const TransformerCache &cache, const Eigen::VectorXd &d_cls,
                ParamMap *grads) const;
  TransformerCachePtr NewCache() const;

  const TransformerConfig &config() const { return config_; }
  const WordPieceTokenizer &tokenizer() const { return tokenizer_; }
  const ParamMap &params() const { return params_; }
  ParamMap &mutable_params() { return params_; }

 private:
  void CheckLoaded() const;
  const Eigen::MatrixXd &P(const std::string &name) const;

  TransformerConfig config_;
  WordPieceTokenizer tokenizer_;
  ParamMap params_;
  std::string name_ = "transformer";
};

// Small deterministic encoder used by tests and smoke runs: 2 layers,
// hidden 32, 2 heads, character-level vocabulary.
TransformerEncoder MakeFixtureEncoder(uint64_t seed = 1);

// Adam with optional decoupled weight decay; state keyed by parameter name.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double learning_rate, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-8,
                         double weight_decay = 0.0);
  void Step(ParamMap &params, const ParamMap &grads);
  int steps() const { return steps_; }

 private:
  double lr_, beta1_, beta2_, epsilon_, weight_decay_;
  int steps_ = 0;
  ParamMap m_, v_;
};

// Same keys and shapes as `params`, all zero.
ParamMap ZerosLike(const ParamMap &params);

}  // namespace claimlens

#endif  // CLAIMLENS_ENCODER_H_
