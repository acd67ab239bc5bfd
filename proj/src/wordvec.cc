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

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "claimlens/text.h"

namespace claimlens {

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim <= 0) throw ArgumentError("embedding dim must be positive");
}

bool EmbeddingTable::Set(const std::string &token,
                         const Eigen::VectorXd &vector) {
  if (vector.size() != dim_) {
    throw ArgumentError("vector for '" + token + "' has length " +
                        std::to_string(vector.size()) + ", table dim is " +
                        std::to_string(dim_));
  }
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) {
    tokens_.push_back(token);
    vectors_.push_back(vector);
  } else {
    vectors_[it->second] = vector;
  }
  return inserted;
}

const Eigen::VectorXd *EmbeddingTable::Find(const std::string &token) const {
  auto it = index_.find(token);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

double EmbeddingTable::Cosine(const std::string &a, const std::string &b) const {
  const auto *va = Find(a);
  const auto *vb = Find(b);
  if (!va || !vb) throw ArgumentError("cosine of unknown token");
  const double denom = va->norm() * vb->norm();
  return denom > 0 ? va->dot(*vb) / denom : 0.0;
}

bool EmbeddingTable::operator==(const EmbeddingTable &other) const {
  if (dim_ != other.dim_ || tokens_ != other.tokens_) return false;
  for (size_t i = 0; i < vectors_.size(); ++i) {
    if (vectors_[i] != other.vectors_[i]) return false;
  }
  return true;
}

EmbeddingTable LoadPretrained(const std::string &path,
                              EmbeddingLoadReport *report) {
  const auto lines = ReadLines(path);
  if (lines.empty()) throw FormatError(path + ": empty embedding file");
  std::istringstream header(lines[0]);
  long long count = 0, dim = 0;
  if (!(header >> count >> dim) || dim <= 0 || count < 0) {
    throw FormatError(path + " line 1: expected header 'count dim'");
  }
  EmbeddingTable table(static_cast<int>(dim));
  EmbeddingLoadReport local;
  for (size_t i = 1; i < lines.size(); ++i) {
    auto fields = SplitWhitespace(lines[i]);
    if (fields.empty()) continue;
    if (static_cast<long long>(fields.size()) != dim + 1) {
      throw FormatError(path + " line " + std::to_string(i + 1) + ": expected " +
                        std::to_string(dim) + " values, got " +
                        std::to_string(fields.size() - 1));
    }
    Eigen::VectorXd v(dim);
    for (long long k = 0; k < dim; ++k) {
      try {
        size_t used = 0;
        v[k] = std::stod(fields[k + 1], &used);
        if (used != fields[k + 1].size()) throw std::invalid_argument("junk");
      } catch (const std::exception &) {
        throw FormatError(path + " line " + std::to_string(i + 1) +
                          ": bad number '" + fields[k + 1] + "'");
      }
    }
    ++local.rows;
    if (!table.Set(fields[0], v)) {
      ++local.duplicates;
      spdlog::warn("{} line {}: duplicate token '{}', keeping last", path,
                   i + 1, fields[0]);
    }
  }
  if (static_cast<long long>(local.rows) != count) {
    spdlog::warn("{}: header announces {} rows, found {}", path, count,
                 local.rows);
  }
  if (report) *report = local;
  return table;
}

void SaveWord2VecText(const EmbeddingTable &table, const std::string &path) {
  std::string out =
      std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  for (size_t i = 0; i < table.size(); ++i) {
    const std::string &token = table.tokens()[i];
    if (token.empty() ||
        token.find_first_of(" \t\r\n") != std::string::npos) {
      throw ArgumentError("token '" + token + "' cannot be written");
    }
    out += token;
    for (Eigen::Index k = 0; k < table.dim(); ++k) {
      out += ' ';
      out += FormatDouble(table.vector(i)[k]);
    }
    out += '\n';
  }
  WriteFile(path, out);
}

// ---------------------------------------------------------------------------
// Skip-gram

namespace {

// log(sigmoid(x)) without overflow.
double LogSigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double SgnsLoss(const Eigen::VectorXd &center, const Eigen::VectorXd &context,
                const Eigen::MatrixXd &negatives, Eigen::VectorXd *grad_center,
                Eigen::VectorXd *grad_context,
                Eigen::MatrixXd *grad_negatives) {
  const double positive = context.dot(center);
  double loss = -LogSigmoid(positive);
  const double g_pos = Sigmoid(positive) - 1.0;  // dL/ds_o
  if (grad_center) *grad_center = g_pos * context;
  if (grad_context) *grad_context = g_pos * center;
  if (grad_negatives) grad_negatives->resize(negatives.rows(), negatives.cols());
  for (Eigen::Index n = 0; n < negatives.rows(); ++n) {
    const double s = negatives.row(n).dot(center);
    loss -= LogSigmoid(-s);
    const double g_neg = Sigmoid(s);  // dL/ds_n
    if (grad_center) *grad_center += g_neg * negatives.row(n).transpose();
    if (grad_negatives) grad_negatives->row(n) = g_neg * center.transpose();
  }
  return loss;
}

SkipGramTrainer::SkipGramTrainer(SkipGramOptions options)
    : options_(std::move(options)) {
  if (options_.dim < 2) throw ArgumentError("skip-gram dim must be >= 2");
  if (options_.window < 1) throw ArgumentError("skip-gram window must be >= 1");
  if (options_.negative < 0 || options_.epochs < 0) {
    throw ArgumentError("negative samples and epochs must be >= 0");
  }
}

EmbeddingTable SkipGramTrainer::Train(
    const std::vector<std::vector<std::string>> &sentences) const {
  // Vocabulary by descending count, ties lexicographic.
  std::map<std::string, int64_t> counts;
  for (const auto &s : sentences) {
    for (const auto &t : s) ++counts[t];
  }
  std::vector<std::pair<std::string, int64_t>> vocab;
  for (auto &[token, count] : counts) {
    if (count >= options_.min_count) vocab.emplace_back(token, count);
  }
  if (vocab.empty()) throw ArgumentError("skip-gram corpus has no tokens");
  std::stable_sort(vocab.begin(), vocab.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < vocab.size(); ++i) index[vocab[i].first] = static_cast<int>(i);

  const int dim = options_.dim;
  const Eigen::Index v = static_cast<Eigen::Index>(vocab.size());
  Rng rng(options_.seed);
  Eigen::MatrixXd input(v, dim);
  for (Eigen::Index i = 0; i < v; ++i) {
    for (int k = 0; k < dim; ++k) input(i, k) = (rng.Uniform() - 0.5) / dim;
  }
  Eigen::MatrixXd output = Eigen::MatrixXd::Zero(v, dim);

  // Noise distribution ~ count^power as a cumulative table.
  std::vector<double> cumulative(vocab.size());
  double total = 0.0;
  for (size_t i = 0; i < vocab.size(); ++i) {
    total += std::pow(static_cast<double>(vocab[i].second), options_.unigram_power);
    cumulative[i] = total;
  }
  auto sample_noise = [&]() {
    const double u = rng.Uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<int>(
        std::min<ptrdiff_t>(it - cumulative.begin(), v - 1));
  };

  std::vector<std::vector<int>> encoded;
  int64_t corpus_words = 0;
  for (const auto &s : sentences) {
    std::vector<int> ids;
    for (const auto &t : s) {
      auto it = index.find(t);
      if (it != index.end()) ids.push_back(it->second);
    }
    corpus_words += static_cast<int64_t>(ids.size());
    encoded.push_back(std::move(ids));
  }

  const double total_words =
      static_cast<double>(corpus_words) * options_.epochs + 1.0;
  int64_t processed = 0;
  Eigen::VectorXd center(dim), context(dim), grad_center, grad_context;
  Eigen::MatrixXd negatives, grad_negatives;
  std::vector<int> negative_ids;
  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    for (const auto &ids : encoded) {
      const int n = static_cast<int>(ids.size());
      for (int i = 0; i < n; ++i, ++processed) {
        const double lr =
            options_.learning_rate *
            std::max(1.0 - processed / total_words,
                     options_.min_learning_rate_ratio);
        const int reduce = options_.shrink_window
                               ? static_cast<int>(rng.Below(options_.window))
                               : 0;
        const int w = options_.window - reduce;
        for (int j = std::max(0, i - w); j <= std::min(n - 1, i + w); ++j) {
          if (j == i) continue;
          const int c = ids[i];
          const int o = ids[j];
          negative_ids.clear();
          for (int k = 0; k < options_.negative; ++k) {
            int neg = sample_noise();
            for (int tries = 0; neg == o && tries < 10; ++tries) {
              neg = sample_noise();
            }
            if (neg != o) negative_ids.push_back(neg);
          }
          center = input.row(c).transpose();
          context = output.row(o).transpose();
          negatives.resize(static_cast<Eigen::Index>(negative_ids.size()), dim);
          for (size_t k = 0; k < negative_ids.size(); ++k) {
            negatives.row(static_cast<Eigen::Index>(k)) = output.row(negative_ids[k]);
          }
          SgnsLoss(center, context, negatives, &grad_center, &grad_context,
                   &grad_negatives);
          output.row(o) -= lr * grad_context.transpose();
          for (size_t k = 0; k < negative_ids.size(); ++k) {
            output.row(negative_ids[k]) -=
                lr * grad_negatives.row(static_cast<Eigen::Index>(k));
          }
          input.row(c) -= lr * grad_center.transpose();
        }
      }
    }
  }

  EmbeddingTable table(dim);
  for (Eigen::Index i = 0; i < v; ++i) {
    table.Set(vocab[i].first, input.row(i).transpose());
  }
  return table;
}

EmbeddingTable TrainSkipGram(const Corpus &train,
                             const SkipGramOptions &options) {
  if (train.empty()) throw ArgumentError("skip-gram needs a non-empty corpus");
  SkipGramTrainer trainer(options);
  std::vector<std::vector<std::string>> sentences;
  for (const auto &instance : train.instances()) {
    sentences.push_back(Tokenize(instance.text));
  }
  return trainer.Train(sentences);
}

// ---------------------------------------------------------------------------
// Aggregation

AggregationMode ParseAggregationMode(const std::string &name) {
  if (name == "concat_pad") return AggregationMode::kConcatPad;
  if (name == "mean") return AggregationMode::kMean;
  throw ArgumentError("unknown aggregation mode '" + name + "'");
}

Eigen::VectorXd AggregateSequence(const std::vector<std::string> &tokens,
                                  const EmbeddingTable &table, int max_len,
                                  AggregationMode mode) {
  if (max_len < 1) throw ArgumentError("max_len must be >= 1");
  const int dim = table.dim();
  if (mode == AggregationMode::kConcatPad) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(max_len) * dim);
    const int n = std::min<int>(max_len, static_cast<int>(tokens.size()));
    for (int i = 0; i < n; ++i) {
      if (const auto *vec = table.Find(tokens[i])) {
        out.segment(static_cast<Eigen::Index>(i) * dim, dim) = *vec;
      }
    }
    return out;
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  int known = 0;
  for (const auto &t : tokens) {
    if (const auto *vec = table.Find(t)) {
      sum += *vec;
      ++known;
    }
  }
  return known > 0 ? Eigen::VectorXd(sum / known) : sum;
}

// ---------------------------------------------------------------------------
// FCN

Eigen::MatrixXd SoftmaxRows(const Eigen::MatrixXd &logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

FcnClassifier::FcnClassifier(int input_dim, int num_classes,
                             const FcnOptions &options)
    : options_(options) {
  if (input_dim < 1 || num_classes < 2 || options.hidden < 1) {
    throw ArgumentError("FCN needs input_dim >= 1, >= 2 classes, hidden >= 1");
  }
  Rng rng(options.seed);
  const double a1 = std::sqrt(6.0 / input_dim);
  const double a2 = std::sqrt(6.0 / (options.hidden + num_classes));
  w1_.resize(options.hidden, input_dim);
  for (Eigen::Index i = 0; i < w1_.size(); ++i) w1_.data()[i] = rng.Uniform(-a1, a1);
  w2_.resize(num_classes, options.hidden);
  for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_.data()[i] = rng.Uniform(-a2, a2);
  b1_ = Eigen::VectorXd::Zero(options.hidden);
  b2_ = Eigen::VectorXd::Zero(num_classes);
}

Eigen::MatrixXd FcnClassifier::PredictProba(const Eigen::MatrixXd &features) const {
  if (features.cols() != input_dim()) {
    throw ArgumentError("FCN expects " + std::to_string(input_dim()) +
                        " features, got " + std::to_string(features.cols()));
  }
  Eigen::MatrixXd hidden =
      ((features * w1_.transpose()).rowwise() + b1_.transpose()).cwiseMax(0.0);
  return SoftmaxRows((hidden * w2_.transpose()).rowwise() + b2_.transpose());
}

std::vector<int> FcnClassifier::Predict(const Eigen::MatrixXd &features) const {
  Eigen::MatrixXd p = PredictProba(features);
  std::vector<int> out(p.rows());
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Eigen::Index arg;
    p.row(r).maxCoeff(&arg);
    out[r] = static_cast<int>(arg);
  }
  return out;
}

double FcnClassifier::Loss(const Eigen::MatrixXd &features,
                           const std::vector<int> &labels,
                           Gradients *gradients) const {
  const Eigen::Index n = features.rows();
  Eigen::MatrixXd pre = (features * w1_.transpose()).rowwise() + b1_.transpose();
  Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  Eigen::MatrixXd probs =
      SoftmaxRows((hidden * w2_.transpose()).rowwise() + b2_.transpose());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    loss -= std::log(std::max(probs(r, labels[r]), 1e-300));
  }
  loss /= static_cast<double>(n);
  if (gradients) {
    Eigen::MatrixXd d_logits = probs;
    for (Eigen::Index r = 0; r < n; ++r) d_logits(r, labels[r]) -= 1.0;
    d_logits /= static_cast<double>(n);
    gradients->w2 = d_logits.transpose() * hidden;
    gradients->b2 = d_logits.colwise().sum().transpose();
    Eigen::MatrixXd d_hidden = d_logits * w2_;
    d_hidden = d_hidden.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    gradients->w1 = d_hidden.transpose() * features;
    gradients->b1 = d_hidden.colwise().sum().transpose();
  }
  return loss;
}

FcnTrainReport FcnClassifier::Train(const Eigen::MatrixXd &features,
                                    const std::vector<int> &labels) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ArgumentError("features and labels differ in length");
  }
  if (features.rows() == 0) throw ArgumentError("FCN needs training rows");
  if (features.cols() != input_dim()) {
    throw ArgumentError("FCN feature dim mismatch");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes()) {
      throw ArgumentError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(num_classes()) + ")");
    }
  }
  Rng rng(DeriveSeed(options_.seed, 1));
  std::vector<Eigen::Index> order(features.rows());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  rng.Shuffle(order);
  size_t num_val = 0;
  if (options_.validation_fraction > 0 && order.size() >= 10) {
    num_val = static_cast<size_t>(
        std::round(options_.validation_fraction * static_cast<double>(order.size())));
    num_val = std::clamp<size_t>(num_val, 1, order.size() - 1);
  }
  std::vector<Eigen::Index> val_idx(order.begin(), order.begin() + num_val);
  std::vector<Eigen::Index> train_idx(order.begin() + num_val, order.end());
  auto gather = [&](const std::vector<Eigen::Index> &idx, Eigen::MatrixXd &x,
                    std::vector<int> &y) {
    x.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    y.resize(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = features.row(idx[i]);
      y[i] = labels[idx[i]];
    }
  };
  Eigen::MatrixXd val_x;
  std::vector<int> val_y;
  gather(val_idx, val_x, val_y);

  Gradients velocity{Eigen::MatrixXd::Zero(w1_.rows(), w1_.cols()),
                     Eigen::MatrixXd::Zero(w2_.rows(), w2_.cols()),
                     Eigen::VectorXd::Zero(b1_.size()),
                     Eigen::VectorXd::Zero(b2_.size())};
  FcnTrainReport report;
  report.best_validation_loss = std::numeric_limits<double>::infinity();
  auto best = std::make_tuple(w1_, b1_, w2_, b2_);
  int since_best = 0;
  Eigen::MatrixXd batch_x;
  std::vector<int> batch_y;
  Gradients g;
  const size_t batch = static_cast<size_t>(std::max(1, options_.batch_size));
  for (int epoch = 1; epoch <= options_.max_epochs; ++epoch) {
    rng.Shuffle(train_idx);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < train_idx.size(); start += batch) {
      std::vector<Eigen::Index> idx(
          train_idx.begin() + start,
          train_idx.begin() + std::min(start + batch, train_idx.size()));
      gather(idx, batch_x, batch_y);
      epoch_loss += Loss(batch_x, batch_y, &g) * static_cast<double>(idx.size());
      const double mu = options_.momentum, lr = options_.learning_rate;
      velocity.w1 = mu * velocity.w1 - lr * g.w1;
      velocity.b1 = mu * velocity.b1 - lr * g.b1;
      velocity.w2 = mu * velocity.w2 - lr * g.w2;
      velocity.b2 = mu * velocity.b2 - lr * g.b2;
      w1_ += velocity.w1;
      b1_ += velocity.b1;
      w2_ += velocity.w2;
      b2_ += velocity.b2;
    }
    report.epochs_run = epoch;
    report.final_train_loss = epoch_loss / static_cast<double>(train_idx.size());
    if (num_val == 0) continue;
    const double val_loss = Loss(val_x, val_y);
    if (val_loss < report.best_validation_loss) {
      report.best_validation_loss = val_loss;
      report.best_epoch = epoch;
      best = std::make_tuple(w1_, b1_, w2_, b2_);
      since_best = 0;
    } else if (++since_best >= options_.patience) {
      break;
    }
  }
  if (num_val > 0) {
    std::tie(w1_, b1_, w2_, b2_) = best;
  } else {
    report.best_epoch = report.epochs_run;
  }
  return report;
}

TensorBundle FcnClassifier::ToTensors() const {
  TensorBundle bundle;
  bundle.Put("fcn.w1", w1_);
  bundle.PutVector("fcn.b1", b1_);
  bundle.Put("fcn.w2", w2_);
  bundle.PutVector("fcn.b2", b2_);
  return bundle;
}

FcnClassifier FcnClassifier::FromTensors(const TensorBundle &bundle,
                                         const FcnOptions &options) {
  const Eigen::MatrixXd &w1 = bundle.Get("fcn.w1");
  const Eigen::MatrixXd &w2 = bundle.Get("fcn.w2");
  FcnOptions o = options;
  o.hidden = static_cast<int>(w1.rows());
  FcnClassifier fcn(static_cast<int>(w1.cols()), static_cast<int>(w2.rows()), o);
  fcn.w1_ = w1;
  fcn.w2_ = bundle.Get("fcn.w2", w2.rows(), w1.rows());
  fcn.b1_ = bundle.GetVector("fcn.b1", w1.rows());
  fcn.b2_ = bundle.GetVector("fcn.b2", w2.rows());
  return fcn;
}

}  // namespace claimlens
