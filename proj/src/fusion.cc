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
#include <filesystem>

#include <nlohmann/json.hpp>

#include "claimlens/errors.h"
#include "claimlens/tensor_io.h"
#include "claimlens/text.h"

namespace claimlens {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

FusionHead::FusionHead(int cls_dim, int onto_dim, int num_classes,
                       double dropout_rate)
    : w_cls_(MatrixXd::Zero(num_classes, cls_dim)),
      w_onto_(MatrixXd::Zero(num_classes, onto_dim)),
      bias_(VectorXd::Zero(num_classes)),
      dropout_rate_(dropout_rate) {
  if (cls_dim <= 0) throw ArgumentError("cls block dimension must be positive");
  if (onto_dim < 0) throw ArgumentError("ontology block dimension is negative");
  if (num_classes < 1) throw ArgumentError("a head needs at least one class");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ArgumentError("dropout rate must lie in [0, 1)");
  }
}

FusionHead FusionHead::Init(int cls_dim, int onto_dim, int num_classes,
                            double dropout_rate, uint64_t seed) {
  FusionHead head(cls_dim, onto_dim, num_classes, dropout_rate);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cls_dim + onto_dim));
  Rng rng(seed);
  for (int k = 0; k < num_classes; ++k) {
    for (int j = 0; j < cls_dim; ++j) head.w_cls_(k, j) = rng.Uniform(-bound, bound);
    for (int j = 0; j < onto_dim; ++j) head.w_onto_(k, j) = rng.Uniform(-bound, bound);
  }
  for (int k = 0; k < num_classes; ++k) head.bias_[k] = rng.Uniform(-bound, bound);
  return head;
}

MatrixXd FusionHead::Weights() const {
  MatrixXd w(num_classes(), in_dim());
  w << w_cls_, w_onto_;
  return w;
}

void FusionHead::CheckInputs(const VectorXd &cls, const VectorXd &onto) const {
  if (cls.size() != cls_dim()) {
    throw ArgumentError("cls block has length " + std::to_string(cls.size()) +
                        ", head expects " + std::to_string(cls_dim()));
  }
  if (onto.size() != onto_dim()) {
    throw ArgumentError("ontology block has length " + std::to_string(onto.size()) +
                        ", head expects " + std::to_string(onto_dim()));
  }
}

VectorXd FusionHead::Forward(const VectorXd &cls, const VectorXd &onto,
                             FuseMode mode, Rng *rng, VectorXd *mask) const {
  CheckInputs(cls, onto);
  if (mode == FuseMode::kEval || dropout_rate_ == 0.0) {
    if (mask) *mask = VectorXd::Ones(in_dim());
    VectorXd logits = w_cls_ * cls + w_onto_ * onto;
    return logits + bias_;
  }
  if (!rng) throw ArgumentError("train-mode dropout needs a random source");
  const double keep = 1.0 - dropout_rate_;
  VectorXd m(in_dim());
  for (int j = 0; j < in_dim(); ++j) m[j] = rng->Bernoulli(keep) ? 1.0 / keep : 0.0;
  const VectorXd c = cls.cwiseProduct(m.head(cls_dim()));
  const VectorXd o = onto.cwiseProduct(m.tail(onto_dim()));
  if (mask) *mask = m;
  VectorXd logits = w_cls_ * c + w_onto_ * o;
  return logits + bias_;
}

void FusionHead::Save(const std::string &prefix,
                      const std::map<std::string, std::string> &metadata) const {
  TensorBundle bundle;
  bundle.Put("head.w_cls", w_cls_);
  if (onto_dim() > 0) bundle.Put("head.w_onto", w_onto_);
  bundle.PutVector("head.bias", bias_);
  bundle.Write(prefix + ".bin");
  nlohmann::json meta = {{"type", "fusion_head"},
                         {"cls_dim", cls_dim()},
                         {"onto_dim", onto_dim()},
                         {"in_dim", in_dim()},
                         {"classes", num_classes()},
                         {"dropout", dropout_rate_}};
  for (const auto &[k, v] : metadata) meta["metadata"][k] = v;
  WriteFile(prefix + ".json", meta.dump(2) + "\n");
}

FusionHead FusionHead::Load(const std::string &prefix) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ReadFile(prefix + ".json"));
    if (meta.value("type", "") != "fusion_head") {
      throw FormatError(prefix + ".json is not a fusion head");
    }
    const int cls_dim = meta.at("cls_dim").get<int>();
    const int onto_dim = meta.at("onto_dim").get<int>();
    const int classes = meta.at("classes").get<int>();
    FusionHead head(cls_dim, onto_dim, classes, meta.at("dropout").get<double>());
    const TensorBundle bundle = TensorBundle::Read(prefix + ".bin");
    head.w_cls_ = bundle.Get("head.w_cls", classes, cls_dim);
    if (onto_dim > 0) head.w_onto_ = bundle.Get("head.w_onto", classes, onto_dim);
    head.bias_ = bundle.GetVector("head.bias", classes);
    return head;
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(prefix + ".json: " + e.what());
  }
}

namespace {

double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void CheckTarget(const VectorXd &logits, int target) {
  if (target < 0 || target >= logits.size()) {
    throw ArgumentError("target " + std::to_string(target) + " outside " +
                        std::to_string(logits.size()) + " classes");
  }
}

}  // namespace

double BceWithLogits(const VectorXd &logits, int target, VectorXd *grad) {
  CheckTarget(logits, target);
  const double n = static_cast<double>(logits.size());
  double loss = 0.0;
  if (grad) grad->resize(logits.size());
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    const double y = k == target ? 1.0 : 0.0;
    // -y log s(z) - (1-y) log(1-s(z)) = softplus(z) - y z
    loss += Softplus(logits[k]) - y * logits[k];
    if (grad) (*grad)[k] = (Sigmoid(logits[k]) - y) / n;
  }
  return loss / n;
}

double SoftmaxCrossEntropy(const VectorXd &logits, int target, VectorXd *grad) {
  CheckTarget(logits, target);
  const double mx = logits.maxCoeff();
  const VectorXd e = (logits.array() - mx).exp().matrix();
  const double z = e.sum();
  if (grad) {
    *grad = e / z;
    (*grad)[target] -= 1.0;
  }
  return std::log(z) + mx - logits[target];
}

int Argmax(const VectorXd &logits) {
  Eigen::Index arg = 0;
  logits.maxCoeff(&arg);
  return static_cast<int>(arg);
}

HeadLoss ParseHeadLoss(const std::string &name) {
  if (name == "bce") return HeadLoss::kSigmoidBce;
  if (name == "softmax") return HeadLoss::kSoftmaxCe;
  throw ArgumentError("unknown head loss '" + name + "'");
}

std::string HeadLossName(HeadLoss loss) {
  return loss == HeadLoss::kSigmoidBce ? "bce" : "softmax";
}

void TrainConfig::Validate() const {
  if (!(lr > 0)) throw ArgumentError("learning rate must be positive");
  if (batch < 1) throw ArgumentError("batch size must be at least 1");
  if (epochs < 0) throw ArgumentError("epochs must be non-negative");
  if (!(dropout >= 0 && dropout < 1)) throw ArgumentError("dropout must lie in [0, 1)");
  if (weight_decay < 0) throw ArgumentError("weight decay must be non-negative");
}

namespace {

VectorXd OntoInput(const FusionData &data, size_t i, int onto_dim, bool normalize) {
  if (onto_dim == 0) return VectorXd(0);
  VectorXd v = data.onto[i];
  if (normalize) {
    const double n = v.norm();
    if (n > 0) v /= n;
  }
  return v;
}

void CheckData(const FusionData &data, int onto_dim, int num_classes) {
  const size_t n = data.size();
  if (data.labels.size() != n || (!data.ids.empty() && data.ids.size() != n)) {
    throw ArgumentError("fusion data arrays differ in length");
  }
  if (onto_dim > 0) {
    if (data.onto.size() != n) throw ArgumentError("ontology block missing for some rows");
    for (const auto &v : data.onto) {
      if (v.size() != onto_dim) {
        throw ArgumentError("ontology block has length " + std::to_string(v.size()) +
                            ", expected " + std::to_string(onto_dim));
      }
    }
  }
  for (int y : data.labels) {
    if (y < 0 || y >= num_classes) throw ArgumentError("label outside the scheme");
  }
}

double HeadLossValue(HeadLoss loss, const VectorXd &logits, int target, VectorXd *grad) {
  return loss == HeadLoss::kSigmoidBce ? BceWithLogits(logits, target, grad)
                                       : SoftmaxCrossEntropy(logits, target, grad);
}

}  // namespace

FusionClassifier TrainFusion(const FusionData &data, Encoder *encoder,
                             int onto_dim, int num_classes, HeadLoss loss,
                             const TrainConfig &config,
                             const EpochCallback &on_epoch) {
  config.Validate();
  CheckData(data, onto_dim, num_classes);
  if (!encoder || !encoder->loaded()) throw StateError("encoder not loaded");
  TransformerEncoder *tuned = nullptr;
  if (config.fine_tune_encoder) {
    tuned = dynamic_cast<TransformerEncoder *>(encoder);
    if (!tuned || !encoder->fine_tunable()) {
      throw CapabilityError("encoder '" + encoder->name() + "' cannot be fine-tuned");
    }
  }
  FusionClassifier model;
  model.head = FusionHead::Init(encoder->dim(), onto_dim, num_classes,
                                config.dropout, DeriveSeed(config.seed, 0));
  model.loss = loss;
  model.normalize_onto = config.normalize_onto;
  if (config.epochs == 0 || data.size() == 0) return model;

  const size_t n = data.size();
  std::vector<VectorXd> cls;
  std::vector<std::vector<int>> ids;
  if (tuned) {
    for (const auto &t : data.texts) ids.push_back(tuned->tokenizer().ToIds(tuned->Pieces(t)));
  } else {
    for (const auto &t : data.texts) cls.push_back(encoder->Encode(t));
  }
  std::vector<VectorXd> onto;
  for (size_t i = 0; i < n; ++i) onto.push_back(OntoInput(data, i, onto_dim, config.normalize_onto));

  Rng order_rng(DeriveSeed(config.seed, 1));
  Rng dropout_rng(DeriveSeed(config.seed, 2));
  AdamOptimizer head_opt(config.lr, 0.9, 0.999, 1e-8, config.weight_decay);
  AdamOptimizer encoder_opt(config.lr, 0.9, 0.999, 1e-8, config.weight_decay);
  FusionHead &head = model.head;
  ParamMap params = {{"w_cls", head.w_cls()}, {"w_onto", head.w_onto()}, {"b", head.bias()}};
  TransformerCachePtr cache = tuned ? tuned->NewCache() : nullptr;
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.Shuffle(order);
    double total = 0.0;
    for (size_t start = 0; start < n; start += config.batch) {
      const size_t end = std::min(n, start + static_cast<size_t>(config.batch));
      ParamMap grads = ZerosLike(params);
      ParamMap encoder_grads;
      for (size_t p = start; p < end; ++p) {
        const size_t i = order[p];
        const VectorXd c = tuned ? tuned->Forward(ids[i], cache.get()) : cls[i];
        VectorXd mask;
        const VectorXd logits =
            head.Forward(c, onto[i], FuseMode::kTrain, &dropout_rng, &mask);
        VectorXd g;
        total += HeadLossValue(loss, logits, data.labels[i], &g);
        const VectorXd mc = mask.head(head.cls_dim());
        grads["w_cls"] += g * c.cwiseProduct(mc).transpose();
        if (onto_dim > 0) {
          grads["w_onto"] += g * onto[i].cwiseProduct(mask.tail(onto_dim)).transpose();
        }
        grads["b"] += g;
        if (tuned) {
          const VectorXd d_cls = (head.w_cls().transpose() * g).cwiseProduct(mc);
          tuned->Backward(*cache, d_cls, &encoder_grads);
        }
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto &[name, g] : grads) g *= scale;
      head_opt.Step(params, grads);
      head.w_cls() = params["w_cls"];
      head.w_onto() = params["w_onto"];
      head.bias() = params["b"];
      if (tuned) {
        for (auto &[name, g] : encoder_grads) g *= scale;
        encoder_opt.Step(tuned->mutable_params(), encoder_grads);
      }
    }
    model.history.push_back({epoch, total / static_cast<double>(n)});
    if (on_epoch) on_epoch(model.history.back(), model, *encoder);
  }
  return model;
}

MatrixXd PredictLogits(const FusionClassifier &model, const Encoder &encoder,
                       const FusionData &data) {
  const int onto_dim = model.head.onto_dim();
  CheckData(data, onto_dim, model.head.num_classes());
  MatrixXd out(static_cast<Eigen::Index>(data.size()), model.head.num_classes());
  for (size_t i = 0; i < data.size(); ++i) {
    const VectorXd onto = OntoInput(data, i, onto_dim, model.normalize_onto);
    out.row(static_cast<Eigen::Index>(i)) =
        model.head.Forward(encoder.Encode(data.texts[i]), onto, FuseMode::kEval)
            .transpose();
  }
  return out;
}

std::vector<int> ArgmaxRows(const MatrixXd &logits) {
  std::vector<int> out;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    out.push_back(Argmax(logits.row(r).transpose()));
  }
  return out;
}

void SaveFusionClassifier(const FusionClassifier &model, const std::string &dir,
                          const std::map<std::string, std::string> &metadata) {
  fs::create_directories(dir);
  model.head.Save((fs::path(dir) / "head").string(), metadata);
  nlohmann::json meta = {{"loss", HeadLossName(model.loss)},
                         {"normalize_onto", model.normalize_onto},
                         {"history", nlohmann::json::array()}};
  for (const auto &h : model.history) {
    meta["history"].push_back({{"epoch", h.epoch}, {"mean_loss", h.mean_loss}});
  }
  WriteFile((fs::path(dir) / "classifier.json").string(), meta.dump(2) + "\n");
}

FusionClassifier LoadFusionClassifier(const std::string &dir) {
  FusionClassifier model;
  model.head = FusionHead::Load((fs::path(dir) / "head").string());
  const std::string path = (fs::path(dir) / "classifier.json").string();
  try {
    const nlohmann::json meta = nlohmann::json::parse(ReadFile(path));
    model.loss = ParseHeadLoss(meta.at("loss").get<std::string>());
    model.normalize_onto = meta.at("normalize_onto").get<bool>();
    for (const auto &h : meta.at("history")) {
      model.history.push_back({h.at("epoch").get<int>(), h.at("mean_loss").get<double>()});
    }
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(path + ": " + e.what());
  }
  return model;
}

std::vector<PredictionRecord> MakePredictionRecords(const std::vector<std::string> &ids,
                                                    const std::vector<int> &gold,
                                                    const MatrixXd &logits,
                                                    const LabelScheme &scheme) {
  if (ids.size() != gold.size() || static_cast<Eigen::Index>(ids.size()) != logits.rows()) {
    throw ArgumentError("prediction arrays differ in length");
  }
  std::vector<PredictionRecord> out;
  for (size_t i = 0; i < ids.size(); ++i) {
    PredictionRecord r;
    r.id = ids[i];
    r.gold = scheme.labels().at(gold[i]);
    const VectorXd row = logits.row(static_cast<Eigen::Index>(i)).transpose();
    r.pred = scheme.labels().at(Argmax(row));
    r.logits.assign(row.data(), row.data() + row.size());
    out.push_back(std::move(r));
  }
  return out;
}

void WritePredictions(const std::vector<PredictionRecord> &records,
                      const std::string &path) {
  std::string out;
  for (const auto &r : records) {
    nlohmann::json j = {{"id", r.id}, {"gold", r.gold}, {"pred", r.pred}, {"logits", r.logits}};
    out += j.dump() + "\n";
  }
  WriteFile(path, out);
}

std::vector<PredictionRecord> ReadPredictions(const std::string &path) {
  std::vector<PredictionRecord> out;
  const std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (NormalizeWhitespace(lines[i]).empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(lines[i]);
      PredictionRecord r;
      r.id = j.at("id").get<std::string>();
      r.gold = j.at("gold").get<std::string>();
      r.pred = j.at("pred").get<std::string>();
      r.logits = j.at("logits").get<std::vector<double>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception &e) {
      throw FormatError(path + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

SyntheticOntologySignal MakeSyntheticOntologySignal(const SyntheticOptions &options) {
  if (options.size < 10 || options.onto_dim < 1) {
    throw ArgumentError("synthetic corpus needs size >= 10 and onto_dim >= 1");
  }
  const int n = options.size;
  const int ufs = std::max(1, static_cast<int>(std::lround(n * options.ufs_share)));
  const int nfs = static_cast<int>(std::lround(n * options.nfs_share));
  if (nfs + ufs >= n) throw ArgumentError("synthetic class shares leave no CFS rows");
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) labels.push_back(i < nfs ? 0 : i < nfs + ufs ? 1 : 2);
  Rng rng(options.seed);
  rng.Shuffle(labels);

  static const char *kWords[] = {"tax",   "jobs",  "state", "people", "plan",
                                 "year",  "we",    "will",  "said",   "that",
                                 "bill",  "vote",  "think", "world",  "money",
                                 "there", "going", "good",  "many",   "never"};
  constexpr int kNumWords = sizeof(kWords) / sizeof(kWords[0]);
  const VectorXd direction =
      VectorXd::Ones(options.onto_dim) / std::sqrt(static_cast<double>(options.onto_dim));
  SyntheticOntologySignal out;
  for (int i = 0; i < n; ++i) {
    ClaimInstance inst;
    inst.id = "syn" + std::to_string(i);
    const int len = 4 + static_cast<int>(rng.Below(8));
    std::vector<std::string> words;
    for (int w = 0; w < len; ++w) words.push_back(kWords[rng.Below(kNumWords)]);
    inst.text = Join(words, " ");
    inst.label = labels[i];
    out.corpus.Add(std::move(inst));
    VectorXd v(options.onto_dim);
    for (int j = 0; j < options.onto_dim; ++j) v[j] = rng.Normal();
    if (labels[i] == 1) v += options.signal * direction;
    out.onto.push_back(std::move(v));
  }
  return out;
}

FusionData MakeFusionData(const Corpus &corpus, const std::vector<VectorXd> &onto) {
  if (!onto.empty() && onto.size() != corpus.size()) {
    throw ArgumentError("ontology vectors do not match the corpus size");
  }
  FusionData data;
  for (const auto &inst : corpus.instances()) {
    data.ids.push_back(inst.id);
    data.texts.push_back(inst.text);
  }
  data.labels = corpus.Labels();
  data.onto = onto;
  return data;
}

}  // namespace claimlens
