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

#include "claimlens/encoder.h"

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "claimlens/text.h"

namespace claimlens {

using nlohmann::json;

EncoderOutput Encoder::EncodeWithAttention(const std::string &) const {
  throw CapabilityError("encoder '" + name() + "' does not expose attention");
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

std::vector<char32_t> DecodeUtf8(const std::string &s) {
  std::vector<char32_t> out;
  for (size_t i = 0; i < s.size();) {
    const unsigned char c = s[i];
    int len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : (c >> 3) == 30 ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : c & (0x7F >> len);
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const unsigned char cc = s[i + k];
      if ((cc >> 6) != 2) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(ok ? cp : 0xFFFD);
    i += ok ? len : 1;
  }
  return out;
}

void AppendUtf8(char32_t cp, std::string *out) {
  if (cp < 0x80) {
    *out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    *out += static_cast<char>(0xC0 | (cp >> 6));
    *out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    *out += static_cast<char>(0xE0 | (cp >> 12));
    *out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    *out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    *out += static_cast<char>(0xF0 | (cp >> 18));
    *out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    *out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    *out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string EncodeUtf8(const std::vector<char32_t> &cps) {
  std::string out;
  for (char32_t cp : cps) AppendUtf8(cp, &out);
  return out;
}

// Base letters of the canonical decompositions in U+00C0..U+017F; '.' marks
// characters without one.
constexpr char kLatinBase[] =
    "AAAAAA.CEEEEIIII.NOOOOO..UUUUY.."
    "aaaaaa.ceeeeiiii.nooooo..uuuuy.y"
    "AaAaAaCcCcCcCcDd..EeEeEeEeEeGgGg"
    "GgGgHh..IiIiIiIiI...JjKk.LlLlLl."
    "...NnNnNn...OoOoOo..RrRrRrSsSsSs"
    "SsTtTt..UuUuUuUuUuUuWwYyYZzZzZz.";

bool IsWhitespace(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == 0xA0 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

bool IsControl(char32_t c) {
  if (c == '\t' || c == '\n' || c == '\r') return false;
  return c < 0x20 || c == 0x7F || (c >= 0x80 && c < 0xA0) || c == 0xFFFD ||
         (c >= 0x200B && c <= 0x200F) || c == 0xFEFF;
}

bool IsPunctuation(char32_t c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 ||
         c == 0xBB || c == 0xBF || (c >= 0x2010 && c <= 0x2027) ||
         (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003);
}

bool IsCombiningMark(char32_t c) { return c >= 0x300 && c <= 0x36F; }

}  // namespace

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> vocab,
                                       bool lowercase)
    : vocab_(std::move(vocab)), lowercase_(lowercase) {
  for (size_t i = 0; i < vocab_.size(); ++i) {
    ids_.emplace(vocab_[i], static_cast<int>(i));
  }
  for (const char *special : {"[UNK]", "[CLS]", "[SEP]"}) {
    if (!ids_.count(special)) {
      throw FormatError(std::string("vocabulary lacks ") + special);
    }
  }
}

WordPieceTokenizer WordPieceTokenizer::Load(const std::string &vocab_path,
                                            bool lowercase) {
  std::vector<std::string> vocab;
  for (auto &line : ReadLines(vocab_path)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  return WordPieceTokenizer(std::move(vocab), lowercase);
}

int WordPieceTokenizer::Id(const std::string &piece) const {
  auto it = ids_.find(piece);
  return it == ids_.end() ? -1 : it->second;
}

std::vector<std::string> WordPieceTokenizer::BasicTokenize(
    const std::string &text) const {
  std::vector<std::string> words;
  std::vector<char32_t> current;
  auto flush = [&]() {
    if (!current.empty()) words.push_back(EncodeUtf8(current));
    current.clear();
  };
  for (char32_t c : DecodeUtf8(text)) {
    if (c == 0 || IsControl(c)) continue;
    if (IsWhitespace(c)) {
      flush();
      continue;
    }
    if (lowercase_) {
      if (c >= 'A' && c <= 'Z') c += 32;
      if (IsCombiningMark(c)) continue;
      if (c >= 0xC0 && c <= 0x17F && kLatinBase[c - 0xC0] != '.') {
        c = static_cast<unsigned char>(kLatinBase[c - 0xC0]);
        if (c >= 'A' && c <= 'Z') c += 32;
      } else if (c >= 0xC0 && c <= 0xDE && c != 0xD7) {
        c += 32;  // remaining Latin-1 capitals
      }
    }
    if (IsPunctuation(c)) {
      flush();
      current.push_back(c);
      flush();
      continue;
    }
    current.push_back(c);
  }
  flush();
  return words;
}

std::vector<std::string> WordPieceTokenizer::Tokenize(
    const std::string &text) const {
  std::vector<std::string> pieces;
  for (const auto &word : BasicTokenize(text)) {
    const auto chars = DecodeUtf8(word);
    if (chars.size() > 100) {
      pieces.push_back("[UNK]");
      continue;
    }
    std::vector<std::string> sub;
    size_t start = 0;
    bool bad = false;
    while (start < chars.size()) {
      size_t end = chars.size();
      std::string found;
      while (start < end) {
        std::string candidate = EncodeUtf8(
            std::vector<char32_t>(chars.begin() + start, chars.begin() + end));
        if (start > 0) candidate = "##" + candidate;
        if (ids_.count(candidate)) {
          found = std::move(candidate);
          break;
        }
        --end;
      }
      if (found.empty()) {
        bad = true;
        break;
      }
      sub.push_back(std::move(found));
      start = end;
    }
    if (bad) {
      pieces.push_back("[UNK]");
    } else {
      pieces.insert(pieces.end(), sub.begin(), sub.end());
    }
  }
  return pieces;
}

std::vector<int> WordPieceTokenizer::ToIds(
    const std::vector<std::string> &pieces) const {
  const int unk = Id("[UNK]");
  std::vector<int> ids;
  ids.reserve(pieces.size());
  for (const auto &p : pieces) {
    const int id = Id(p);
    ids.push_back(id < 0 ? unk : id);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Config

TransformerConfig TransformerConfig::FromJson(const std::string &text) {
  TransformerConfig c;
  try {
    const json j = json::parse(text);
    c.vocab_size = j.at("vocab_size").get<int>();
    c.hidden_size = j.value("hidden_size", c.hidden_size);
    c.num_layers = j.value("num_hidden_layers", c.num_layers);
    c.num_heads = j.value("num_attention_heads", c.num_heads);
    c.intermediate_size = j.value("intermediate_size", c.intermediate_size);
    c.max_position_embeddings =
        j.value("max_position_embeddings", c.max_position_embeddings);
    c.type_vocab_size = j.value("type_vocab_size", c.type_vocab_size);
    c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
    c.hidden_act = j.value("hidden_act", c.hidden_act);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
  } catch (const json::exception &e) {
    throw FormatError(std::string("encoder config: ") + e.what());
  }
  if (c.hidden_size <= 0 || c.num_heads <= 0 || c.hidden_size % c.num_heads ||
      c.num_layers < 1 || c.vocab_size <= 0) {
    throw FormatError("encoder config has inconsistent sizes");
  }
  if (c.hidden_act != "gelu" && c.hidden_act != "gelu_new") {
    throw FormatError("unsupported activation " + c.hidden_act);
  }
  return c;
}

std::string TransformerConfig::ToJson() const {
  json j = {{"model_type", "bert"},
            {"vocab_size", vocab_size},
            {"hidden_size", hidden_size},
            {"num_hidden_layers", num_layers},
            {"num_attention_heads", num_heads},
            {"intermediate_size", intermediate_size},
            {"max_position_embeddings", max_position_embeddings},
            {"type_vocab_size", type_vocab_size},
            {"layer_norm_eps", layer_norm_eps},
            {"hidden_act", hidden_act},
            {"hidden_dropout_prob", 0.0},
            {"attention_probs_dropout_prob", 0.0},
            {"max_tokens", max_tokens}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Transformer

namespace {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

struct LayerNormCache {
  Matrix xhat;
  Eigen::VectorXd inv_std;
};

Matrix LayerNorm(const Matrix &x, const Matrix &gamma, const Matrix &beta,
                 double eps, LayerNormCache *cache) {
  const Eigen::Index n = x.cols();
  Matrix xhat(x.rows(), n);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / n;
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mean) * inv_std[r];
  }
  Matrix y = (xhat.array().rowwise() * gamma.col(0).transpose().array())
                 .rowwise() +
             beta.col(0).transpose().array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

// Returns dx; accumulates d_gamma, d_beta.
Matrix LayerNormBackward(const Matrix &dy, const Matrix &gamma,
                         const LayerNormCache &c, Matrix *d_gamma,
                         Matrix *d_beta) {
  d_gamma->col(0) += (dy.array() * c.xhat.array()).colwise().sum().transpose().matrix();
  d_beta->col(0) += dy.colwise().sum().transpose();
  const Matrix dxhat = dy.array().rowwise() * gamma.col(0).transpose().array();
  const double n = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / n;
    const double mean_dx = dxhat.row(r).dot(c.xhat.row(r)) / n;
    dx.row(r) = c.inv_std[r] *
                (dxhat.row(r).array() - mean_d - c.xhat.row(r).array() * mean_dx);
  }
  return dx;
}

// y = x W^T + b with W stored (out x in).
Matrix Linear(const Matrix &x, const Matrix &w, const Matrix &b) {
  Matrix y = x * w.transpose();
  y.rowwise() += b.col(0).transpose();
  return y;
}

double Gelu(double x, bool tanh_approx) {
  if (tanh_approx) {
    return 0.5 * x *
           (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x)));
  }
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

double GeluGrad(double x, bool tanh_approx) {
  if (tanh_approx) {
    const double k = std::sqrt(2.0 / M_PI);
    const double u = k * (x + 0.044715 * x * x * x);
    const double t = std::tanh(u);
    return 0.5 * (1.0 + t) +
           0.5 * x * (1.0 - t * t) * k * (1.0 + 3 * 0.044715 * x * x);
  }
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) + x * pdf;
}

std::string LayerKey(int layer, const std::string &suffix) {
  return "encoder.layer." + std::to_string(layer) + "." + suffix;
}

}  // namespace

struct TransformerCache {
  struct Layer {
    Matrix input;
    Matrix q, k, v;
    std::vector<Matrix> attention;
    Matrix context;
    LayerNormCache ln1;
    Matrix x1;
    Matrix inter_pre;
    Matrix inter;
    LayerNormCache ln2;
  };
  std::vector<int> ids;
  LayerNormCache ln0;
  std::vector<Layer> layers;
};

TransformerEncoder::TransformerEncoder(TransformerConfig config,
                                       WordPieceTokenizer tokenizer,
                                       ParamMap params, std::string name)
    : config_(std::move(config)),
      tokenizer_(std::move(tokenizer)),
      params_(std::move(params)),
      name_(std::move(name)) {
  const int h = config_.hidden_size;
  const int inter = config_.intermediate_size;
  auto expect = [&](const std::string &key, Eigen::Index rows, Eigen::Index cols) {
    auto it = params_.find(key);
    if (it == params_.end()) throw FormatError("encoder weights lack " + key);
    if (it->second.rows() != rows || it->second.cols() != cols) {
      throw FormatError("encoder weight " + key + " has shape " +
                        std::to_string(it->second.rows()) + "x" +
                        std::to_string(it->second.cols()) + ", expected " +
                        std::to_string(rows) + "x" + std::to_string(cols));
    }
  };
  if (static_cast<int>(tokenizer_.vocab().size()) != config_.vocab_size) {
    throw FormatError("vocabulary size does not match the encoder config");
  }
  expect("embeddings.word_embeddings.weight", config_.vocab_size, h);
  expect("embeddings.position_embeddings.weight", config_.max_position_embeddings, h);
  expect("embeddings.token_type_embeddings.weight", config_.type_vocab_size, h);
  expect("embeddings.LayerNorm.weight", h, 1);
  expect("embeddings.LayerNorm.bias", h, 1);
  for (int l = 0; l < config_.num_layers; ++l) {
    for (const char *p : {"attention.self.query", "attention.self.key",
                          "attention.self.value", "attention.output.dense"}) {
      expect(LayerKey(l, std::string(p) + ".weight"), h, h);
      expect(LayerKey(l, std::string(p) + ".bias"), h, 1);
    }
    for (const char *p : {"attention.output.LayerNorm", "output.LayerNorm"}) {
      expect(LayerKey(l, std::string(p) + ".weight"), h, 1);
      expect(LayerKey(l, std::string(p) + ".bias"), h, 1);
    }
    expect(LayerKey(l, "intermediate.dense.weight"), inter, h);
    expect(LayerKey(l, "intermediate.dense.bias"), inter, 1);
    expect(LayerKey(l, "output.dense.weight"), h, inter);
    expect(LayerKey(l, "output.dense.bias"), h, 1);
  }
}

TransformerEncoder::~TransformerEncoder() = default;
TransformerEncoder::TransformerEncoder(TransformerEncoder &&) noexcept = default;
TransformerEncoder &TransformerEncoder::operator=(TransformerEncoder &&) noexcept =
    default;

TransformerEncoder TransformerEncoder::Load(const std::string &dir) {
  namespace fs = std::filesystem;
  for (const char *f : {"config.json", "vocab.txt", "weights.cltn"}) {
    if (!fs::exists(fs::path(dir) / f)) {
      throw FileError("encoder directory " + dir + " lacks " + f);
    }
  }
  TransformerConfig config =
      TransformerConfig::FromJson(ReadFile((fs::path(dir) / "config.json").string()));
  WordPieceTokenizer tokenizer =
      WordPieceTokenizer::Load((fs::path(dir) / "vocab.txt").string());
  TensorBundle bundle = TensorBundle::Read((fs::path(dir) / "weights.cltn").string());
  ParamMap params = std::move(bundle.mutable_tensors());
  return TransformerEncoder(std::move(config), std::move(tokenizer),
                            std::move(params),
                            fs::path(dir).filename().string());
}

void TransformerEncoder::Save(const std::string &dir) const {
  CheckLoaded();
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  WriteFile((fs::path(dir) / "config.json").string(), config_.ToJson());
  WriteFile((fs::path(dir) / "vocab.txt").string(),
            Join(tokenizer_.vocab(), "\n") + "\n");
  TensorBundle bundle;
  bundle.mutable_tensors() = params_;
  bundle.Write((fs::path(dir) / "weights.cltn").string());
}

int TransformerEncoder::max_tokens() const {
  return std::max(2, std::min(config_.max_tokens, config_.max_position_embeddings));
}

void TransformerEncoder::CheckLoaded() const {
  if (!loaded()) throw StateError("encoder not loaded");
}

const Eigen::MatrixXd &TransformerEncoder::P(const std::string &name) const {
  return params_.at(name);
}

std::vector<std::string> TransformerEncoder::Pieces(const std::string &text) const {
  std::vector<std::string> pieces = tokenizer_.Tokenize(text);
  const size_t room = static_cast<size_t>(max_tokens() - 2);
  if (pieces.size() > room) pieces.resize(room);
  pieces.insert(pieces.begin(), "[CLS]");
  pieces.push_back("[SEP]");
  return pieces;
}

void TransformerCacheDeleter::operator()(TransformerCache *cache) const {
  delete cache;
}

TransformerCachePtr TransformerEncoder::NewCache() const {
  return TransformerCachePtr(new TransformerCache());
}

Eigen::VectorXd TransformerEncoder::Forward(const std::vector<int> &ids,
                                            TransformerCache *cache) const {
  CheckLoaded();
  const int n = static_cast<int>(ids.size());
  const int h = config_.hidden_size;
  if (n < 1 || n > config_.max_position_embeddings) {
    throw ArgumentError("sequence length " + std::to_string(n) + " out of range");
  }
  const Matrix &word = P("embeddings.word_embeddings.weight");
  const Matrix &pos = P("embeddings.position_embeddings.weight");
  const Matrix &type = P("embeddings.token_type_embeddings.weight");
  Matrix x(n, h);
  for (int i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= config_.vocab_size) {
      throw ArgumentError("token id out of range");
    }
    x.row(i) = word.row(ids[i]) + pos.row(i) + type.row(0);
  }
  if (cache) {
    cache->ids = ids;
    cache->layers.assign(config_.num_layers, {});
  }
  x = LayerNorm(x, P("embeddings.LayerNorm.weight"), P("embeddings.LayerNorm.bias"),
                config_.layer_norm_eps, cache ? &cache->ln0 : nullptr);

  const int heads = config_.num_heads;
  const int dh = h / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool tanh_gelu = config_.hidden_act == "gelu_new";
  for (int l = 0; l < config_.num_layers; ++l) {
    TransformerCache::Layer *lc = cache ? &cache->layers[l] : nullptr;
    Matrix q = Linear(x, P(LayerKey(l, "attention.self.query.weight")),
                      P(LayerKey(l, "attention.self.query.bias")));
    Matrix k = Linear(x, P(LayerKey(l, "attention.self.key.weight")),
                      P(LayerKey(l, "attention.self.key.bias")));
    Matrix v = Linear(x, P(LayerKey(l, "attention.self.value.weight")),
                      P(LayerKey(l, "attention.self.value.bias")));
    Matrix context(n, h);
    std::vector<Matrix> attention(heads);
    for (int hd = 0; hd < heads; ++hd) {
      Matrix scores = q.middleCols(hd * dh, dh) * k.middleCols(hd * dh, dh).transpose();
      scores *= scale;
      for (int r = 0; r < n; ++r) {
        const double m = scores.row(r).maxCoeff();
        scores.row(r) = (scores.row(r).array() - m).exp();
        scores.row(r) /= scores.row(r).sum();
      }
      context.middleCols(hd * dh, dh) = scores * v.middleCols(hd * dh, dh);
      attention[hd] = std::move(scores);
    }
    Matrix attn_out = Linear(context, P(LayerKey(l, "attention.output.dense.weight")),
                             P(LayerKey(l, "attention.output.dense.bias")));
    Matrix x1 = LayerNorm(x + attn_out, P(LayerKey(l, "attention.output.LayerNorm.weight")),
                          P(LayerKey(l, "attention.output.LayerNorm.bias")),
                          config_.layer_norm_eps, lc ? &lc->ln1 : nullptr);
    Matrix inter_pre = Linear(x1, P(LayerKey(l, "intermediate.dense.weight")),
                              P(LayerKey(l, "intermediate.dense.bias")));
    Matrix inter = inter_pre.unaryExpr([&](double z) { return Gelu(z, tanh_gelu); });
    Matrix out = Linear(inter, P(LayerKey(l, "output.dense.weight")),
                        P(LayerKey(l, "output.dense.bias")));
    Matrix x2 = LayerNorm(x1 + out, P(LayerKey(l, "output.LayerNorm.weight")),
                          P(LayerKey(l, "output.LayerNorm.bias")),
                          config_.layer_norm_eps, lc ? &lc->ln2 : nullptr);
    if (lc) {
      lc->input = std::move(x);
      lc->q = std::move(q);
      lc->k = std::move(k);
      lc->v = std::move(v);
      lc->attention = std::move(attention);
      lc->context = std::move(context);
      lc->x1 = x1;
      lc->inter_pre = std::move(inter_pre);
      lc->inter = std::move(inter);
    }
    x = std::move(x2);
  }
  return x.row(0).transpose();
}

void TransformerEncoder::Backward(const TransformerCache &cache,
                                  const Eigen::VectorXd &d_cls,
                                  ParamMap *grads) const {
  CheckLoaded();
  if (cache.layers.size() != static_cast<size_t>(config_.num_layers)) {
    throw StateError("backward without a forward cache");
  }
  auto G = [&](const std::string &key) -> Matrix & {
    auto it = grads->find(key);
    if (it == grads->end()) {
      it = grads->emplace(key, Matrix::Zero(P(key).rows(), P(key).cols())).first;
    }
    return it->second;
  };
  const int n = static_cast<int>(cache.ids.size());
  const int h = config_.hidden_size;
  const int heads = config_.num_heads;
  const int dh = h / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool tanh_gelu = config_.hidden_act == "gelu_new";

  Matrix dx = Matrix::Zero(n, h);
  dx.row(0) = d_cls.transpose();
  // y = x W^T + b: accumulate dW, db, return dx.
  auto linear_back = [&](const Matrix &dy, const Matrix &x, const std::string &w) {
    G(w + ".weight") += dy.transpose() * x;
    G(w + ".bias").col(0) += dy.colwise().sum().transpose();
    return Matrix(dy * P(w + ".weight"));
  };
  for (int l = config_.num_layers - 1; l >= 0; --l) {
    const auto &lc = cache.layers[l];
    // x2 = LN(x1 + out)
    Matrix dsum2 = LayerNormBackward(dx, P(LayerKey(l, "output.LayerNorm.weight")),
                                     lc.ln2, &G(LayerKey(l, "output.LayerNorm.weight")),
                                     &G(LayerKey(l, "output.LayerNorm.bias")));
    Matrix dinter = linear_back(dsum2, lc.inter, LayerKey(l, "output.dense"));
    Matrix dinter_pre = dinter.cwiseProduct(
        lc.inter_pre.unaryExpr([&](double z) { return GeluGrad(z, tanh_gelu); }));
    Matrix dx1 = dsum2 + linear_back(dinter_pre, lc.x1, LayerKey(l, "intermediate.dense"));
    // x1 = LN(x + attn_out)
    Matrix dsum1 = LayerNormBackward(
        dx1, P(LayerKey(l, "attention.output.LayerNorm.weight")), lc.ln1,
        &G(LayerKey(l, "attention.output.LayerNorm.weight")),
        &G(LayerKey(l, "attention.output.LayerNorm.bias")));
    Matrix dcontext = linear_back(dsum1, lc.context, LayerKey(l, "attention.output.dense"));
    Matrix dq(n, h), dk(n, h), dv(n, h);
    for (int hd = 0; hd < heads; ++hd) {
      const Matrix &a = lc.attention[hd];
      const auto dctx = dcontext.middleCols(hd * dh, dh);
      dv.middleCols(hd * dh, dh) = a.transpose() * dctx;
      Matrix da = dctx * lc.v.middleCols(hd * dh, dh).transpose();
      Matrix ds(n, n);
      for (int r = 0; r < n; ++r) {
        const double dot = da.row(r).dot(a.row(r));
        ds.row(r) = a.row(r).array() * (da.row(r).array() - dot);
      }
      ds *= scale;
      dq.middleCols(hd * dh, dh) = ds * lc.k.middleCols(hd * dh, dh);
      dk.middleCols(hd * dh, dh) = ds.transpose() * lc.q.middleCols(hd * dh, dh);
    }
    dx = dsum1;
    dx += linear_back(dq, lc.input, LayerKey(l, "attention.self.query"));
    dx += linear_back(dk, lc.input, LayerKey(l, "attention.self.key"));
    dx += linear_back(dv, lc.input, LayerKey(l, "attention.self.value"));
  }
  Matrix de = LayerNormBackward(dx, P("embeddings.LayerNorm.weight"), cache.ln0,
                                &G("embeddings.LayerNorm.weight"),
                                &G("embeddings.LayerNorm.bias"));
  Matrix &gw = G("embeddings.word_embeddings.weight");
  Matrix &gp = G("embeddings.position_embeddings.weight");
  Matrix &gt = G("embeddings.token_type_embeddings.weight");
  for (int i = 0; i < n; ++i) {
    gw.row(cache.ids[i]) += de.row(i);
    gp.row(i) += de.row(i);
    gt.row(0) += de.row(i);
  }
}

Eigen::VectorXd TransformerEncoder::Encode(const std::string &text) const {
  CheckLoaded();
  return Forward(tokenizer_.ToIds(Pieces(text)));
}

EncoderOutput TransformerEncoder::EncodeWithAttention(const std::string &text) const {
  CheckLoaded();
  EncoderOutput out;
  out.tokens = Pieces(text);
  TransformerCache cache;
  out.cls = Forward(tokenizer_.ToIds(out.tokens), &cache);
  for (auto &layer : cache.layers) out.attention.push_back(std::move(layer.attention));
  return out;
}

TransformerEncoder MakeFixtureEncoder(uint64_t seed) {
  std::vector<std::string> vocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
  for (char c = 'a'; c <= 'z'; ++c) vocab.emplace_back(1, c);
  for (char c = '0'; c <= '9'; ++c) vocab.emplace_back(1, c);
  for (char c : std::string("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")) {
    vocab.emplace_back(1, c);
  }
  for (char c = 'a'; c <= 'z'; ++c) vocab.push_back(std::string("##") + c);
  for (char c = '0'; c <= '9'; ++c) vocab.push_back(std::string("##") + c);

  TransformerConfig config;
  config.vocab_size = static_cast<int>(vocab.size());
  config.hidden_size = 32;
  config.num_layers = 2;
  config.num_heads = 2;
  config.intermediate_size = 64;
  config.max_position_embeddings = 64;
  config.max_tokens = 64;

  Rng rng(seed);
  ParamMap params;
  auto normal = [&](const std::string &key, Eigen::Index rows, Eigen::Index cols,
                    double stddev) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.Normal();
    params[key] = std::move(m);
  };
  auto layer_norm = [&](const std::string &prefix, int h) {
    normal(prefix + ".weight", h, 1, 0.1);
    params[prefix + ".weight"].array() += 1.0;
    normal(prefix + ".bias", h, 1, 0.1);
  };
  const int h = config.hidden_size;
  const int inter = config.intermediate_size;
  // Larger than the usual 0.02 so the tiny model's outputs depend visibly
  // on every weight.
  const double s = 0.2;
  normal("embeddings.word_embeddings.weight", config.vocab_size, h, s);
  normal("embeddings.position_embeddings.weight", config.max_position_embeddings, h, s);
  normal("embeddings.token_type_embeddings.weight", config.type_vocab_size, h, s);
  layer_norm("embeddings.LayerNorm", h);
  for (int l = 0; l < config.num_layers; ++l) {
    for (const char *p : {"attention.self.query", "attention.self.key",
                          "attention.self.value", "attention.output.dense"}) {
      normal(LayerKey(l, std::string(p) + ".weight"), h, h, s);
      normal(LayerKey(l, std::string(p) + ".bias"), h, 1, s);
    }
    layer_norm(LayerKey(l, "attention.output.LayerNorm"), h);
    normal(LayerKey(l, "intermediate.dense.weight"), inter, h, s);
    normal(LayerKey(l, "intermediate.dense.bias"), inter, 1, s);
    normal(LayerKey(l, "output.dense.weight"), h, inter, s);
    normal(LayerKey(l, "output.dense.bias"), h, 1, s);
    layer_norm(LayerKey(l, "output.LayerNorm"), h);
  }
  return TransformerEncoder(config, WordPieceTokenizer(vocab), std::move(params),
                            "tiny_encoder");
}

// ---------------------------------------------------------------------------
// Adam

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2,
                             double epsilon, double weight_decay)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      weight_decay_(weight_decay) {
  if (learning_rate <= 0) throw ArgumentError("learning rate must be positive");
}

void AdamOptimizer::Step(ParamMap &params, const ParamMap &grads) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, steps_);
  const double c2 = 1.0 - std::pow(beta2_, steps_);
  for (const auto &[name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw ArgumentError("gradient for unknown " + name);
    Matrix &p = it->second;
    auto [mi, m_new] = m_.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
    auto [vi, v_new] = v_.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
    Matrix &m = mi->second;
    Matrix &v = vi->second;
    m = beta1_ * m + (1 - beta1_) * g;
    v = beta2_ * v + (1 - beta2_) * g.cwiseAbs2();
    if (weight_decay_ > 0) p *= 1.0 - lr_ * weight_decay_;
    p.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon_);
  }
}

ParamMap ZerosLike(const ParamMap &params) {
  ParamMap out;
  for (const auto &[name, p] : params) out[name] = Matrix::Zero(p.rows(), p.cols());
  return out;
}

}  // namespace claimlens
