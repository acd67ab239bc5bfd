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

#include "claimlens/lexfeat.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "claimlens/errors.h"
#include "claimlens/text.h"

namespace claimlens {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// SparseVector

SparseVector::SparseVector(size_t dim, std::vector<Entry> entries) : dim_(dim) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry &a, const Entry &b) { return a.first < b.first; });
  for (const Entry &e : entries) {
    if (e.first >= dim_) {
      throw ArgumentError("sparse index " + std::to_string(e.first) +
                          " out of range " + std::to_string(dim_));
    }
    if (!entries_.empty() && entries_.back().first == e.first) {
      entries_.back().second += e.second;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const Entry &e) { return e.second == 0.0; });
}

SparseVector SparseVector::FromDense(const Eigen::VectorXd &dense) {
  SparseVector v(static_cast<size_t>(dense.size()));
  for (Eigen::Index i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      v.entries_.emplace_back(static_cast<uint32_t>(i), dense[i]);
    }
  }
  return v;
}

double SparseVector::At(size_t index) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), index,
      [](const Entry &e, size_t i) { return e.first < i; });
  return it != entries_.end() && it->first == index ? it->second : 0.0;
}

double SparseVector::Norm() const {
  double sum = 0.0;
  for (const Entry &e : entries_) sum += e.second * e.second;
  return std::sqrt(sum);
}

double SparseVector::Dot(const Eigen::VectorXd &dense) const {
  double sum = 0.0;
  for (const Entry &e : entries_) sum += e.second * dense[e.first];
  return sum;
}

void SparseVector::AddTo(Eigen::VectorXd &dense, double scale) const {
  for (const Entry &e : entries_) dense[e.first] += scale * e.second;
}

Eigen::VectorXd SparseVector::ToDense() const {
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (const Entry &e : entries_) dense[e.first] = e.second;
  return dense;
}

SparseVector SparseVector::Concat(const SparseVector &other) const {
  SparseVector out(dim_ + other.dim_);
  out.entries_ = entries_;
  for (const Entry &e : other.entries_) {
    out.entries_.emplace_back(static_cast<uint32_t>(e.first + dim_), e.second);
  }
  return out;
}

void SaveFeatureMatrix(const FeatureMatrix &matrix, const std::string &path) {
  size_t nnz = 0;
  for (const auto &row : matrix.rows) nnz += row.nnz();
  std::string out = std::to_string(matrix.rows.size()) + " " +
                    std::to_string(matrix.cols) + " " + std::to_string(nnz) +
                    "\n";
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    for (const auto &[col, value] : matrix.rows[r].entries()) {
      out += std::to_string(r) + " " + std::to_string(col) + " " +
             FormatDouble(value) + "\n";
    }
  }
  WriteFile(path, out);
}

FeatureMatrix LoadFeatureMatrix(const std::string &path) {
  std::istringstream in(ReadFile(path));
  size_t rows = 0, nnz = 0;
  FeatureMatrix matrix;
  if (!(in >> rows >> matrix.cols >> nnz)) {
    throw FormatError(path + ": bad triplet header");
  }
  std::vector<std::vector<SparseVector::Entry>> entries(rows);
  for (size_t i = 0; i < nnz; ++i) {
    size_t r = 0, c = 0;
    double value = 0;
    if (!(in >> r >> c >> value) || r >= rows || c >= matrix.cols) {
      throw FormatError(path + ": bad triplet " + std::to_string(i + 1));
    }
    entries[r].emplace_back(static_cast<uint32_t>(c), value);
  }
  for (auto &row : entries) matrix.rows.emplace_back(matrix.cols, std::move(row));
  return matrix;
}

// ---------------------------------------------------------------------------
// TF-IDF

std::vector<std::string> ExtractNgrams(const std::vector<std::string> &tokens,
                                       int min_n, int max_n) {
  std::vector<std::string> grams;
  for (int n = min_n; n <= max_n; ++n) {
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[i + k];
      }
      grams.push_back(std::move(gram));
    }
  }
  return grams;
}

TfidfModel TfidfModel::Fit(const std::vector<std::string> &documents,
                           const TfidfOptions &options) {
  if (documents.empty()) throw ArgumentError("tf-idf needs a non-empty corpus");
  if (options.ngram_min < 1 || options.ngram_max < options.ngram_min) {
    throw ArgumentError("bad n-gram range");
  }
  std::map<std::string, size_t> df;
  for (const std::string &doc : documents) {
    auto grams = ExtractNgrams(Tokenize(doc), options.ngram_min,
                               options.ngram_max);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto &g : grams) ++df[g];
  }
  TfidfModel model;
  model.options_ = options;
  model.num_documents_ = documents.size();
  const double n = static_cast<double>(documents.size());
  for (const auto &[term, count] : df) {
    const double d = static_cast<double>(count);
    model.index_[term] = model.vocabulary_.size();
    model.vocabulary_.push_back(term);
    model.idf_.push_back(options.smooth_idf ? std::log((1 + n) / (1 + d)) + 1
                                            : std::log(n / d) + 1);
  }
  return model;
}

TfidfModel TfidfModel::Fit(const Corpus &train, const TfidfOptions &options) {
  return Fit(train.Texts(), options);
}

std::optional<size_t> TfidfModel::IndexOf(const std::string &term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVector TfidfModel::Transform(std::string_view text) const {
  std::map<uint32_t, double> counts;
  for (const auto &g :
       ExtractNgrams(Tokenize(text), options_.ngram_min, options_.ngram_max)) {
    auto it = index_.find(g);
    if (it != index_.end()) counts[static_cast<uint32_t>(it->second)] += 1.0;
  }
  std::vector<SparseVector::Entry> entries;
  double norm = 0.0;
  for (const auto &[index, count] : counts) {
    const double value = count * idf_[index];
    entries.emplace_back(index, value);
    norm += value * value;
  }
  if (options_.l2_normalize && norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto &e : entries) e.second /= norm;
  }
  return SparseVector(vocabulary_.size(), std::move(entries));
}

std::string TfidfModel::ToJson() const {
  json j = {{"ngram_min", options_.ngram_min},
            {"ngram_max", options_.ngram_max},
            {"smooth_idf", options_.smooth_idf},
            {"l2_normalize", options_.l2_normalize},
            {"num_documents", num_documents_},
            {"vocabulary", vocabulary_},
            {"idf", idf_}};
  return j.dump();
}

TfidfModel TfidfModel::FromJson(const std::string &text) {
  TfidfModel model;
  try {
    json j = json::parse(text);
    model.options_.ngram_min = j.at("ngram_min");
    model.options_.ngram_max = j.at("ngram_max");
    model.options_.smooth_idf = j.at("smooth_idf");
    model.options_.l2_normalize = j.at("l2_normalize");
    model.num_documents_ = j.at("num_documents");
    model.vocabulary_ = j.at("vocabulary").get<std::vector<std::string>>();
    model.idf_ = j.at("idf").get<std::vector<double>>();
  } catch (const json::exception &e) {
    throw FormatError(std::string("bad tf-idf model: ") + e.what());
  }
  if (model.vocabulary_.size() != model.idf_.size()) {
    throw FormatError("tf-idf vocabulary and idf sizes differ");
  }
  for (size_t i = 0; i < model.vocabulary_.size(); ++i) {
    model.index_[model.vocabulary_[i]] = i;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Lexicon

bool Lexicon::Category::Matches(const std::string &token) const {
  if (words.count(token)) return true;
  for (const auto &p : prefixes) {
    if (token.compare(0, p.size(), p) == 0) return true;
  }
  return false;
}

Lexicon Lexicon::FromJson(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw FormatError(std::string("bad lexicon: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("lexicon must be a JSON object");
  Lexicon lexicon;
  for (const auto &[name, entries] : j.items()) {
    if (!entries.is_array()) {
      throw FormatError("lexicon category '" + name + "' is not a list");
    }
    Category category;
    category.name = name;
    for (const auto &entry : entries) {
      if (!entry.is_string()) {
        throw FormatError("lexicon category '" + name + "' has a non-string");
      }
      std::string word = ToLower(entry.get<std::string>());
      if (!word.empty() && word.back() == '*') {
        word.pop_back();
        if (!word.empty()) category.prefixes.push_back(word);
      } else if (!word.empty()) {
        category.words.insert(word);
      }
    }
    std::sort(category.prefixes.begin(), category.prefixes.end());
    lexicon.categories_.push_back(std::move(category));
  }
  return lexicon;
}

Lexicon Lexicon::Load(const std::string &path) {
  return FromJson(ReadFile(path));
}

const Lexicon::Category *Lexicon::Find(const std::string &name) const {
  for (const auto &c : categories_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Eigen::VectorXd LexiconFeatures(std::string_view text, const Lexicon &lexicon) {
  Eigen::VectorXd features =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lexicon.size()));
  const auto tokens = Tokenize(text);
  if (tokens.empty()) return features;
  for (size_t c = 0; c < lexicon.size(); ++c) {
    size_t hits = 0;
    for (const auto &t : tokens) hits += lexicon.categories()[c].Matches(t);
    features[c] = static_cast<double>(hits) / static_cast<double>(tokens.size());
  }
  return features;
}

// ---------------------------------------------------------------------------
// Linguistic features

const SentimentLexicon &SentimentLexicon::Default() {
  static const SentimentLexicon *kDefault = [] {
    auto *s = new SentimentLexicon;
    s->positive.name = "positive";
    s->negative.name = "negative";
    s->positive.words = {
        "good",    "great",    "best",      "better",  "excellent", "happy",
        "hope",    "love",     "proud",     "strong",  "success",   "win",
        "safe",    "secure",   "benefit",   "improve", "improved",  "growth",
        "support", "agree",    "fair",      "free",    "positive",  "peace",
        "thank",   "thanks",   "wonderful", "gain",    "opportunity", "honest",
        "right",   "protect",  "prosper",   "healthy", "progress",  "trust"};
    s->positive.prefixes = {"benefici", "celebrat", "optimis", "succeed"};
    s->negative.words = {
        "bad",     "worse",    "worst",    "fail",     "failed",   "failure",
        "crisis",  "lost",     "lose",     "loss",     "war",      "threat",
        "wrong",   "poor",     "danger",   "dangerous", "problem", "problems",
        "fear",    "hate",     "weak",     "attack",   "debt",     "deficit",
        "terrible", "horrible", "unfair",  "corrupt",  "lie",      "lies",
        "kill",    "killed",   "death",    "unemployment", "decline", "cut"};
    s->negative.prefixes = {"destroy", "disaster", "terroris", "violen"};
    return s;
  }();
  return *kDefault;
}

SentimentLexicon SentimentLexicon::FromLexicon(const Lexicon &lexicon,
                                               const std::string &positive,
                                               const std::string &negative) {
  const auto *pos = lexicon.Find(positive);
  const auto *neg = lexicon.Find(negative);
  if (!pos || !neg) {
    throw ArgumentError("lexicon lacks sentiment categories '" + positive +
                        "' / '" + negative + "'");
  }
  return SentimentLexicon{*pos, *neg};
}

int CountSyllables(std::string_view word) {
  std::string w;
  for (char c : word) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (w.empty()) return 0;
  auto vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  int groups = 0;
  bool previous = false;
  for (char c : w) {
    bool v = vowel(c);
    if (v && !previous) ++groups;
    previous = v;
  }
  // Silent final e ("make"), but not "-le" ("table").
  if (groups > 1 && w.size() > 2 && w.back() == 'e' && !vowel(w[w.size() - 2]) &&
      !(w[w.size() - 2] == 'l' && !vowel(w[w.size() - 3]))) {
    --groups;
  }
  return std::max(groups, 1);
}

double FleschReadingEase(std::string_view text) {
  const auto tokens = Tokenize(text);
  if (tokens.empty()) return 0.0;
  int sentences = 0;
  bool in_terminator = false;
  for (char c : text) {
    bool t = c == '.' || c == '!' || c == '?';
    if (t && !in_terminator) ++sentences;
    in_terminator = t;
  }
  sentences = std::max(sentences, 1);
  int syllables = 0;
  for (const auto &t : tokens) syllables += std::max(CountSyllables(t), 1);
  const double words = static_cast<double>(tokens.size());
  return 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words);
}

double SentimentScore(std::string_view text, const SentimentLexicon &sentiment) {
  const auto tokens = Tokenize(text);
  if (tokens.empty()) return 0.0;
  int score = 0;
  for (const auto &t : tokens) {
    score += sentiment.positive.Matches(t);
    score -= sentiment.negative.Matches(t);
  }
  return static_cast<double>(score) / static_cast<double>(tokens.size());
}

Eigen::VectorXd LinguisticFeatures(std::string_view text,
                                   const SentimentLexicon &sentiment) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(5);
  const auto tokens = Tokenize(text);
  f[0] = static_cast<double>(tokens.size());
  f[1] = static_cast<double>(CountCodePoints(text));
  f[2] = static_cast<double>(std::count_if(text.begin(), text.end(), [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  }));
  f[3] = FleschReadingEase(text);
  f[4] = SentimentScore(text, sentiment);
  return f;
}

// ---------------------------------------------------------------------------
// DenseScaler

void DenseScaler::Fit(const std::vector<Eigen::VectorXd> &rows) {
  if (rows.empty()) throw ArgumentError("cannot fit scaler on no rows");
  const Eigen::Index d = rows[0].size();
  mean_ = Eigen::VectorXd::Zero(d);
  for (const auto &r : rows) {
    if (r.size() != d) throw ArgumentError("ragged dense rows");
    mean_ += r;
  }
  mean_ /= static_cast<double>(rows.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto &r : rows) var += (r - mean_).cwiseAbs2();
  var /= static_cast<double>(rows.size());
  scale_ = var.cwiseSqrt();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(scale_[i] > 1e-12)) scale_[i] = 1.0;
  }
  fitted_ = true;
}

Eigen::VectorXd DenseScaler::Transform(const Eigen::VectorXd &row) const {
  if (!fitted_) throw StateError("scaler used before Fit");
  if (row.size() != mean_.size()) throw ArgumentError("scaler dim mismatch");
  return (row - mean_).cwiseQuotient(scale_);
}

}  // namespace claimlens
