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

#ifndef CLAIMLENS_LEXFEAT_H_
#define CLAIMLENS_LEXFEAT_H_

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "claimlens/corpus.h"

namespace claimlens {

// Sparse vector with strictly increasing indices and no stored zeros.
class SparseVector {
 public:
  using Entry = std::pair<uint32_t, double>;

  SparseVector() = default;
  explicit SparseVector(size_t dim) : dim_(dim) {}
  // Entries may be unsorted and contain zeros; duplicates are summed.
  SparseVector(size_t dim, std::vector<Entry> entries);

  static SparseVector FromDense(const Eigen::VectorXd &dense);

  size_t dim() const { return dim_; }
  const std::vector<Entry> &entries() const { return entries_; }
  size_t nnz() const { return entries_.size(); }

  double At(size_t index) const;
  double Norm() const;
  double Dot(const Eigen::VectorXd &dense) const;
  // dense += scale * this
  void AddTo(Eigen::VectorXd &dense, double scale) const;
  Eigen::VectorXd ToDense() const;

  // [this | other], with other's indices shifted by dim().
  SparseVector Concat(const SparseVector &other) const;

  bool operator==(const SparseVector &) const = default;

 private:
  size_t dim_ = 0;
  std::vector<Entry> entries_;
};

// Row-major sparse design matrix.
struct FeatureMatrix {
  size_t cols = 0;
  std::vector<SparseVector> rows;

  size_t size() const { return rows.size(); }
};

// Sparse triplet file: header "rows cols nnz", then one "row col value"
// line per stored entry, zero-based, values in %.17g.
void SaveFeatureMatrix(const FeatureMatrix &matrix, const std::string &path);
FeatureMatrix LoadFeatureMatrix(const std::string &path);

// ---------------------------------------------------------------------------
// TF-IDF over word n-grams

struct TfidfOptions {
  int ngram_min = 1;
  int ngram_max = 2;
  // idf = ln((1 + N) / (1 + df)) + 1 when smoothing, else ln(N / df) + 1.
  bool smooth_idf = true;
  bool l2_normalize = true;
};

// Word n-grams of `tokens` for n in [min_n, max_n], joined by a space.
std::vector<std::string> ExtractNgrams(const std::vector<std::string> &tokens,
                                       int min_n, int max_n);

// Immutable after Fit. Vocabulary is sorted lexicographically.
class TfidfModel {
 public:
  static TfidfModel Fit(const std::vector<std::string> &documents,
                        const TfidfOptions &options = {});
  static TfidfModel Fit(const Corpus &train, const TfidfOptions &options = {});

  // Raw term counts times idf, L2-normalized; unknown n-grams are dropped.
  SparseVector Transform(std::string_view text) const;

  const std::vector<std::string> &vocabulary() const { return vocabulary_; }
  const std::vector<double> &idf() const { return idf_; }
  std::optional<size_t> IndexOf(const std::string &term) const;
  size_t num_documents() const { return num_documents_; }
  const TfidfOptions &options() const { return options_; }
  size_t dim() const { return vocabulary_.size(); }

  std::string ToJson() const;
  static TfidfModel FromJson(const std::string &text);

 private:
  TfidfOptions options_;
  size_t num_documents_ = 0;
  std::vector<std::string> vocabulary_;
  std::vector<double> idf_;
  std::unordered_map<std::string, size_t> index_;
};

// ---------------------------------------------------------------------------
// Lexicon categories (LIWC-compatible word / prefix* lists)

class Lexicon {
 public:
  struct Category {
    std::string name;
    std::set<std::string> words;
    std::vector<std::string> prefixes;  // entries written as "prefix*"

    bool Matches(const std::string &token) const;
  };

  // JSON object {category: [word, "prefix*", ...]}; categories sorted by
  // name.
  static Lexicon FromJson(const std::string &text);
  static Lexicon Load(const std::string &path);

  const std::vector<Category> &categories() const { return categories_; }
  size_t size() const { return categories_.size(); }
  const Category *Find(const std::string &name) const;

 private:
  std::vector<Category> categories_;
};

// Per-category share of tokens matched by that category, in category order.
Eigen::VectorXd LexiconFeatures(std::string_view text, const Lexicon &lexicon);

// ---------------------------------------------------------------------------
// Linguistic scalar features

struct SentimentLexicon {
  Lexicon::Category positive;
  Lexicon::Category negative;

  // Small built-in polarity lists.
  static const SentimentLexicon &Default();
  // Uses the given categories of `lexicon` (e.g. "posemo" / "negemo").
  static SentimentLexicon FromLexicon(const Lexicon &lexicon,
                                      const std::string &positive,
                                      const std::string &negative);
};

inline constexpr std::array<const char *, 5> kLinguisticFeatureNames = {
    "word_count", "char_count", "punct_count", "complexity", "sentiment"};

// Vowel-group syllable estimate, at least 1 for any word with letters.
int CountSyllables(std::string_view word);

// Flesch reading ease; 0 for text without words.
double FleschReadingEase(std::string_view text);

// (positive hits - negative hits) / tokens, in [-1, 1].
double SentimentScore(std::string_view text,
                      const SentimentLexicon &sentiment =
                          SentimentLexicon::Default());

// [word_count, char_count, punct_count, complexity, sentiment].
Eigen::VectorXd LinguisticFeatures(std::string_view text,
                                   const SentimentLexicon &sentiment =
                                       SentimentLexicon::Default());

// ---------------------------------------------------------------------------
// Dense block scaling and assembly

// Z-score parameters fitted on training rows. Constant columns keep scale 1.
class DenseScaler {
 public:
  void Fit(const std::vector<Eigen::VectorXd> &rows);
  Eigen::VectorXd Transform(const Eigen::VectorXd &row) const;

  const Eigen::VectorXd &mean() const { return mean_; }
  const Eigen::VectorXd &scale() const { return scale_; }
  bool fitted() const { return fitted_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
  bool fitted_ = false;
};

}  // namespace claimlens

#endif  // CLAIMLENS_LEXFEAT_H_
