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

#ifndef CLAIMLENS_CORPUS_H_
#define CLAIMLENS_CORPUS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace claimlens {

enum class SchemeName { kClaimBuster3, kNewsClaims2 };

// Ordered label set of a dataset. Labels are referred to by their index.
class LabelScheme {
 public:
  // NFS, UFS, CFS.
  static LabelScheme ClaimBuster3();
  // FVC, NON_FVC.
  static LabelScheme NewsClaims2();
  // Parses "CLAIMBUSTER3" / "NEWSCLAIMS2".
  static LabelScheme FromName(const std::string &name);

  SchemeName name() const { return name_; }
  std::string NameString() const;
  const std::vector<std::string> &labels() const { return labels_; }
  int size() const { return static_cast<int>(labels_.size()); }
  const std::string &Label(int index) const { return labels_.at(index); }

  std::optional<int> IndexOf(const std::string &label) const;
  bool Contains(int index) const { return index >= 0 && index < size(); }

  bool operator==(const LabelScheme &other) const {
    return name_ == other.name_;
  }

 private:
  LabelScheme(SchemeName name, std::vector<std::string> labels)
      : name_(name), labels_(std::move(labels)) {}

  SchemeName name_;
  std::vector<std::string> labels_;
};

struct ClaimInstance {
  std::string id;
  std::string text;
  int label = 0;  // index into the corpus scheme
  std::optional<std::string> speaker;
  std::optional<std::string> speaker_title;
  std::optional<std::string> speaker_party;
  std::optional<std::string> source_doc;

  bool operator==(const ClaimInstance &) const = default;
};

enum class SplitTag { kTrain, kTest, kAll };

std::string SplitTagName(SplitTag tag);
SplitTag ParseSplitTag(const std::string &name);

// Ordered collection of instances sharing one label scheme. Add() enforces
// the instance invariants: non-empty text, in-scheme label, unique id.
class Corpus {
 public:
  explicit Corpus(LabelScheme scheme, SplitTag split = SplitTag::kAll)
      : scheme_(std::move(scheme)), split_(split) {}

  void Add(ClaimInstance instance);

  const LabelScheme &scheme() const { return scheme_; }
  SplitTag split() const { return split_; }
  void set_split(SplitTag split) { split_ = split; }

  const std::vector<ClaimInstance> &instances() const { return instances_; }
  size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  const ClaimInstance &operator[](size_t i) const { return instances_[i]; }

  std::vector<int> Labels() const;
  std::vector<std::string> Texts() const;

  bool operator==(const Corpus &other) const {
    return scheme_ == other.scheme_ && split_ == other.split_ &&
           instances_ == other.instances_;
  }

 private:
  LabelScheme scheme_;
  SplitTag split_;
  std::vector<ClaimInstance> instances_;
  std::map<std::string, size_t> ids_;
};

// ---------------------------------------------------------------------------
// ClaimBuster

enum class ClaimBusterPart { kGroundTruth, kCrowdsourced };

ClaimBusterPart ParseClaimBusterPart(const std::string &name);

// Column names and label code table of a ClaimBuster export. The defaults
// follow the public CSV release (Verdict -1/0/1).
struct ClaimBusterFormat {
  std::string id_column = "Sentence_id";
  std::string text_column = "Text";
  std::string label_column = "Verdict";
  std::string speaker_column = "Speaker";
  std::string title_column = "Speaker_title";
  std::string party_column = "Speaker_party";
  std::string doc_column = "File_id";
  // Source label code -> scheme label.
  std::map<std::string, std::string> label_codes = {
      {"-1", "NFS"}, {"0", "UFS"}, {"1", "CFS"},
      {"NFS", "NFS"}, {"UFS", "UFS"}, {"CFS", "CFS"}};
};

// Loads a comma- or tab-delimited export with a header row. Rows keep file
// order. Throws FileError / SchemaError.
Corpus LoadClaimBuster(const std::string &path, ClaimBusterPart part,
                       const ClaimBusterFormat &format = {});

// ---------------------------------------------------------------------------
// NewsClaims

struct CleaningStats {
  size_t input = 0;
  size_t urls_removed = 0;          // URL tokens stripped
  size_t citations_removed = 0;     // bracketed markers stripped
  size_t dropped_empty = 0;         // nothing left after stripping
  size_t dropped_short = 0;         // fewer than min_tokens tokens
  size_t dropped_duplicate = 0;     // case-folded duplicate
  size_t kept = 0;
};

struct NewsClaimsCleaning {
  size_t min_tokens = 4;
};

// Applies the NewsClaims noise filters in order: URL token removal,
// bracketed citation removal, whitespace normalization, short-sentence
// filter, then case-folded exact-duplicate removal (first kept).
// Idempotent.
Corpus CleanNewsClaims(const Corpus &raw, const NewsClaimsCleaning &options = {},
                       CleaningStats *stats = nullptr);

// Loads JSON lines {"id","text","label","doc"} and cleans them.
Corpus LoadNewsClaims(const std::string &path,
                      const NewsClaimsCleaning &options = {},
                      CleaningStats *stats = nullptr);

// Removes URL tokens (http://, https://, www.) and returns the remainder.
std::string StripUrls(const std::string &text, size_t *removed = nullptr);

// Removes square-bracketed citation markers such as "[1]", "[2, 3]" or
// "[citation needed]".
std::string StripCitations(const std::string &text, size_t *removed = nullptr);

// ---------------------------------------------------------------------------
// Splitting and summaries

// Strictly between 0 and 1.
struct Fraction {
  int64_t numerator = 1;
  int64_t denominator = 3;

  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  // Parses "1/3" or a decimal like "0.25".
  static Fraction Parse(const std::string &text);
  std::string ToString() const;
};

// Stratified, seeded train/test split. Each class contributes
// round(fraction * class_size) test instances; both sides keep the corpus
// order. Throws ArgumentError for fractions outside (0, 1) or empty input.
std::pair<Corpus, Corpus> Split(const Corpus &corpus, Fraction test_fraction,
                                uint64_t seed);

struct LabelShare {
  std::string label;
  size_t count = 0;
  double percent = 0.0;  // exact share, not rounded
};

// Per-label counts and percentages in scheme order. Empty corpus gives an
// empty list.
std::vector<LabelShare> ClassDistribution(const Corpus &corpus);

// Rounds percentages to `decimals` places so that they sum to exactly 100
// (largest remainder method).
std::vector<double> RoundPercentages(const std::vector<LabelShare> &shares,
                                     int decimals = 2);

// ---------------------------------------------------------------------------
// Persistence: JSON lines, first record is the scheme header.

std::string SerializeCorpus(const Corpus &corpus);
Corpus ParseCorpus(const std::string &jsonl, const std::string &origin = "");
void SaveCorpus(const Corpus &corpus, const std::string &path);
Corpus LoadCorpus(const std::string &path);

}  // namespace claimlens

#endif  // CLAIMLENS_CORPUS_H_
