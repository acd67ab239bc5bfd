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

#ifndef CLAIMLENS_ONTOLOGY_H_
#define CLAIMLENS_ONTOLOGY_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "claimlens/wordvec.h"

namespace claimlens {

// One fact-check record as scraped into a ClaimsKG-style export.
struct FactCheckRecord {
  std::string id;
  std::string claim_text;
  std::string normalized_label;  // TRUE, FALSE, MIXTURE or OTHER
  std::vector<std::string> debunk_links;
  std::string review_body;
  std::string review_title;
  std::vector<std::string> references;
  std::vector<std::string> claim_entities;
  std::vector<std::string> review_entities;
  std::vector<std::string> wiki_categories;
  std::string review_author;
  std::string publication_date;
  std::string language;
};

bool IsNormalizedLabel(const std::string &label);

struct IngestOptions {
  // Records carrying a different "language" tag are dropped; records
  // without one are kept.
  std::string language = "en";
  // Unparseable lines raise FormatError instead of being skipped.
  bool strict = false;
};

struct IngestReport {
  size_t lines = 0;
  size_t kept = 0;
  size_t dropped_unparseable = 0;
  size_t dropped_language = 0;
  size_t dropped_invalid = 0;  // missing claim text or unknown label
};

// JSON lines with the FactCheckRecord field names. Order is preserved.
std::vector<FactCheckRecord> IngestRecords(const std::string &path,
                                           const IngestOptions &options = {},
                                           IngestReport *report = nullptr);

// Well-known names.
namespace onto {
inline constexpr char kType[] = "rdf:type";
inline constexpr char kClass[] = "owl:Class";
inline constexpr char kObjectProperty[] = "owl:ObjectProperty";
inline constexpr char kDataProperty[] = "owl:DatatypeProperty";
inline constexpr char kDomain[] = "rdfs:domain";
inline constexpr char kRange[] = "rdfs:range";
inline constexpr char kNamedIndividual[] = "owl:NamedIndividual";
}  // namespace onto

struct OntologyAssertion {
  std::string subject;
  std::string predicate;
  std::string object;
  bool literal = false;  // object is a data value, not an entity

  auto operator<=>(const OntologyAssertion &) const = default;
};

// Small OWL-style ontology: declared classes and properties (TBox),
// individuals with class memberships and property assertions (ABox), and
// label annotations. Names are compact IRIs without whitespace.
class Ontology {
 public:
  void DeclareClass(const std::string &name);
  void DeclareObjectProperty(const std::string &name, const std::string &domain,
                             const std::string &range);
  void DeclareDataProperty(const std::string &name, const std::string &domain);

  // Adds the individual if new and records the membership. A non-empty
  // label replaces an empty one; existing labels are kept.
  void AddIndividual(const std::string &name, const std::string &cls,
                     const std::string &label = "");
  // Both ends must be declared. Duplicates are ignored.
  void AddObjectAssertion(const std::string &subject, const std::string &property,
                          const std::string &object);
  void AddDataAssertion(const std::string &subject, const std::string &property,
                        const std::string &value);
  void SetLabel(const std::string &name, const std::string &label);

  const std::vector<std::string> &classes() const { return classes_; }
  const std::vector<std::string> &object_properties() const {
    return object_properties_;
  }
  const std::vector<std::string> &data_properties() const {
    return data_properties_;
  }
  // Individuals in insertion order.
  const std::vector<std::string> &individuals() const { return individuals_; }
  const std::set<std::string> &ClassesOf(const std::string &individual) const;
  // Object and data assertions in insertion order (no memberships).
  const std::vector<OntologyAssertion> &assertions() const { return assertions_; }
  const std::map<std::string, std::string> &labels() const { return labels_; }
  // Empty when absent.
  std::string Label(const std::string &name) const;

  bool IsClass(const std::string &name) const;
  bool IsIndividual(const std::string &name) const;
  bool IsObjectProperty(const std::string &name) const;
  bool IsDataProperty(const std::string &name) const;
  bool empty() const { return individuals_.empty(); }

  // Line-based `s p o .` triples: TBox declarations, memberships, then
  // assertions. Literals are JSON-quoted.
  std::string SerializeTriples() const;
  // Sorted JSON object name -> label.
  std::string SerializeLabels() const;
  static Ontology Parse(const std::string &triples, const std::string &labels);

  // Turtle with a `cl:` prefix and rdfs:label annotations.
  std::string ExportTurtle() const;

  void Save(const std::string &prefix) const;  // .triples and .labels.json
  static Ontology Load(const std::string &prefix);

 private:
  std::vector<std::string> classes_;
  std::vector<std::string> object_properties_;
  std::vector<std::string> data_properties_;
  std::map<std::string, std::pair<std::string, std::string>> object_signature_;
  std::map<std::string, std::string> data_domain_;
  std::vector<std::string> individuals_;
  std::map<std::string, std::set<std::string>> memberships_;
  std::vector<OntologyAssertion> assertions_;
  std::set<OntologyAssertion> assertion_set_;
  std::map<std::string, std::string> labels_;
};

// Lowercase underscore slug of the surface tokens; "unknown" when empty.
std::string OntologySlug(const std::string &surface);

// Surface form of an entity reference: the last path segment of a URL with
// underscores as spaces, or the text itself.
std::string EntitySurface(const std::string &reference);

// Builds the claim-review ontology: six classes (Claim, ClaimReview, Entity,
// WikiCategory, Author, Label), seven properties, one Claim individual per
// record and deduplicated Entity/WikiCategory/Author/Label individuals.
Ontology BuildOntology(const std::vector<FactCheckRecord> &records);

struct WalkOptions {
  int walk_length = 4;  // nodes per walk
  int walks_per_entity = 10;
  uint64_t seed = 1;
};

struct WalkCorpus {
  std::vector<std::vector<std::string>> structure;
  std::vector<std::vector<std::string>> lexical;

  // Structure sentences followed by lexical ones.
  std::vector<std::vector<std::string>> Combined() const;
};

// Uniform random walks from every class and individual over memberships and
// object assertions, relation tokens interleaved, plus their label-token
// rewrites.
WalkCorpus GenerateWalkCorpus(const Ontology &ontology, const WalkOptions &options);

// Label tokens used for a name in lexical sentences.
std::vector<std::string> LexicalTokens(const Ontology &ontology,
                                       const std::string &name);

struct SentenceEncoding {
  Eigen::VectorXd vector;
  int matched_count = 0;  // matched spans
  std::vector<std::string> matched_entities;
};

class OntologyEmbedding {
 public:
  explicit OntologyEmbedding(int dim) : vectors_(dim) {}

  int dim() const { return vectors_.dim(); }
  const EmbeddingTable &vectors() const { return vectors_; }
  EmbeddingTable &vectors() { return vectors_; }

  // Keys are lowercase, space-joined label tokens.
  const std::map<std::string, std::vector<std::string>> &token_index() const {
    return token_index_;
  }
  void Index(const std::string &phrase, const std::string &entity);

  // Greedy longest match of token spans against the index; mean of the
  // distinct matched entity vectors, zero when nothing matches.
  SentenceEncoding Encode(const std::string &text) const;

  // `<prefix>.vec` word2vec text and `<prefix>.index.json`.
  void Save(const std::string &prefix) const;
  static OntologyEmbedding Load(const std::string &prefix);

 private:
  EmbeddingTable vectors_;
  std::map<std::string, std::vector<std::string>> token_index_;
  size_t max_phrase_tokens_ = 0;
};

struct OntologyEmbeddingOptions {
  SkipGramOptions skipgram;
  // Only individuals of these classes with labels of at most this many
  // tokens enter the token index.
  std::vector<std::string> indexed_classes = {"cl:Entity", "cl:WikiCategory",
                                              "cl:Author"};
  int max_index_tokens = 8;
};

OntologyEmbedding TrainOntologyEmbedding(
    const Ontology &ontology, const WalkCorpus &corpus,
    const OntologyEmbeddingOptions &options = {});

}  // namespace claimlens

#endif  // CLAIMLENS_ONTOLOGY_H_
