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

#ifndef CLAIMLENS_CONFIG_H_
#define CLAIMLENS_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "claimlens/corpus.h"
#include "claimlens/fusion.h"
#include "claimlens/kgraph.h"
#include "claimlens/linear.h"
#include "claimlens/ontology.h"
#include "claimlens/wordvec.h"

namespace claimlens {

struct DatasetSpec {
  std::string name = "claimbuster";  // claimbuster | newsclaims
  std::string path;
  std::string part = "groundtruth";  // claimbuster only
  // When set, this file is the test side and `path` the training side
  // (e.g. crowdsourced train, groundtruth test); otherwise `path` is split.
  std::string test_path;
  std::string test_part = "groundtruth";
  Fraction test_fraction;
  size_t min_tokens = 4;  // newsclaims cleaning
  // Extra source label codes for ClaimBuster exports.
  std::map<std::string, std::string> label_codes;
};

enum class FeatureKind {
  kTfidf,               // tfidf
  kTfidfLexiconLing,    // tfidf+liwc+ling
  kWord2VecPretrained,  // word2vec_pre
  kWord2VecDomain,      // word2vec_domain
  kWord2VecKg,          // word2vec+kg
  kOntology,            // ontology
};
FeatureKind ParseFeatureKind(const std::string &name);
std::string FeatureKindName(FeatureKind kind);

struct FeatureSpec {
  FeatureKind kind = FeatureKind::kTfidf;
  int ngram_min = 1;
  int ngram_max = 2;
  std::string lexicon;  // LIWC-style JSON lexicon
  std::string pretrained_vectors;
  std::string aggregation = "concat_pad";
  int max_len = 30;
  // Word vectors joined with the KG block: domain | pretrained.
  std::string kg_word2vec = "domain";
  SkipGramOptions word2vec;
};

enum class ModelKind { kSvm, kLogReg, kFcn, kBert, kBertOnto };
ModelKind ParseModelKind(const std::string &name);  // svm logreg fcn bert bert+onto
std::string ModelKindName(ModelKind kind);

struct EncoderSpec {
  std::string kind = "fixture";  // fixture | pretrained
  std::string path;              // pretrained directory
  uint64_t seed = 1;             // fixture weights
};

struct ModelSpec {
  ModelKind kind = ModelKind::kLogReg;
  double C = 1.0;
  int max_iterations = 1000;
  FcnOptions fcn;
  EncoderSpec encoder;
  TrainConfig train;
  HeadLoss loss = HeadLoss::kSigmoidBce;  // transformer heads only
};

struct KgSpec {
  std::string linker = "gazetteer";  // gazetteer | tagme | none
  std::string gazetteer;
  std::string tagme_endpoint = "https://tagme.d4science.org/tagme/tag";
  // Name of the environment variable holding the TagMe token.
  std::string tagme_token_env = "TAGME_TOKEN";
  double threshold = 0.1;
  std::string encoding = "node";  // node | neighbor_mean
  TransEOptions transe;
};

struct OntologySpec {
  std::string records;
  IngestOptions ingest;
  WalkOptions walks;
  OntologyEmbeddingOptions embedding;
};

struct AnalyzeSpec {
  // Another experiment config whose predictions form model B.
  std::string baseline_config;
  std::string model_label;     // defaults to the experiment name
  std::string baseline_label;  // defaults to the baseline's name
  int attention_samples = 6;
  int attention_layers = 4;
};

struct ExperimentConfig {
  std::string name;
  uint64_t seed = 1;
  std::string output_dir;
  DatasetSpec dataset;
  FeatureSpec features;
  ModelSpec model;
  KgSpec kgraph;
  OntologySpec ontology;
  AnalyzeSpec analyze;

  // Directory that relative paths are resolved against.
  std::string base_dir = ".";

  bool NeedsKg() const;
  bool NeedsOntology() const;
  bool IsNeural() const;  // bert, bert+onto
  std::string Resolve(const std::string &path) const;

  // Canonical JSON of every field except base_dir; parsing it back gives an
  // equal config.
  nlohmann::json ToJson() const;
  // SHA-256 of the canonical JSON.
  std::string Hash() const;
};

// YAML (or JSON) text with the sections name/seed/output_dir, dataset,
// features, model, kgraph, ontology, analyze. Unknown keys, wrong types and
// invalid values raise ConfigError naming the key. Sub-seeds default to
// values derived from `seed`.
ExperimentConfig ParseExperimentConfig(const std::string &text,
                                       const std::string &base_dir);
ExperimentConfig LoadExperimentConfig(const std::string &path);

// Checks that every input file the config needs exists; ConfigError names
// the first missing one.
void CheckInputPaths(const ExperimentConfig &config);

}  // namespace claimlens

#endif  // CLAIMLENS_CONFIG_H_
