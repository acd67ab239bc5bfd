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

#include "claimlens/config.h"

#include <filesystem>
#include <set>

#include <yaml-cpp/yaml.h>

#include "claimlens/errors.h"
#include "claimlens/hashing.h"
#include "claimlens/random.h"
#include "claimlens/text.h"

namespace claimlens {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, FeatureKind> kFeatureKinds = {
    {"tfidf", FeatureKind::kTfidf},
    {"tfidf+liwc+ling", FeatureKind::kTfidfLexiconLing},
    {"word2vec_pre", FeatureKind::kWord2VecPretrained},
    {"word2vec_domain", FeatureKind::kWord2VecDomain},
    {"word2vec+kg", FeatureKind::kWord2VecKg},
    {"ontology", FeatureKind::kOntology},
};

const std::map<std::string, ModelKind> kModelKinds = {
    {"svm", ModelKind::kSvm},   {"logreg", ModelKind::kLogReg},
    {"fcn", ModelKind::kFcn},   {"bert", ModelKind::kBert},
    {"bert+onto", ModelKind::kBertOnto},
};

template <typename Enum>
std::string NameOf(const std::map<std::string, Enum> &table, Enum value) {
  for (const auto &[name, v] : table) {
    if (v == value) return name;
  }
  throw ArgumentError("unnamed enum value");
}

// Reads one YAML mapping, remembering which keys were consumed so that
// unknown keys can be reported.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(Where("") + " must be a mapping");
    }
  }

  template <typename T>
  void Get(const std::string &key, T *out) {
    used_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const YAML::Node value = node_[key];
    if (!value || value.IsNull()) return;
    try {
      *out = value.as<T>();
    } catch (const YAML::Exception &) {
      throw ConfigError(Where(key) + " has the wrong type");
    }
  }

  template <typename T>
  bool Has(const std::string &key) const {
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  Section Child(const std::string &key) {
    used_.insert(key);
    YAML::Node child;
    if (node_ && node_.IsMap() && node_[key]) child = node_[key];
    return Section(child, Where(key));
  }

  void Finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto &item : node_) {
      const std::string key = item.first.as<std::string>();
      if (!used_.count(key)) throw ConfigError("unknown config key " + Where(key));
    }
  }

  std::string Where(const std::string &key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const YAML::Node &node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

void Require(bool ok, const std::string &message) {
  if (!ok) throw ConfigError(message);
}

void ReadSkipGram(Section &s, SkipGramOptions *o) {
  s.Get("dim", &o->dim);
  s.Get("window", &o->window);
  s.Get("negative", &o->negative);
  s.Get("epochs", &o->epochs);
  s.Get("min_count", &o->min_count);
  s.Get("learning_rate", &o->learning_rate);
  s.Get("seed", &o->seed);
  Require(o->dim >= 2, s.Where("dim") + " must be at least 2");
  Require(o->window >= 1, s.Where("window") + " must be at least 1");
  Require(o->negative >= 1, s.Where("negative") + " must be at least 1");
  Require(o->epochs >= 0, s.Where("epochs") + " must be non-negative");
  Require(o->min_count >= 1, s.Where("min_count") + " must be at least 1");
  Require(o->learning_rate > 0, s.Where("learning_rate") + " must be positive");
}

nlohmann::json SkipGramJson(const SkipGramOptions &o) {
  return {{"dim", o.dim},           {"window", o.window},
          {"negative", o.negative}, {"epochs", o.epochs},
          {"min_count", o.min_count}, {"learning_rate", o.learning_rate},
          {"seed", o.seed}};
}

}  // namespace

FeatureKind ParseFeatureKind(const std::string &name) {
  const auto it = kFeatureKinds.find(name);
  if (it == kFeatureKinds.end()) throw ConfigError("unknown feature kind '" + name + "'");
  return it->second;
}

std::string FeatureKindName(FeatureKind kind) { return NameOf(kFeatureKinds, kind); }

ModelKind ParseModelKind(const std::string &name) {
  const auto it = kModelKinds.find(name);
  if (it == kModelKinds.end()) throw ConfigError("unknown model kind '" + name + "'");
  return it->second;
}

std::string ModelKindName(ModelKind kind) { return NameOf(kModelKinds, kind); }

bool ExperimentConfig::IsNeural() const {
  return model.kind == ModelKind::kBert || model.kind == ModelKind::kBertOnto;
}

bool ExperimentConfig::NeedsKg() const {
  return !IsNeural() && features.kind == FeatureKind::kWord2VecKg;
}

bool ExperimentConfig::NeedsOntology() const {
  return model.kind == ModelKind::kBertOnto ||
         (!IsNeural() && features.kind == FeatureKind::kOntology);
}

std::string ExperimentConfig::Resolve(const std::string &path) const {
  if (path.empty()) return path;
  const fs::path p(path);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

nlohmann::json ExperimentConfig::ToJson() const {
  nlohmann::json j;
  j["name"] = name;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["dataset"] = {{"name", dataset.name},
                  {"path", dataset.path},
                  {"part", dataset.part},
                  {"test_path", dataset.test_path},
                  {"test_part", dataset.test_part},
                  {"test_fraction", dataset.test_fraction.ToString()},
                  {"min_tokens", dataset.min_tokens},
                  {"label_codes", dataset.label_codes}};
  j["features"] = {{"kind", FeatureKindName(features.kind)},
                   {"ngram_min", features.ngram_min},
                   {"ngram_max", features.ngram_max},
                   {"lexicon", features.lexicon},
                   {"pretrained_vectors", features.pretrained_vectors},
                   {"aggregation", features.aggregation},
                   {"max_len", features.max_len},
                   {"kg_word2vec", features.kg_word2vec},
                   {"word2vec", SkipGramJson(features.word2vec)}};
  const FcnOptions &f = model.fcn;
  const TrainConfig &t = model.train;
  j["model"] = {
      {"kind", ModelKindName(model.kind)},
      {"C", model.C},
      {"loss", HeadLossName(model.loss)},
      {"max_iterations", model.max_iterations},
      {"fcn",
       {{"hidden", f.hidden},
        {"learning_rate", f.learning_rate},
        {"momentum", f.momentum},
        {"batch_size", f.batch_size},
        {"max_epochs", f.max_epochs},
        {"validation_fraction", f.validation_fraction},
        {"patience", f.patience},
        {"seed", f.seed}}},
      {"encoder",
       {{"kind", model.encoder.kind}, {"path", model.encoder.path}, {"seed", model.encoder.seed}}},
      {"train",
       {{"lr", t.lr},
        {"batch", t.batch},
        {"epochs", t.epochs},
        {"seed", t.seed},
        {"dropout", t.dropout},
        {"fine_tune_encoder", t.fine_tune_encoder},
        {"normalize_onto", t.normalize_onto},
        {"weight_decay", t.weight_decay}}}};
  const TransEOptions &te = kgraph.transe;
  j["kgraph"] = {{"linker", kgraph.linker},
                 {"gazetteer", kgraph.gazetteer},
                 {"tagme_endpoint", kgraph.tagme_endpoint},
                 {"tagme_token_env", kgraph.tagme_token_env},
                 {"threshold", kgraph.threshold},
                 {"encoding", kgraph.encoding},
                 {"transe",
                  {{"dim", te.dim},
                   {"margin", te.margin},
                   {"lr", te.learning_rate},
                   {"epochs", te.epochs},
                   {"batch", te.batch_size},
                   {"norm", TransENormName(te.norm)},
                   {"seed", te.seed}}}};
  nlohmann::json embedding = SkipGramJson(ontology.embedding.skipgram);
  embedding["max_index_tokens"] = ontology.embedding.max_index_tokens;
  j["ontology"] = {{"records", ontology.records},
                   {"language", ontology.ingest.language},
                   {"strict", ontology.ingest.strict},
                   {"walks",
                    {{"walk_length", ontology.walks.walk_length},
                     {"walks_per_entity", ontology.walks.walks_per_entity},
                     {"seed", ontology.walks.seed}}},
                   {"embedding", embedding}};
  j["analyze"] = {{"baseline_config", analyze.baseline_config},
                  {"model_label", analyze.model_label},
                  {"baseline_label", analyze.baseline_label},
                  {"attention_samples", analyze.attention_samples},
                  {"attention_layers", analyze.attention_layers}};
  return j;
}

std::string ExperimentConfig::Hash() const { return Sha256Hex(ToJson().dump()); }

ExperimentConfig ParseExperimentConfig(const std::string &text, const std::string &base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception &e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  Section top(root, "");
  top.Get("name", &c.name);
  top.Get("seed", &c.seed);
  top.Get("output_dir", &c.output_dir);
  Require(!c.name.empty(), "config needs a non-empty 'name'");
  for (char ch : c.name) {
    Require(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.',
            "name may only contain letters, digits, '-', '_' and '.'");
  }
  Require(top.Has<std::string>("seed"), "config needs an explicit 'seed'");

  // Sub-seeds default to streams derived from the experiment seed.
  c.dataset.test_fraction = Fraction{1, 3};
  c.features.word2vec.seed = DeriveSeed(c.seed, 11);
  c.kgraph.transe.seed = DeriveSeed(c.seed, 12);
  c.ontology.walks.seed = DeriveSeed(c.seed, 13);
  c.ontology.embedding.skipgram.seed = DeriveSeed(c.seed, 14);
  c.model.fcn.seed = DeriveSeed(c.seed, 15);
  c.model.train.seed = c.seed;

  {
    Section s = top.Child("dataset");
    DatasetSpec &d = c.dataset;
    s.Get("name", &d.name);
    s.Get("path", &d.path);
    s.Get("part", &d.part);
    s.Get("test_path", &d.test_path);
    s.Get("test_part", &d.test_part);
    std::string fraction = d.test_fraction.ToString();
    s.Get("test_fraction", &fraction);
    s.Get("min_tokens", &d.min_tokens);
    s.Get("label_codes", &d.label_codes);
    s.Finish();
    Require(d.name == "claimbuster" || d.name == "newsclaims",
            "dataset.name must be claimbuster or newsclaims");
    Require(!d.path.empty(), "dataset.path is required");
    try {
      d.test_fraction = Fraction::Parse(fraction);
      if (d.name == "claimbuster") {
        ParseClaimBusterPart(d.part);
        ParseClaimBusterPart(d.test_part);
      }
    } catch (const ArgumentError &e) {
      throw ConfigError(std::string("dataset: ") + e.what());
    }
    Require(d.min_tokens >= 1, "dataset.min_tokens must be at least 1");
  }
  {
    Section s = top.Child("features");
    FeatureSpec &f = c.features;
    std::string kind = FeatureKindName(f.kind);
    s.Get("kind", &kind);
    f.kind = ParseFeatureKind(kind);
    s.Get("ngram_min", &f.ngram_min);
    s.Get("ngram_max", &f.ngram_max);
    s.Get("lexicon", &f.lexicon);
    s.Get("pretrained_vectors", &f.pretrained_vectors);
    s.Get("aggregation", &f.aggregation);
    s.Get("max_len", &f.max_len);
    s.Get("kg_word2vec", &f.kg_word2vec);
    Section w2v = s.Child("word2vec");
    ReadSkipGram(w2v, &f.word2vec);
    w2v.Finish();
    s.Finish();
    Require(f.ngram_min >= 1 && f.ngram_min <= f.ngram_max,
            "features.ngram_min/ngram_max must satisfy 1 <= min <= max");
    try {
      ParseAggregationMode(f.aggregation);
    } catch (const ArgumentError &e) {
      throw ConfigError(std::string("features.aggregation: ") + e.what());
    }
    Require(f.max_len >= 1, "features.max_len must be at least 1");
    Require(f.kg_word2vec == "domain" || f.kg_word2vec == "pretrained",
            "features.kg_word2vec must be domain or pretrained");
  }
  {
    Section s = top.Child("model");
    ModelSpec &m = c.model;
    std::string kind = ModelKindName(m.kind);
    s.Get("kind", &kind);
    m.kind = ParseModelKind(kind);
    s.Get("C", &m.C);
    s.Get("max_iterations", &m.max_iterations);
    std::string loss = HeadLossName(m.loss);
    s.Get("loss", &loss);
    try {
      m.loss = ParseHeadLoss(loss);
    } catch (const ArgumentError &e) {
      throw ConfigError(std::string("model.loss: ") + e.what());
    }
    Require(m.C > 0, "model.C must be positive");
    Require(m.max_iterations >= 1, "model.max_iterations must be at least 1");
    {
      Section f = s.Child("fcn");
      f.Get("hidden", &m.fcn.hidden);
      f.Get("learning_rate", &m.fcn.learning_rate);
      f.Get("momentum", &m.fcn.momentum);
      f.Get("batch_size", &m.fcn.batch_size);
      f.Get("max_epochs", &m.fcn.max_epochs);
      f.Get("validation_fraction", &m.fcn.validation_fraction);
      f.Get("patience", &m.fcn.patience);
      f.Get("seed", &m.fcn.seed);
      f.Finish();
      Require(m.fcn.hidden >= 1, "model.fcn.hidden must be at least 1");
      Require(m.fcn.learning_rate > 0, "model.fcn.learning_rate must be positive");
      Require(m.fcn.batch_size >= 1, "model.fcn.batch_size must be at least 1");
      Require(m.fcn.max_epochs >= 0, "model.fcn.max_epochs must be non-negative");
    }
    {
      Section e = s.Child("encoder");
      e.Get("kind", &m.encoder.kind);
      e.Get("path", &m.encoder.path);
      e.Get("seed", &m.encoder.seed);
      e.Finish();
      Require(m.encoder.kind == "fixture" || m.encoder.kind == "pretrained",
              "model.encoder.kind must be fixture or pretrained");
      Require(m.encoder.kind != "pretrained" || !m.encoder.path.empty(),
              "model.encoder.path is required for a pretrained encoder");
    }
    {
      Section t = s.Child("train");
      t.Get("lr", &m.train.lr);
      t.Get("batch", &m.train.batch);
      t.Get("epochs", &m.train.epochs);
      t.Get("seed", &m.train.seed);
      t.Get("dropout", &m.train.dropout);
      t.Get("fine_tune_encoder", &m.train.fine_tune_encoder);
      t.Get("normalize_onto", &m.train.normalize_onto);
      t.Get("weight_decay", &m.train.weight_decay);
      t.Finish();
      try {
        m.train.Validate();
      } catch (const ArgumentError &e) {
        throw ConfigError(std::string("model.train: ") + e.what());
      }
    }
    s.Finish();
  }
  {
    Section s = top.Child("kgraph");
    KgSpec &k = c.kgraph;
    s.Get("linker", &k.linker);
    s.Get("gazetteer", &k.gazetteer);
    s.Get("tagme_endpoint", &k.tagme_endpoint);
    s.Get("tagme_token_env", &k.tagme_token_env);
    s.Get("threshold", &k.threshold);
    s.Get("encoding", &k.encoding);
    Section t = s.Child("transe");
    std::string norm = TransENormName(k.transe.norm);
    t.Get("dim", &k.transe.dim);
    t.Get("margin", &k.transe.margin);
    t.Get("lr", &k.transe.learning_rate);
    t.Get("epochs", &k.transe.epochs);
    t.Get("batch", &k.transe.batch_size);
    t.Get("norm", &norm);
    t.Get("seed", &k.transe.seed);
    t.Finish();
    s.Finish();
    Require(k.linker == "gazetteer" || k.linker == "tagme" || k.linker == "none",
            "kgraph.linker must be gazetteer, tagme or none");
    Require(k.threshold >= 0, "kgraph.threshold must be non-negative");
    try {
      ParseMetadataEncoding(k.encoding);
      k.transe.norm = ParseTransENorm(norm);
    } catch (const ArgumentError &e) {
      throw ConfigError(std::string("kgraph: ") + e.what());
    }
    Require(k.transe.dim >= 2, "kgraph.transe.dim must be at least 2");
    Require(k.transe.margin > 0, "kgraph.transe.margin must be positive");
    Require(k.transe.learning_rate > 0, "kgraph.transe.lr must be positive");
    Require(k.transe.epochs >= 0, "kgraph.transe.epochs must be non-negative");
    Require(k.transe.batch_size >= 1, "kgraph.transe.batch must be at least 1");
  }
  {
    Section s = top.Child("ontology");
    OntologySpec &o = c.ontology;
    s.Get("records", &o.records);
    s.Get("language", &o.ingest.language);
    s.Get("strict", &o.ingest.strict);
    Section w = s.Child("walks");
    w.Get("walk_length", &o.walks.walk_length);
    w.Get("walks_per_entity", &o.walks.walks_per_entity);
    w.Get("seed", &o.walks.seed);
    w.Finish();
    Section e = s.Child("embedding");
    e.Get("max_index_tokens", &o.embedding.max_index_tokens);
    ReadSkipGram(e, &o.embedding.skipgram);
    e.Finish();
    s.Finish();
    Require(o.walks.walk_length >= 1, "ontology.walks.walk_length must be at least 1");
    Require(o.walks.walks_per_entity >= 1, "ontology.walks.walks_per_entity must be at least 1");
    Require(o.embedding.max_index_tokens >= 1,
            "ontology.embedding.max_index_tokens must be at least 1");
  }
  {
    Section s = top.Child("analyze");
    AnalyzeSpec &a = c.analyze;
    s.Get("baseline_config", &a.baseline_config);
    s.Get("model_label", &a.model_label);
    s.Get("baseline_label", &a.baseline_label);
    s.Get("attention_samples", &a.attention_samples);
    s.Get("attention_layers", &a.attention_layers);
    s.Finish();
    Require(a.attention_samples >= 0, "analyze.attention_samples must be non-negative");
    Require(a.attention_layers >= 1, "analyze.attention_layers must be at least 1");
  }
  top.Finish();

  if (!c.IsNeural()) {
    const FeatureKind k = c.features.kind;
    Require(k != FeatureKind::kTfidfLexiconLing || !c.features.lexicon.empty(),
            "features.lexicon is required for tfidf+liwc+ling");
    const bool pretrained =
        k == FeatureKind::kWord2VecPretrained ||
        (k == FeatureKind::kWord2VecKg && c.features.kg_word2vec == "pretrained");
    Require(!pretrained || !c.features.pretrained_vectors.empty(),
            "features.pretrained_vectors is required for pretrained word vectors");
  }
  if (c.NeedsKg() && c.kgraph.linker == "gazetteer") {
    Require(!c.kgraph.gazetteer.empty(), "kgraph.gazetteer is required for the gazetteer linker");
  }
  if (c.NeedsOntology()) Require(!c.ontology.records.empty(), "ontology.records is required");
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string &path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  const fs::path dir = fs::absolute(path).parent_path();
  return ParseExperimentConfig(ReadFile(path), dir.string());
}

void CheckInputPaths(const ExperimentConfig &c) {
  auto need = [&](const std::string &key, const std::string &value) {
    if (value.empty()) return;
    if (!fs::exists(c.Resolve(value))) {
      throw ConfigError(key + " does not exist: " + c.Resolve(value));
    }
  };
  need("dataset.path", c.dataset.path);
  need("dataset.test_path", c.dataset.test_path);
  if (!c.IsNeural()) {
    if (c.features.kind == FeatureKind::kTfidfLexiconLing) need("features.lexicon", c.features.lexicon);
    need("features.pretrained_vectors", c.features.pretrained_vectors);
  }
  if (c.NeedsKg() && c.kgraph.linker == "gazetteer") need("kgraph.gazetteer", c.kgraph.gazetteer);
  if (c.NeedsOntology()) need("ontology.records", c.ontology.records);
  if (c.model.encoder.kind == "pretrained" && c.IsNeural()) {
    need("model.encoder.path", c.model.encoder.path);
  }
  need("analyze.baseline_config", c.analyze.baseline_config);
}

}  // namespace claimlens
