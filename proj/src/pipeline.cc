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

#include "claimlens/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include <spdlog/spdlog.h>

#include "claimlens/encoder.h"
#include "claimlens/errors.h"
#include "claimlens/evalviz.h"
#include "claimlens/hashing.h"
#include "claimlens/lexfeat.h"
#include "claimlens/tensor_io.h"
#include "claimlens/text.h"

namespace claimlens {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char kManifest[] = "manifest.json";

std::string Dump(const json &j) { return j.dump(2) + "\n"; }

json ReadJson(const std::string &path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::exception &e) {
    throw FormatError(path + ": " + e.what());
  }
}

// sha256 of every regular file under `dir`, keyed by relative path.
json HashTree(const fs::path &dir, const std::set<std::string> &skip = {}) {
  std::vector<std::string> files;
  if (fs::exists(dir)) {
    for (const auto &entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string rel = fs::relative(entry.path(), dir).generic_string();
      if (!skip.count(rel)) files.push_back(rel);
    }
  }
  std::sort(files.begin(), files.end());
  json out = json::object();
  for (const auto &rel : files) out[rel] = Sha256File((dir / rel).string());
  return out;
}

void ResetDir(const fs::path &dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
}

json DistributionJson(const Corpus &corpus) {
  const std::vector<LabelShare> shares = ClassDistribution(corpus);
  const std::vector<double> rounded = RoundPercentages(shares, 2);
  json rows = json::array();
  for (size_t i = 0; i < shares.size(); ++i) {
    rows.push_back({{"label", shares[i].label},
                    {"count", shares[i].count},
                    {"percent", shares[i].percent},
                    {"rounded_percent", rounded[i]}});
  }
  return {{"total", corpus.size()}, {"classes", rows}};
}

std::string DistributionLine(const std::string &name, const Corpus &corpus) {
  std::string line = name + ":";
  const std::vector<LabelShare> shares = ClassDistribution(corpus);
  const std::vector<double> rounded = RoundPercentages(shares, 2);
  for (size_t i = 0; i < shares.size(); ++i) {
    char percent[32];
    std::snprintf(percent, sizeof(percent), "%.2f", rounded[i]);
    line += " " + shares[i].label + "=" + std::to_string(shares[i].count) + " (" + percent + "%)";
  }
  return line + " total=" + std::to_string(corpus.size());
}

Corpus Concat(const Corpus &a, const Corpus &b) {
  Corpus out(a.scheme());
  for (const auto &inst : a.instances()) out.Add(inst);
  for (const auto &inst : b.instances()) out.Add(inst);
  return out;
}

Eigen::MatrixXd DenseMatrix(const FeatureMatrix &m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.cols));
  for (size_t i = 0; i < m.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.rows[i].ToDense();
  return out;
}

Eigen::MatrixXd StackRows(const std::vector<Eigen::VectorXd> &rows, int dim) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i];
  return out;
}

std::vector<Eigen::VectorXd> SplitRows(const Eigen::MatrixXd &m) {
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m.row(i).transpose());
  return out;
}

TransformerEncoder LoadEncoder(const ExperimentConfig &c, const std::string &fine_tuned_dir) {
  if (!fine_tuned_dir.empty() && fs::exists(fs::path(fine_tuned_dir) / "config.json")) {
    return TransformerEncoder::Load(fine_tuned_dir);
  }
  if (c.model.encoder.kind == "fixture") return MakeFixtureEncoder(c.model.encoder.seed);
  return TransformerEncoder::Load(c.Resolve(c.model.encoder.path));
}

std::map<std::string, std::string> Provenance(const ExperimentConfig &c, const std::string &stage) {
  return {{"config_hash", c.Hash()},
          {"seed", std::to_string(c.seed)},
          {"stage", stage},
          {"stage_version", std::to_string(StageVersion(stage))}};
}

std::string ModelLabel(const ExperimentConfig &c) {
  return c.analyze.model_label.empty() ? c.name : c.analyze.model_label;
}

}  // namespace

const std::vector<std::string> &StageNames() {
  static const std::vector<std::string> kStages = {
      "prepare", "build-kg", "build-ontology", "embed", "train", "evaluate", "analyze"};
  return kStages;
}

bool IsStageName(const std::string &name) {
  const auto &stages = StageNames();
  return std::find(stages.begin(), stages.end(), name) != stages.end();
}

int StageVersion(const std::string &stage) {
  if (!IsStageName(stage)) throw ArgumentError("unknown stage '" + stage + "'");
  return 1;
}

std::string ResolveOutputDir(const ExperimentConfig &config, const std::string &override_dir) {
  if (!override_dir.empty()) return fs::absolute(override_dir).lexically_normal().string();
  const std::string leaf = config.name + "-" + config.Hash().substr(0, 12);
  if (const char *cache = std::getenv("CLAIMLENS_CACHE"); cache && *cache) {
    return (fs::absolute(cache) / leaf).lexically_normal().string();
  }
  if (!config.output_dir.empty()) return config.Resolve(config.output_dir);
  return (fs::absolute("runs") / leaf).lexically_normal().string();
}

Pipeline::Pipeline(ExperimentConfig config, PipelineOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  out_dir_ = ResolveOutputDir(config_, options_.out_dir);
}

std::string Pipeline::StageDir(const std::string &stage) const {
  return (fs::path(out_dir_) / stage).string();
}

std::string Pipeline::BaselineDir() const { return (fs::path(out_dir_) / "baseline").string(); }

void Pipeline::Log(const std::string &line) const {
  if (options_.log) *options_.log << line << std::endl;
}

bool Pipeline::Applicable(const std::string &stage) const {
  if (stage == "build-kg") return config_.NeedsKg();
  if (stage == "build-ontology") return config_.NeedsOntology();
  if (stage == "embed") return !config_.IsNeural() || config_.NeedsOntology();
  return true;
}

json Pipeline::Inputs(const std::string &stage) const {
  json inputs = json::object();
  auto file = [&](const std::string &path) {
    if (path.empty()) return;
    const std::string resolved = config_.Resolve(path);
    if (fs::is_directory(resolved)) {
      for (const auto &[rel, hash] : HashTree(resolved).items()) {
        inputs[(fs::path(resolved) / rel).string()] = hash;
      }
    } else {
      if (!fs::exists(resolved)) throw ConfigError("input file does not exist: " + resolved);
      inputs[resolved] = Sha256File(resolved);
    }
  };
  auto upstream = [&](const std::string &dir, const std::string &name, const std::string &key,
                      bool check_hash) {
    const fs::path manifest = fs::path(dir) / name / kManifest;
    if (!fs::exists(manifest)) {
      throw MissingArtifactError("stage '" + name + "' has no output in " + dir +
                                     "; run `claimlens " + name + "` first",
                                 name);
    }
    if (check_hash && ReadJson(manifest.string()).value("config_hash", "") != config_.Hash()) {
      throw MissingArtifactError("stage '" + name + "' in " + dir +
                                     " was produced by a different config; rerun `claimlens " +
                                     name + "`",
                                 name);
    }
    inputs[key] = Sha256File(manifest.string());
  };
  auto own = [&](const std::string &name) {
    if (Applicable(name)) upstream(out_dir_, name, name + "/" + kManifest, true);
  };

  if (stage == "prepare") {
    file(config_.dataset.path);
    file(config_.dataset.test_path);
  } else if (stage == "build-kg") {
    own("prepare");
    if (config_.kgraph.linker == "gazetteer") file(config_.kgraph.gazetteer);
  } else if (stage == "build-ontology") {
    file(config_.ontology.records);
  } else if (stage == "embed") {
    own("prepare");
    own("build-kg");
    own("build-ontology");
    if (!config_.IsNeural()) {
      if (config_.features.kind == FeatureKind::kTfidfLexiconLing) file(config_.features.lexicon);
      const FeatureKind k = config_.features.kind;
      if (k == FeatureKind::kWord2VecPretrained ||
          (k == FeatureKind::kWord2VecKg && config_.features.kg_word2vec == "pretrained")) {
        file(config_.features.pretrained_vectors);
      }
    }
  } else if (stage == "train") {
    own("prepare");
    own("embed");
    if (config_.IsNeural() && config_.model.encoder.kind == "pretrained") {
      file(config_.model.encoder.path);
    }
  } else if (stage == "evaluate") {
    own("prepare");
    own("embed");
    own("train");
  } else if (stage == "analyze") {
    own("evaluate");
    own("train");
    if (!config_.analyze.baseline_config.empty()) {
      upstream(BaselineDir(), "evaluate", "baseline/evaluate/" + std::string(kManifest), false);
    }
  } else {
    throw ArgumentError("unknown stage '" + stage + "'");
  }
  return inputs;
}

StageResult Pipeline::Run(const std::string &stage) {
  StageResult result;
  result.stage = stage;
  result.dir = StageDir(stage);
  const fs::path dir(result.dir);
  const fs::path manifest_path = dir / kManifest;
  const bool applicable = Applicable(stage);
  const json inputs = applicable ? Inputs(stage) : json::object();

  if (!options_.force && fs::exists(manifest_path)) {
    try {
      const json old = ReadJson(manifest_path.string());
      const bool same = old.value("config_hash", "") == config_.Hash() &&
                        old.value("stage_version", -1) == StageVersion(stage) &&
                        old.value("inputs", json()) == inputs &&
                        old.value("outputs", json()) == HashTree(dir, {kManifest});
      if (same) {
        result.status = applicable ? StageStatus::kUpToDate : StageStatus::kNotApplicable;
        Log(stage + (applicable ? ": up-to-date" : ": up-to-date (not applicable)"));
        return result;
      }
    } catch (const FormatError &) {
      // Unreadable manifest: rebuild.
    }
  }

  ResetDir(dir);
  if (!applicable) {
    result.status = StageStatus::kNotApplicable;
  } else {
    spdlog::info("{}: running in {}", stage, result.dir);
    if (stage == "prepare") Prepare();
    else if (stage == "build-kg") BuildKg();
    else if (stage == "build-ontology") BuildOntology();
    else if (stage == "embed") Embed();
    else if (stage == "train") Train();
    else if (stage == "evaluate") Evaluate();
    else Analyze();
  }

  json manifest;
  manifest["stage"] = stage;
  manifest["stage_version"] = StageVersion(stage);
  manifest["status"] = applicable ? "complete" : "not_applicable";
  manifest["config_hash"] = config_.Hash();
  manifest["seed"] = config_.seed;
  manifest["config"] = config_.ToJson();
  manifest["base_dir"] = config_.base_dir;
  manifest["inputs"] = inputs;
  manifest["outputs"] = HashTree(dir, {kManifest});
  WriteFile(manifest_path.string(), Dump(manifest));
  Log(stage + (applicable ? ": done" : ": not applicable for this config"));
  return result;
}

std::vector<StageResult> Pipeline::RunAll() {
  std::vector<StageResult> results;
  for (const auto &stage : StageNames()) results.push_back(Run(stage));
  return results;
}

// ---------------------------------------------------------------------------
// Stages

void Pipeline::Prepare() {
  const DatasetSpec &d = config_.dataset;
  const fs::path dir(StageDir("prepare"));
  json stats = json::object();
  auto load = [&](const std::string &path, const std::string &part, const std::string &tag) {
    if (d.name == "newsclaims") {
      CleaningStats cleaning;
      Corpus corpus = LoadNewsClaims(config_.Resolve(path), NewsClaimsCleaning{d.min_tokens},
                                     &cleaning);
      stats[tag] = {{"input", cleaning.input},
                    {"urls_removed", cleaning.urls_removed},
                    {"citations_removed", cleaning.citations_removed},
                    {"dropped_empty", cleaning.dropped_empty},
                    {"dropped_short", cleaning.dropped_short},
                    {"dropped_duplicate", cleaning.dropped_duplicate},
                    {"kept", cleaning.kept}};
      return corpus;
    }
    ClaimBusterFormat format;
    if (!d.label_codes.empty()) format.label_codes = d.label_codes;
    return LoadClaimBuster(config_.Resolve(path), ParseClaimBusterPart(part), format);
  };

  Corpus all = load(d.path, d.part, "source");
  Corpus train(all.scheme()), test(all.scheme());
  if (d.test_path.empty()) {
    std::tie(train, test) = Split(all, d.test_fraction, config_.seed);
  } else {
    train = all;
    test = load(d.test_path, d.test_part, "test_source");
    all = Concat(train, test);
  }
  train.set_split(SplitTag::kTrain);
  test.set_split(SplitTag::kTest);
  if (train.empty() || test.empty()) throw StateError("prepare produced an empty train or test split");

  SaveCorpus(train, (dir / "train.jsonl").string());
  SaveCorpus(test, (dir / "test.jsonl").string());
  json dist = {{"scheme", all.scheme().NameString()},
               {"all", DistributionJson(all)},
               {"train", DistributionJson(train)},
               {"test", DistributionJson(test)}};
  if (!stats.empty()) dist["cleaning"] = stats;
  WriteFile((dir / "distribution.json").string(), Dump(dist));
  const std::string summary = DistributionLine("all", all) + "\n" +
                              DistributionLine("train", train) + "\n" +
                              DistributionLine("test", test) + "\n";
  WriteFile((dir / "distribution.txt").string(), summary);
  if (options_.log) *options_.log << summary;
}

void Pipeline::BuildKg() {
  const KgSpec &k = config_.kgraph;
  const fs::path dir(StageDir("build-kg"));
  const fs::path prep(StageDir("prepare"));
  const Corpus corpus = Concat(LoadCorpus((prep / "train.jsonl").string()),
                               LoadCorpus((prep / "test.jsonl").string()));
  std::unique_ptr<EntityLinker> linker;
  if (k.linker == "gazetteer") {
    linker = std::make_unique<GazetteerLinker>(GazetteerLinker::Load(config_.Resolve(k.gazetteer)));
  } else if (k.linker == "tagme") {
    const char *token = std::getenv(k.tagme_token_env.c_str());
    if (!token || !*token) {
      throw ConfigError("kgraph.linker is tagme but $" + k.tagme_token_env + " is not set");
    }
    linker = std::make_unique<TagMeLinker>(k.tagme_endpoint, token);
  }
  const TripleGraph graph =
      BuildMetadataGraph(corpus, linker.get(), MetadataGraphOptions{k.threshold});
  SaveTriples(graph, (dir / "triples.tsv").string());
  const TransEModel model = TrainTransE(graph, k.transe);
  SaveTransE(model, graph, (dir / "transe").string());
  WriteFile((dir / "summary.json").string(),
            Dump({{"entities", graph.entities().size()},
                  {"relations", graph.relations().size()},
                  {"triples", graph.triples().size()}}));
}

void Pipeline::BuildOntology() {
  const OntologySpec &o = config_.ontology;
  const fs::path dir(StageDir("build-ontology"));
  IngestReport report;
  const auto records = IngestRecords(config_.Resolve(o.records), o.ingest, &report);
  if (records.empty()) throw StateError("no fact-check records survived ingestion");
  const Ontology ontology = claimlens::BuildOntology(records);
  ontology.Save((dir / "ontology").string());
  WriteFile((dir / "ontology.ttl").string(), ontology.ExportTurtle());
  const WalkCorpus walks = GenerateWalkCorpus(ontology, o.walks);
  const OntologyEmbedding embedding = TrainOntologyEmbedding(ontology, walks, o.embedding);
  embedding.Save((dir / "embedding").string());
  WriteFile((dir / "summary.json").string(),
            Dump({{"lines", report.lines},
                  {"kept", report.kept},
                  {"dropped_unparseable", report.dropped_unparseable},
                  {"dropped_language", report.dropped_language},
                  {"dropped_invalid", report.dropped_invalid},
                  {"classes", ontology.classes().size()},
                  {"individuals", ontology.individuals().size()},
                  {"assertions", ontology.assertions().size()},
                  {"structure_walks", walks.structure.size()},
                  {"lexical_documents", walks.lexical.size()},
                  {"indexed_phrases", embedding.token_index().size()}}));
}

void Pipeline::Embed() {
  const fs::path dir(StageDir("embed"));
  const fs::path prep(StageDir("prepare"));
  const Corpus train = LoadCorpus((prep / "train.jsonl").string());
  const Corpus test = LoadCorpus((prep / "test.jsonl").string());

  std::unique_ptr<OntologyEmbedding> onto;
  if (config_.NeedsOntology()) {
    onto = std::make_unique<OntologyEmbedding>(
        OntologyEmbedding::Load((fs::path(StageDir("build-ontology")) / "embedding").string()));
  }
  auto onto_rows = [&](const Corpus &corpus, size_t *matched) {
    std::vector<Eigen::VectorXd> rows;
    for (const auto &inst : corpus.instances()) {
      SentenceEncoding enc = onto->Encode(inst.text);
      if (enc.matched_count > 0) ++*matched;
      rows.push_back(std::move(enc.vector));
    }
    return rows;
  };

  if (config_.IsNeural()) {
    size_t matched_train = 0, matched_test = 0;
    TensorBundle bundle;
    bundle.Put("train", StackRows(onto_rows(train, &matched_train), onto->dim()));
    bundle.Put("test", StackRows(onto_rows(test, &matched_test), onto->dim()));
    bundle.Write((dir / "onto.bin").string());
    WriteFile((dir / "features.json").string(),
              Dump({{"kind", "ontology"},
                    {"dim", onto->dim()},
                    {"train_matched", matched_train},
                    {"test_matched", matched_test}}));
    return;
  }

  const FeatureSpec &f = config_.features;
  FeatureMatrix x_train, x_test;
  long dense_begin = -1;
  json info = {{"kind", FeatureKindName(f.kind)}};

  auto add_dense = [](FeatureMatrix *m, const std::vector<Eigen::VectorXd> &rows) {
    for (const auto &r : rows) m->rows.push_back(SparseVector::FromDense(r));
    m->cols = rows.empty() ? 0 : static_cast<size_t>(rows[0].size());
  };
  auto word_vectors = [&](bool pretrained) {
    if (pretrained) {
      EmbeddingLoadReport report;
      EmbeddingTable table = LoadPretrained(config_.Resolve(f.pretrained_vectors), &report);
      info["pretrained_rows"] = report.rows;
      return table;
    }
    EmbeddingTable table = TrainSkipGram(train, f.word2vec);
    SaveWord2VecText(table, (dir / "word2vec.txt").string());
    return table;
  };
  auto aggregate = [&](const Corpus &corpus, const EmbeddingTable &table) {
    const AggregationMode mode = ParseAggregationMode(f.aggregation);
    std::vector<Eigen::VectorXd> rows;
    for (const auto &inst : corpus.instances()) {
      rows.push_back(AggregateSequence(Tokenize(inst.text), table, f.max_len, mode));
    }
    return rows;
  };

  switch (f.kind) {
    case FeatureKind::kTfidf:
    case FeatureKind::kTfidfLexiconLing: {
      TfidfOptions options;
      options.ngram_min = f.ngram_min;
      options.ngram_max = f.ngram_max;
      const TfidfModel tfidf = TfidfModel::Fit(train, options);
      WriteFile((dir / "tfidf.json").string(), tfidf.ToJson());
      std::unique_ptr<Lexicon> lexicon;
      if (f.kind == FeatureKind::kTfidfLexiconLing) {
        lexicon = std::make_unique<Lexicon>(Lexicon::Load(config_.Resolve(f.lexicon)));
        dense_begin = static_cast<long>(tfidf.dim());
      }
      auto transform = [&](const Corpus &corpus, FeatureMatrix *m) {
        for (const auto &inst : corpus.instances()) {
          SparseVector row = tfidf.Transform(inst.text);
          if (lexicon) {
            const Eigen::VectorXd lex = LexiconFeatures(inst.text, *lexicon);
            const Eigen::VectorXd ling = LinguisticFeatures(inst.text);
            Eigen::VectorXd dense(lex.size() + ling.size());
            dense << lex, ling;
            row = row.Concat(SparseVector::FromDense(dense));
          }
          m->cols = row.dim();
          m->rows.push_back(std::move(row));
        }
      };
      transform(train, &x_train);
      transform(test, &x_test);
      break;
    }
    case FeatureKind::kWord2VecPretrained:
    case FeatureKind::kWord2VecDomain: {
      const EmbeddingTable table = word_vectors(f.kind == FeatureKind::kWord2VecPretrained);
      add_dense(&x_train, aggregate(train, table));
      add_dense(&x_test, aggregate(test, table));
      dense_begin = 0;
      break;
    }
    case FeatureKind::kWord2VecKg: {
      const EmbeddingTable table = word_vectors(f.kg_word2vec == "pretrained");
      const fs::path kg(StageDir("build-kg"));
      const TripleGraph graph = LoadTriples((kg / "triples.tsv").string());
      const TransEModel transe = LoadTransE((kg / "transe").string(), graph);
      const MetadataEncoding encoding = ParseMetadataEncoding(config_.kgraph.encoding);
      auto rows = [&](const Corpus &corpus) {
        std::vector<Eigen::VectorXd> text = aggregate(corpus, table);
        for (size_t i = 0; i < text.size(); ++i) {
          const Eigen::VectorXd meta = EncodeMetadata(corpus[i], graph, transe, encoding);
          Eigen::VectorXd joined(text[i].size() + meta.size());
          joined << text[i], meta;
          text[i] = std::move(joined);
        }
        return text;
      };
      add_dense(&x_train, rows(train));
      add_dense(&x_test, rows(test));
      dense_begin = 0;
      break;
    }
    case FeatureKind::kOntology: {
      size_t matched_train = 0, matched_test = 0;
      add_dense(&x_train, onto_rows(train, &matched_train));
      add_dense(&x_test, onto_rows(test, &matched_test));
      info["train_matched"] = matched_train;
      info["test_matched"] = matched_test;
      dense_begin = 0;
      break;
    }
  }
  SaveFeatureMatrix(x_train, (dir / "train.features").string());
  SaveFeatureMatrix(x_test, (dir / "test.features").string());
  info["dim"] = x_train.cols;
  info["dense_begin"] = dense_begin;
  WriteFile((dir / "features.json").string(), Dump(info));
}

void Pipeline::Train() {
  const fs::path dir(StageDir("train"));
  const fs::path embed(StageDir("embed"));
  const Corpus train = LoadCorpus((fs::path(StageDir("prepare")) / "train.jsonl").string());
  const int classes = train.scheme().size();
  const std::vector<int> labels = train.Labels();
  const ModelSpec &m = config_.model;
  const auto meta = Provenance(config_, "train");

  switch (m.kind) {
    case ModelKind::kSvm:
    case ModelKind::kLogReg: {
      const FeatureMatrix x = LoadFeatureMatrix((embed / "train.features").string());
      const json info = ReadJson((embed / "features.json").string());
      LinearOptions options;
      options.kind = m.kind == ModelKind::kSvm ? LinearKind::kSvmHinge : LinearKind::kLogReg;
      options.C = m.C;
      options.max_iterations = m.max_iterations;
      options.seed = config_.seed;
      const LinearModel model =
          TrainLinear(x, labels, classes, options, info.value("dense_begin", -1L));
      model.Save((dir / "model").string());
      break;
    }
    case ModelKind::kFcn: {
      const Eigen::MatrixXd x = DenseMatrix(LoadFeatureMatrix((embed / "train.features").string()));
      FcnClassifier model(static_cast<int>(x.cols()), classes, m.fcn);
      const FcnTrainReport report = model.Train(x, labels);
      model.ToTensors().Write((dir / "model.bin").string());
      json j = {{"type", "fcn"},
                {"epochs_run", report.epochs_run},
                {"best_epoch", report.best_epoch},
                {"final_train_loss", report.final_train_loss},
                {"best_validation_loss", report.best_validation_loss}};
      for (const auto &[key, value] : meta) j[key] = value;
      WriteFile((dir / "model.json").string(), Dump(j));
      break;
    }
    case ModelKind::kBert:
    case ModelKind::kBertOnto: {
      TransformerEncoder encoder = LoadEncoder(config_, "");
      std::vector<Eigen::VectorXd> onto;
      int onto_dim = 0;
      if (m.kind == ModelKind::kBertOnto) {
        const TensorBundle bundle = TensorBundle::Read((embed / "onto.bin").string());
        onto = SplitRows(bundle.Get("train"));
        onto_dim = static_cast<int>(bundle.Get("train").cols());
      }
      const FusionData data = MakeFusionData(train, onto);
      auto on_epoch = [&](const EpochStats &stats, const FusionClassifier &model, const Encoder &) {
        const fs::path ckpt = dir / "checkpoints" / ("epoch-" + std::to_string(stats.epoch));
        fs::create_directories(ckpt);
        SaveFusionClassifier(model, ckpt.string(), meta);
        spdlog::info("train: epoch {} mean loss {:.6f}", stats.epoch, stats.mean_loss);
      };
      const FusionClassifier model =
          TrainFusion(data, &encoder, onto_dim, classes, m.loss, m.train, on_epoch);
      fs::create_directories(dir / "model");
      SaveFusionClassifier(model, (dir / "model").string(), meta);
      if (m.train.fine_tune_encoder) encoder.Save((dir / "encoder").string());
      json history = json::array();
      for (const auto &h : model.history) {
        history.push_back({{"epoch", h.epoch}, {"mean_loss", h.mean_loss}});
      }
      WriteFile((dir / "history.json").string(), Dump(history));
      break;
    }
  }
}

void Pipeline::Evaluate() {
  const fs::path dir(StageDir("evaluate"));
  const fs::path embed(StageDir("embed"));
  const fs::path trained(StageDir("train"));
  const Corpus test = LoadCorpus((fs::path(StageDir("prepare")) / "test.jsonl").string());
  const LabelScheme &scheme = test.scheme();
  const ModelSpec &m = config_.model;

  Eigen::MatrixXd logits;
  switch (m.kind) {
    case ModelKind::kSvm:
    case ModelKind::kLogReg: {
      const LinearModel model = LinearModel::Load((trained / "model").string());
      logits = model.DecisionFunction(LoadFeatureMatrix((embed / "test.features").string()));
      break;
    }
    case ModelKind::kFcn: {
      const FcnClassifier model = FcnClassifier::FromTensors(
          TensorBundle::Read((trained / "model.bin").string()), m.fcn);
      const Eigen::MatrixXd proba =
          model.PredictProba(DenseMatrix(LoadFeatureMatrix((embed / "test.features").string())));
      logits = proba.array().max(1e-300).log().matrix();
      break;
    }
    case ModelKind::kBert:
    case ModelKind::kBertOnto: {
      const TransformerEncoder encoder = LoadEncoder(config_, (trained / "encoder").string());
      const FusionClassifier model = LoadFusionClassifier((trained / "model").string());
      std::vector<Eigen::VectorXd> onto;
      if (m.kind == ModelKind::kBertOnto) {
        onto = SplitRows(TensorBundle::Read((embed / "onto.bin").string()).Get("test"));
      }
      logits = PredictLogits(model, encoder, MakeFusionData(test, onto));
      break;
    }
  }

  std::vector<std::string> ids;
  for (const auto &inst : test.instances()) ids.push_back(inst.id);
  const std::vector<int> gold = test.Labels();
  const std::vector<int> pred = ArgmaxRows(logits);
  WritePredictions(MakePredictionRecords(ids, gold, logits, scheme),
                   (dir / "predictions.jsonl").string());
  const EvalReport report = claimlens::Evaluate(gold, pred, scheme);
  json wrapped = {{"model", ModelLabel(config_)},
                  {"config_hash", config_.Hash()},
                  {"seed", config_.seed},
                  {"stage_version", StageVersion("evaluate")},
                  {"report", json::parse(ReportToJson(report))}};
  WriteFile((dir / "report.json").string(), Dump(wrapped));
  const std::string text = FormatClassificationReport(report);
  WriteFile((dir / "report.txt").string(), text);
  WriteFile((dir / "results_table.txt").string(),
            FormatResultsTable({ResultRow::FromReport(ModelLabel(config_), report)}));
  if (options_.log) *options_.log << text;
}

void Pipeline::Analyze() {
  const fs::path dir(StageDir("analyze"));
  const Corpus test = LoadCorpus((fs::path(StageDir("prepare")) / "test.jsonl").string());
  const LabelScheme &scheme = test.scheme();
  const auto records =
      ReadPredictions((fs::path(StageDir("evaluate")) / "predictions.jsonl").string());
  const std::vector<int> gold = test.Labels();
  std::vector<int> pred;
  for (const auto &r : records) {
    const auto index = scheme.IndexOf(r.pred);
    if (!index) throw FormatError("prediction label '" + r.pred + "' is not in the scheme");
    pred.push_back(*index);
  }
  if (pred.size() != gold.size()) throw StateError("predictions do not match the test split");

  json summary = {{"model", ModelLabel(config_)}, {"config_hash", config_.Hash()},
                  {"seed", config_.seed}};
  std::vector<int> baseline_pred;
  if (!config_.analyze.baseline_config.empty()) {
    const auto base_records =
        ReadPredictions((fs::path(BaselineDir()) / "evaluate" / "predictions.jsonl").string());
    std::map<std::string, std::string> by_id;
    for (const auto &r : base_records) by_id[r.id] = r.pred;
    for (const auto &r : records) {
      const auto it = by_id.find(r.id);
      if (it == by_id.end()) {
        throw StateError("baseline predictions lack instance '" + r.id +
                         "'; both configs must share the test split");
      }
      baseline_pred.push_back(*scheme.IndexOf(it->second));
    }
    std::string baseline_label = config_.analyze.baseline_label;
    const json base_report =
        ReadJson((fs::path(BaselineDir()) / "evaluate" / "report.json").string());
    if (baseline_label.empty()) baseline_label = base_report.value("model", "baseline");
    const DisagreementTable table =
        Disagreement(gold, pred, baseline_pred, scheme, ModelLabel(config_), baseline_label);
    WriteFile((dir / "disagreement.json").string(), DisagreementToJson(table));
    WriteFile((dir / "disagreement.txt").string(), FormatDisagreementTable(table));
    const EvalReport ours = claimlens::Evaluate(gold, pred, scheme);
    const EvalReport theirs = claimlens::Evaluate(gold, baseline_pred, scheme);
    WriteFile((dir / "results_table.txt").string(),
              FormatResultsTable({ResultRow::FromReport(baseline_label, theirs),
                                  ResultRow::FromReport(ModelLabel(config_), ours)}));
    summary["baseline"] = baseline_label;
    summary["disagreement_total"] = table.Total();
    if (options_.log) *options_.log << FormatDisagreementTable(table);
  } else {
    summary["disagreement"] = "no baseline configured";
  }

  // Sentences the model gets right and the baseline misses come first,
  // then the rest round-robin over gold classes.
  const size_t want = static_cast<size_t>(config_.analyze.attention_samples);
  std::vector<size_t> chosen;
  std::set<size_t> taken;
  if (!baseline_pred.empty()) {
    for (size_t i = 0; i < gold.size() && chosen.size() < want; ++i) {
      if (pred[i] == gold[i] && baseline_pred[i] != gold[i]) {
        chosen.push_back(i);
        taken.insert(i);
      }
    }
  }
  std::vector<std::vector<size_t>> by_class(scheme.size());
  for (size_t i = 0; i < gold.size(); ++i) {
    if (!taken.count(i)) by_class[gold[i]].push_back(i);
  }
  for (size_t round = 0; chosen.size() < want; ++round) {
    bool any = false;
    for (const auto &bucket : by_class) {
      if (round < bucket.size() && chosen.size() < want) {
        chosen.push_back(bucket[round]);
        any = true;
      }
    }
    if (!any) break;
  }

  try {
    if (!config_.IsNeural()) {
      throw CapabilityError("model '" + ModelKindName(config_.model.kind) +
                            "' has no attention weights");
    }
    const TransformerEncoder encoder =
        LoadEncoder(config_, (fs::path(StageDir("train")) / "encoder").string());
    std::vector<TokenWeightMap> maps;
    for (size_t i : chosen) {
      TokenWeightMap map =
          AttentionWeights(encoder, test[i].id, test[i].text, config_.analyze.attention_layers);
      map.note = "gold " + scheme.Label(gold[i]) + ", predicted " + scheme.Label(pred[i]);
      if (!baseline_pred.empty()) map.note += ", baseline " + scheme.Label(baseline_pred[i]);
      maps.push_back(std::move(map));
    }
    if (maps.empty()) throw CapabilityError("no sentences selected for attention export");
    ExportHighlightHtml(maps, (dir / "attention.html").string(),
                        "Token attention: " + ModelLabel(config_));
    summary["attention"] = {{"status", "exported"}, {"sentences", maps.size()}};
  } catch (const CapabilityError &e) {
    summary["attention"] = {{"status", "unavailable"}, {"reason", e.what()}};
    spdlog::warn("analyze: attention export skipped: {}", e.what());
  }
  WriteFile((dir / "summary.json").string(), Dump(summary));
}

StageResult ReplayManifest(const std::string &manifest_path, std::ostream *log) {
  if (!fs::exists(manifest_path)) throw ConfigError("manifest not found: " + manifest_path);
  const json manifest = ReadJson(manifest_path);
  if (!manifest.contains("config") || !manifest.contains("stage")) {
    throw ConfigError(manifest_path + " is not a stage manifest");
  }
  const ExperimentConfig config =
      ParseExperimentConfig(manifest["config"].dump(), manifest.value("base_dir", "."));
  if (config.Hash() != manifest.value("config_hash", "")) {
    throw ConfigError(manifest_path + ": embedded config does not match its hash");
  }
  PipelineOptions options;
  options.force = true;
  options.log = log;
  options.out_dir = fs::absolute(manifest_path).parent_path().parent_path().string();
  Pipeline pipeline(config, options);
  const json recorded = manifest.value("outputs", json::object());
  StageResult result = pipeline.Run(manifest["stage"].get<std::string>());
  result.identical = ReadJson(manifest_path).value("outputs", json::object()) == recorded;
  return result;
}

}  // namespace claimlens
