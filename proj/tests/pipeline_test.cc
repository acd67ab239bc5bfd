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

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "claimlens/errors.h"
#include "claimlens/fusion.h"
#include "claimlens/text.h"
#include "doctest.h"
#include "test_util.h"

namespace claimlens {
namespace {

namespace fs = std::filesystem;

ExperimentConfig Fixture(const std::string &name) {
  return LoadExperimentConfig(testing::SourcePath("fixtures/configs/" + name));
}

PipelineOptions Into(const std::string &dir, std::ostream *log = nullptr) {
  PipelineOptions options;
  options.out_dir = dir;
  options.log = log;
  return options;
}

// Runs the comparison config through evaluate, then every stage.
void RunWithBaseline(const ExperimentConfig &config, const std::string &dir,
                     std::ostream *log = nullptr) {
  Pipeline main(config, Into(dir, log));
  Pipeline base(LoadExperimentConfig(config.Resolve(config.analyze.baseline_config)),
                Into(main.BaselineDir(), log));
  for (const auto &stage : StageNames()) {
    if (stage != "analyze") base.Run(stage);
  }
  main.RunAll();
}

TEST_CASE("fixture pipeline produces report, disagreement table and attention html") {
  testing::TempDir dir;
  const ExperimentConfig config = Fixture("smoke_bert_onto.yaml");
  RunWithBaseline(config, dir.path().string());
  const auto report = nlohmann::json::parse(ReadFile(dir.File("evaluate/report.json")));
  CHECK(report["config_hash"] == config.Hash());
  CHECK(report["report"]["total"] == 51);
  const auto table = nlohmann::json::parse(ReadFile(dir.File("analyze/disagreement.json")));
  CHECK(table["classes"].size() == 3);
  CHECK(ReadFile(dir.File("analyze/disagreement.txt")).find("BERT+onto correct, BERT incorrect") !=
        std::string::npos);
  CHECK(ReadFile(dir.File("analyze/attention.html")).find("<span") != std::string::npos);
  for (const auto &stage : StageNames()) {
    const auto manifest = nlohmann::json::parse(ReadFile(dir.File(stage + "/manifest.json")));
    CHECK(manifest["config_hash"] == config.Hash());
    CHECK(manifest["seed"] == config.seed);
    CHECK(manifest["stage_version"] == StageVersion(stage));
  }
  const auto kg = nlohmann::json::parse(ReadFile(dir.File("build-kg/manifest.json")));
  CHECK(kg["status"] == "not_applicable");
}

TEST_CASE("rerun with unchanged inputs is up-to-date and retrains nothing") {
  testing::TempDir dir;
  const ExperimentConfig config = Fixture("tfidf_svm.yaml");
  Pipeline(config, Into(dir.path().string())).RunAll();
  const auto stamp = fs::last_write_time(dir.File("train/model.bin"));
  std::ostringstream log;
  Pipeline again(config, Into(dir.path().string(), &log));
  for (const auto &result : again.RunAll()) {
    CHECK(result.status != StageStatus::kRan);
  }
  CHECK(log.str().find("train: up-to-date") != std::string::npos);
  CHECK(fs::last_write_time(dir.File("train/model.bin")) == stamp);

  PipelineOptions force = Into(dir.path().string());
  force.force = true;
  CHECK(Pipeline(config, force).Run("train").status == StageStatus::kRan);
}

TEST_CASE("same config in two directories gives byte-identical manifests") {
  testing::TempDir a, b;
  const ExperimentConfig config = Fixture("smoke_bert_onto.yaml");
  RunWithBaseline(config, a.path().string());
  RunWithBaseline(config, b.path().string());
  for (const auto &stage : StageNames()) {
    CAPTURE(stage);
    CHECK(ReadFile(a.File(stage + "/manifest.json")) == ReadFile(b.File(stage + "/manifest.json")));
  }
}

TEST_CASE("changed input file triggers a rerun") {
  testing::TempDir dir;
  fs::copy_file(testing::SourcePath("fixtures/claims.csv"), dir.File("claims.csv"));
  ExperimentConfig config = Fixture("tfidf_svm.yaml");
  config.dataset.path = dir.File("claims.csv");
  const std::string out = dir.File("out");
  CHECK(Pipeline(config, Into(out)).Run("prepare").status == StageStatus::kRan);
  CHECK(Pipeline(config, Into(out)).Run("prepare").status == StageStatus::kUpToDate);
  std::string csv = ReadFile(dir.File("claims.csv"));
  csv.replace(csv.find("30001,"), 6, "39999,");
  WriteFile(dir.File("claims.csv"), csv);
  CHECK(Pipeline(config, Into(out)).Run("prepare").status == StageStatus::kRan);
  // Downstream sees the new upstream manifest and is no longer current.
  Pipeline(config, Into(out)).Run("embed");
  WriteFile(dir.File("claims.csv"), ReadFile(testing::SourcePath("fixtures/claims.csv")));
  Pipeline(config, Into(out)).Run("prepare");
  CHECK(Pipeline(config, Into(out)).Run("embed").status == StageStatus::kRan);
}

TEST_CASE("missing or stale upstream stages name the stage to run") {
  testing::TempDir dir;
  const ExperimentConfig config = Fixture("tfidf_svm.yaml");
  Pipeline pipeline(config, Into(dir.path().string()));
  try {
    pipeline.Run("train");
    FAIL("expected MissingArtifactError");
  } catch (const MissingArtifactError &e) {
    CHECK(e.stage() == "prepare");
    CHECK(std::string(e.what()).find("claimlens prepare") != std::string::npos);
  }
  pipeline.Run("prepare");
  try {
    pipeline.Run("evaluate");
    FAIL("expected MissingArtifactError");
  } catch (const MissingArtifactError &e) {
    CHECK(e.stage() == "embed");
  }
  ExperimentConfig other = config;
  other.model.C = 0.5;
  try {
    Pipeline(other, Into(dir.path().string())).Run("embed");
    FAIL("expected MissingArtifactError");
  } catch (const MissingArtifactError &e) {
    CHECK(e.stage() == "prepare");
    CHECK(std::string(e.what()).find("different config") != std::string::npos);
  }
  const ExperimentConfig fused = Fixture("smoke_bert_onto.yaml");
  Pipeline fused_pipeline(fused, Into(dir.File("fused")));
  for (const auto &stage : StageNames()) {
    if (stage == "analyze") break;
    fused_pipeline.Run(stage);
  }
  try {
    fused_pipeline.Run("analyze");
    FAIL("expected MissingArtifactError");
  } catch (const MissingArtifactError &e) {
    CHECK(e.stage() == "evaluate");
    CHECK(std::string(e.what()).find("baseline") != std::string::npos);
  }
}

TEST_CASE("zero epochs gives a valid initialized checkpoint") {
  testing::TempDir dir;
  ExperimentConfig config = Fixture("smoke_bert_onto.yaml");
  config.model.train.epochs = 0;
  Pipeline pipeline(config, Into(dir.path().string()));
  for (const auto &stage : {"prepare", "build-ontology", "embed", "train", "evaluate"}) {
    pipeline.Run(stage);
  }
  const FusionClassifier model = LoadFusionClassifier(dir.File("train/model"));
  CHECK(model.history.empty());
  CHECK(model.head.Weights().cols() == 32 + 16);
  CHECK(model.head.Weights().norm() > 0);
  CHECK_FALSE(fs::exists(dir.File("train/checkpoints")));
  CHECK(fs::exists(dir.File("evaluate/report.json")));
}

TEST_CASE("every classical configuration runs end to end") {
  for (const char *name : {"tfidf_svm.yaml", "tfidf_lex_logreg.yaml", "w2v_pre_logreg.yaml",
                           "w2v_domain_fcn.yaml", "w2v_kg_svm.yaml", "ontology_logreg.yaml"}) {
    CAPTURE(name);
    testing::TempDir dir;
    Pipeline(Fixture(name), Into(dir.path().string())).RunAll();
    CHECK(fs::exists(dir.File("evaluate/report.json")));
    const auto summary = nlohmann::json::parse(ReadFile(dir.File("analyze/summary.json")));
    CHECK(summary["attention"]["status"] == "unavailable");
  }
}

TEST_CASE("replay reproduces a stage from its manifest alone") {
  testing::TempDir dir;
  Pipeline(Fixture("w2v_kg_svm.yaml"), Into(dir.path().string())).RunAll();
  for (const auto &stage : {"build-kg", "embed", "train", "evaluate"}) {
    CAPTURE(stage);
    const StageResult result = ReplayManifest(dir.File(std::string(stage) + "/manifest.json"));
    CHECK(result.status == StageStatus::kRan);
    CHECK(result.identical);
  }
}

TEST_CASE("output directory resolution") {
  const ExperimentConfig config = Fixture("tfidf_svm.yaml");
  CHECK(ResolveOutputDir(config, "/x/y") == "/x/y");
  ::setenv("CLAIMLENS_CACHE", "/cache", 1);
  CHECK(ResolveOutputDir(config) == "/cache/smoke-tfidf_svm-" + config.Hash().substr(0, 12));
  ::unsetenv("CLAIMLENS_CACHE");
  ExperimentConfig with_dir = config;
  with_dir.output_dir = "runs/a";
  CHECK(ResolveOutputDir(with_dir) == with_dir.Resolve("runs/a"));
}

}  // namespace
}  // namespace claimlens
