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

#include "claimlens/errors.h"
#include "doctest.h"
#include "test_util.h"

namespace claimlens {
namespace {

const char kMinimal[] = R"(
name: smoke
seed: 7
dataset:
  path: data/claims.csv
model:
  kind: bert+onto
  train:
    epochs: 2
ontology:
  records: data/factchecks.jsonl
)";

std::string ErrorOf(const std::string &yaml) {
  try {
    ParseExperimentConfig(yaml, "/tmp");
  } catch (const ConfigError &e) {
    return e.what();
  }
  return "";
}

TEST_CASE("minimal config fills defaults and derives sub-seeds") {
  const ExperimentConfig c = ParseExperimentConfig(kMinimal, "/base");
  CHECK(c.name == "smoke");
  CHECK(c.seed == 7);
  CHECK(c.model.kind == ModelKind::kBertOnto);
  CHECK(c.model.train.epochs == 2);
  CHECK(c.model.train.lr == doctest::Approx(2e-5));
  CHECK(c.model.train.seed == 7);
  CHECK(c.NeedsOntology());
  CHECK_FALSE(c.NeedsKg());
  CHECK(c.Resolve("data/claims.csv") == "/base/data/claims.csv");
  CHECK(c.Resolve("/abs/x") == "/abs/x");
  const ExperimentConfig other = ParseExperimentConfig(
      std::string(kMinimal).replace(std::string(kMinimal).find("seed: 7"), 7, "seed: 8"), "/base");
  CHECK(other.kgraph.transe.seed != c.kgraph.transe.seed);
}

TEST_CASE("unknown keys are rejected with their full path") {
  CHECK(ErrorOf(std::string(kMinimal) + "bogus: 1\n").find("bogus") != std::string::npos);
  const std::string nested = R"(
name: x
seed: 1
dataset: {path: a.csv}
model: {kind: svm, train: {lerning_rate: 1}}
)";
  CHECK(ErrorOf(nested).find("model.train.lerning_rate") != std::string::npos);
}

TEST_CASE("wrong types and bad values name the key") {
  CHECK(ErrorOf("name: x\nseed: 1\ndataset: {path: a, min_tokens: many}\n")
            .find("dataset.min_tokens") != std::string::npos);
  CHECK(ErrorOf("name: x\nseed: 1\ndataset: {path: a}\nmodel: {kind: forest}\n")
            .find("forest") != std::string::npos);
  CHECK(ErrorOf("name: x\nseed: 1\ndataset: {path: a}\nmodel: {C: -1}\n")
            .find("model.C") != std::string::npos);
  CHECK(ErrorOf("name: x\ndataset: {path: a}\n").find("seed") != std::string::npos);
  CHECK(ErrorOf("name: x\nseed: 1\n").find("dataset.path") != std::string::npos);
  CHECK(ErrorOf("name: x\nseed: 1\ndataset: {path: a}\nfeatures: {kind: word2vec_pre}\n")
            .find("pretrained_vectors") != std::string::npos);
  CHECK_FALSE(ErrorOf(": : :\n  - [").empty());
}

TEST_CASE("canonical JSON reparses to the same hash") {
  const ExperimentConfig c = ParseExperimentConfig(kMinimal, "/base");
  const ExperimentConfig again = ParseExperimentConfig(c.ToJson().dump(), "/elsewhere");
  CHECK(again.ToJson() == c.ToJson());
  CHECK(again.Hash() == c.Hash());
  CHECK(c.Hash().size() == 64);
  ExperimentConfig changed = c;
  changed.model.train.lr = 3e-5;
  CHECK(changed.Hash() != c.Hash());
}

TEST_CASE("input path check names the missing file") {
  testing::TempDir dir;
  WriteFile(dir.File("config.yaml"), kMinimal);
  const ExperimentConfig c = LoadExperimentConfig(dir.File("config.yaml"));
  try {
    CheckInputPaths(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("dataset.path") != std::string::npos);
  }
  std::filesystem::create_directories(dir.path() / "data");
  WriteFile(dir.File("data/claims.csv"), "x");
  WriteFile(dir.File("data/factchecks.jsonl"), "");
  CHECK_NOTHROW(CheckInputPaths(c));
  CHECK_THROWS_AS(LoadExperimentConfig(dir.File("absent.yaml")), ConfigError);
}

TEST_CASE("every shipped config parses") {
  int parsed = 0;
  for (const char *dir : {"configs", "fixtures/configs"}) {
    for (const auto &entry : std::filesystem::directory_iterator(testing::SourcePath(dir))) {
      if (entry.path().extension() != ".yaml") continue;
      CAPTURE(entry.path().string());
      const ExperimentConfig c = LoadExperimentConfig(entry.path().string());
      CHECK(LoadExperimentConfig(entry.path().string()).Hash() == c.Hash());
      ++parsed;
    }
  }
  CHECK(parsed >= 20);
}

}  // namespace
}  // namespace claimlens
