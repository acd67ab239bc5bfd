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

#ifndef CLAIMLENS_PIPELINE_H_
#define CLAIMLENS_PIPELINE_H_

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "claimlens/config.h"

namespace claimlens {

// Stage names in execution order.
const std::vector<std::string> &StageNames();
bool IsStageName(const std::string &name);
int StageVersion(const std::string &stage);

// `--out` wins; otherwise $CLAIMLENS_CACHE/<name>-<hash12>; otherwise the
// configured output_dir; otherwise ./runs/<name>-<hash12>.
std::string ResolveOutputDir(const ExperimentConfig &config,
                             const std::string &override_dir = "");

struct PipelineOptions {
  bool force = false;
  std::string out_dir;            // empty: ResolveOutputDir
  std::ostream *log = nullptr;    // status lines; null is silent
};

enum class StageStatus { kRan, kUpToDate, kNotApplicable };

struct StageResult {
  std::string stage;
  StageStatus status = StageStatus::kRan;
  std::string dir;
  // Replay only: the rerun reproduced the recorded output hashes.
  bool identical = true;
};

// Runs stages of one experiment. Every stage writes <out>/<stage>/ and a
// manifest.json recording the config, its hash, the seed, the stage
// version and sha256 of every input and output file. A stage whose
// manifest still matches is skipped unless `force` is set. Missing or
// stale upstream stages raise MissingArtifactError.
class Pipeline {
 public:
  Pipeline(ExperimentConfig config, PipelineOptions options);

  const ExperimentConfig &config() const { return config_; }
  const std::string &out_dir() const { return out_dir_; }
  std::string StageDir(const std::string &stage) const;

  StageResult Run(const std::string &stage);
  std::vector<StageResult> RunAll();

  // Output directory of the comparison experiment used by analyze.
  std::string BaselineDir() const;

 private:
  void Prepare();
  void BuildKg();
  void BuildOntology();
  void Embed();
  void Train();
  void Evaluate();
  void Analyze();

  // Files a stage reads, mapped to their sha256. Raises
  // MissingArtifactError when an upstream stage has not completed.
  nlohmann::json Inputs(const std::string &stage) const;
  bool Applicable(const std::string &stage) const;
  void Log(const std::string &line) const;

  ExperimentConfig config_;
  PipelineOptions options_;
  std::string out_dir_;
};

// Re-executes the stage a manifest describes from the configuration it
// embeds, writing into the manifest's output directory.
StageResult ReplayManifest(const std::string &manifest_path, std::ostream *log = nullptr);

}  // namespace claimlens

#endif  // CLAIMLENS_PIPELINE_H_
