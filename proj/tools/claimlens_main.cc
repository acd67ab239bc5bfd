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

// Command line driver: one subcommand per pipeline stage plus `run`,
// `replay`, `validate` and `export-fixture-encoder`.
//
// Exit codes: 0 ok, 2 usage or config error, 3 missing upstream artifact,
// 4 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "claimlens/config.h"
#include "claimlens/encoder.h"
#include "claimlens/errors.h"
#include "claimlens/pipeline.h"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kMissing = 3;
constexpr int kRuntime = 4;

struct StageArgs {
  std::string config;
  std::string out;
  bool force = false;
};

claimlens::ExperimentConfig LoadChecked(const std::string &path) {
  claimlens::ExperimentConfig config = claimlens::LoadExperimentConfig(path);
  claimlens::CheckInputPaths(config);
  return config;
}

claimlens::PipelineOptions Options(const StageArgs &args) {
  claimlens::PipelineOptions options;
  options.force = args.force;
  options.out_dir = args.out;
  options.log = &std::cout;
  return options;
}

void RunStage(const StageArgs &args, const std::string &stage) {
  claimlens::Pipeline pipeline(LoadChecked(args.config), Options(args));
  std::cout << "output: " << pipeline.out_dir() << std::endl;
  pipeline.Run(stage);
}

// Runs the comparison config through evaluate, then every stage of the
// main config.
void RunAll(const StageArgs &args) {
  const claimlens::ExperimentConfig config = LoadChecked(args.config);
  claimlens::Pipeline pipeline(config, Options(args));
  std::cout << "output: " << pipeline.out_dir() << std::endl;
  if (!config.analyze.baseline_config.empty()) {
    const claimlens::ExperimentConfig baseline =
        LoadChecked(config.Resolve(config.analyze.baseline_config));
    claimlens::PipelineOptions options = Options(args);
    options.out_dir = pipeline.BaselineDir();
    claimlens::Pipeline base(baseline, options);
    for (const auto &stage : claimlens::StageNames()) {
      if (stage == "analyze") break;
      std::cout << "[baseline " << baseline.name << "] ";
      base.Run(stage);
    }
  }
  pipeline.RunAll();
}

}  // namespace

int main(int argc, char **argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("claimlens"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Check-worthy claim detection pipeline"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  StageArgs stage_args;
  auto add_stage_options = [&](CLI::App *cmd) {
    cmd->add_option("--config", stage_args.config, "Experiment config (YAML)")->required();
    cmd->add_option("--out", stage_args.out, "Output directory");
    cmd->add_flag("--force", stage_args.force, "Rerun even when outputs are up to date");
  };
  std::map<CLI::App *, std::string> stage_commands;
  for (const auto &stage : claimlens::StageNames()) {
    CLI::App *cmd = app.add_subcommand(stage, "Run the " + stage + " stage");
    add_stage_options(cmd);
    stage_commands[cmd] = stage;
  }
  CLI::App *run = app.add_subcommand("run", "Run the baseline and all stages");
  add_stage_options(run);

  CLI::App *validate = app.add_subcommand("validate", "Check a config and its input paths");
  std::string validate_config;
  validate->add_option("--config", validate_config, "Experiment config (YAML)")->required();

  CLI::App *replay = app.add_subcommand("replay", "Re-execute the stage a manifest records");
  std::string manifest;
  replay->add_option("--manifest", manifest, "Stage manifest.json")->required();

  CLI::App *export_fixture =
      app.add_subcommand("export-fixture-encoder", "Write the built-in test encoder to a directory");
  std::string fixture_out;
  uint64_t fixture_seed = 1;
  export_fixture->add_option("--out", fixture_out, "Directory")->required();
  export_fixture->add_option("--seed", fixture_seed, "Initialization seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    for (const auto &[cmd, stage] : stage_commands) {
      if (cmd->parsed()) RunStage(stage_args, stage);
    }
    if (run->parsed()) RunAll(stage_args);
    if (validate->parsed()) {
      const claimlens::ExperimentConfig config = LoadChecked(validate_config);
      std::cout << config.name << " " << config.Hash() << std::endl;
    }
    if (replay->parsed()) {
      const claimlens::StageResult result = claimlens::ReplayManifest(manifest, &std::cout);
      std::cout << (result.identical ? "replay: outputs identical to the manifest"
                                     : "replay: outputs differ from the manifest")
                << std::endl;
      if (!result.identical) return kRuntime;
    }
    if (export_fixture->parsed()) {
      claimlens::MakeFixtureEncoder(fixture_seed).Save(fixture_out);
      std::cout << "wrote " << fixture_out << std::endl;
    }
  } catch (const claimlens::ConfigError &e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kUsage;
  } catch (const claimlens::MissingArtifactError &e) {
    std::cerr << "missing artifact: " << e.what() << " (stage: " << e.stage() << ")" << std::endl;
    return kMissing;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kRuntime;
  }
  return kOk;
}
