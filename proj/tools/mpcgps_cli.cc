// Copyright 2026 The mpcgps Authors
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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mpcgps/config.h"
#include "mpcgps/harness.h"
#include "mpcgps/policy.h"
#include "mpcgps/types.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Options {
  // config
  bool defaults = false;
  std::string check;
  // train / eval
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  // eval
  std::string checkpoint;
  std::optional<int> runs;
  std::optional<std::uint64_t> first_seed;
  std::optional<std::string> scenario;
  std::optional<std::uint64_t> random_weights;
  bool keep_normalization = false;
  // export
  std::string run;
  std::string what = "all";
};

mpcgps::ExperimentConfig LoadOrDefault(const Options& o) {
  mpcgps::ExperimentConfig c =
      o.config.empty() ? mpcgps::ExperimentConfig{} : mpcgps::LoadExperimentConfig(o.config);
  if (o.seed) c.gps.seed = *o.seed;
  if (o.runs) c.test.runs = *o.runs;
  if (o.first_seed) c.test.first_seed = *o.first_seed;
  if (o.scenario) c.test.scenario = *o.scenario;
  c.Validate();
  return c;
}

int RunConfig(const Options& o) {
  if (!o.check.empty()) {
    mpcgps::LoadExperimentConfig(o.check);
    std::cout << o.check << ": ok\n";
    return kExitOk;
  }
  std::cout << mpcgps::ExperimentConfigToJson(mpcgps::ExperimentConfig{});
  return kExitOk;
}

int RunTrain(const Options& o) {
  mpcgps::ExperimentConfig c = LoadOrDefault(o);
  if (!o.output.empty()) c.output_dir = o.output;
  const std::filesystem::path dir = mpcgps::ResolveOutputPath(c.output_dir);
  const mpcgps::GpsResult result =
      mpcgps::TrainExperiment(c, dir, o.quiet ? nullptr : &std::cerr);
  int crashes = 0;
  for (const auto& r : result.reports) crashes += r.crashes;
  std::cout << "run directory: " << dir.string() << "\n"
            << "training crashes: " << crashes << "\n";
  return kExitOk;
}

int RunEval(const Options& o) {
  const mpcgps::ExperimentConfig c = LoadOrDefault(o);
  mpcgps::PolicyNet policy = mpcgps::PolicyNet::Load(o.checkpoint);
  if (o.random_weights) {
    policy = mpcgps::RandomWeightBaseline(policy, *o.random_weights, o.keep_normalization);
  }
  const mpcgps::TestReport report = mpcgps::EvaluatePolicy(policy, c);
  const std::string json = mpcgps::TestReportToJson(report);
  if (!o.output.empty()) {
    const std::filesystem::path path = mpcgps::ResolveOutputPath(o.output);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw mpcgps::Error("cannot write '" + path.string() + "'");
    out << json;
  }
  std::cout << "flight duration over " << report.runs.size() << " runs: "
            << report.mean_duration_s << " +- " << report.stddev_duration_s << " s\n";
  return kExitOk;
}

int RunExport(const Options& o) {
  const std::filesystem::path dir = mpcgps::ResolveOutputPath(o.run);
  if (!std::filesystem::is_directory(dir)) {
    throw mpcgps::ValidationError("run directory '" + dir.string() + "' does not exist");
  }
  bool missing = false;
  if (o.what == "trajectories" || o.what == "all") {
    try {
      const int files = mpcgps::ExportTrajectories(dir);
      std::cout << "exported " << files << " trajectory files\n";
    } catch (const mpcgps::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      missing = true;
    }
  }
  if (o.what == "metrics" || o.what == "all") {
    try {
      mpcgps::ExportMetrics(dir);
      std::cout << "exported metrics.csv\n";
    } catch (const mpcgps::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      missing = true;
    }
  }
  return missing ? kExitRuntime : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPC-guided policy search for a simulated quadrotor"};
  app.require_subcommand(1);
  Options o;

  CLI::App* config = app.add_subcommand("config", "Print or check experiment configs");
  config->add_flag("--defaults", o.defaults, "Print the default configuration");
  config->add_option("--check", o.check, "Validate a config file")->check(CLI::ExistingFile);

  CLI::App* train = app.add_subcommand("train", "Run guided policy search");
  train->add_option("-c,--config", o.config, "Experiment config (JSON)");
  train->add_option("-o,--output", o.output, "Run directory (overrides output_dir)");
  train->add_option("--seed", o.seed, "Master seed");
  train->add_flag("-q,--quiet", o.quiet, "No per-iteration log");

  CLI::App* eval = app.add_subcommand("eval", "Fly a trained policy from observations");
  eval->add_option("-p,--checkpoint", o.checkpoint, "Policy checkpoint")->required();
  eval->add_option("-c,--config", o.config, "Experiment config (JSON)");
  eval->add_option("--runs", o.runs, "Number of test flights");
  eval->add_option("--first-seed", o.first_seed, "Environment seed of the first flight");
  eval->add_option("--scenario", o.scenario, "Test scenario");
  eval->add_option("--seed", o.seed, "Master seed for plant noise");
  eval->add_option("--random-weights", o.random_weights,
                   "Replace the weights with random ones drawn from this seed");
  eval->add_flag("--keep-normalization", o.keep_normalization,
                 "With --random-weights, keep the trained input/output scaling");
  eval->add_option("-o,--output", o.output, "Write the report as JSON");

  CLI::App* exp = app.add_subcommand("export", "Flatten run artifacts to CSV");
  exp->add_option("-r,--run", o.run, "Run directory")->required();
  exp->add_option("-w,--what", o.what, "trajectories, metrics or all")
      ->check(CLI::IsMember({"trajectories", "metrics", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (config->parsed()) return RunConfig(o);
    if (train->parsed()) return RunTrain(o);
    if (eval->parsed()) return RunEval(o);
    return RunExport(o);
  } catch (const mpcgps::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
