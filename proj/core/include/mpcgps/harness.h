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

#ifndef MPCGPS_HARNESS_H_
#define MPCGPS_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpcgps/config.h"
#include "mpcgps/environment.h"
#include "mpcgps/gps.h"
#include "mpcgps/policy.h"

namespace mpcgps {

// Files in a run directory.
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kMetricsFile = "metrics.jsonl";
inline constexpr const char* kTrajectoriesFile = "trajectories.jsonl";
inline constexpr const char* kPolicyFile = "policy.bin";
inline constexpr const char* kCheckpointDir = "checkpoints";
inline constexpr int kExportSchemaVersion = 1;

// Relative paths are placed under $MPCGPS_OUTPUT_ROOT when it is set.
std::filesystem::path ResolveOutputPath(const std::string& path);

// Runs the configured training variant and writes the run directory:
//   config.json         the effective configuration
//   metrics.jsonl       one IterationReport per line
//   trajectories.jsonl  one rollout per line, flushed as written
//   checkpoints/        policy_iter<k>.bin and duals_iter<k>.json
//   policy.bin          final policy
GpsResult TrainExperiment(const ExperimentConfig& config,
                          const std::filesystem::path& run_dir,
                          std::ostream* log = nullptr);

// Test-time controller. It receives the observation vector and nothing else.
using ObservationPolicy = std::function<Action(const ObservationVector&)>;

struct TestRun {
  std::uint64_t environment_seed = 0;
  double duration_s = 0.0;
  CrashStatus status = CrashStatus::kFlying;  // kFlying when the cap was reached
  int steps = 0;
};

struct TestReport {
  std::vector<TestRun> runs;
  double mean_duration_s = 0.0;
  double stddev_duration_s = 0.0;  // population standard deviation
};

// Mean and population standard deviation of the run durations.
void Summarize(TestReport* report);

// Flies `policy` in freshly generated test environments on the true plant
// (configured vehicle with its model error) from the origin at the target
// height. Seeds: environment first_seed + r, plant noise from the master seed.
TestReport EvaluatePolicy(const ObservationPolicy& policy, const ExperimentConfig& config);
TestReport EvaluatePolicy(const PolicyNet& policy, const ExperimentConfig& config);

// Freshly initialized weights in the layout of `trained`, as training starts
// from. keep_normalization also copies the trained input and output scaling,
// which centers the outputs on the training actions.
PolicyNet RandomWeightBaseline(const PolicyNet& trained, std::uint64_t seed,
                               bool keep_normalization = false);

std::string TestReportToJson(const TestReport& report);

// Flattens trajectories.jsonl into one CSV per rollout under
// <run_dir>/export/trajectories/, one row per step:
//   t, 13 state fields, 40 observation fields, 4 action fields, crash flag.
// Returns the number of files written.
int ExportTrajectories(const std::filesystem::path& run_dir);
// metrics.jsonl to <run_dir>/export/metrics.csv, one row per iteration.
void ExportMetrics(const std::filesystem::path& run_dir);

std::vector<std::string> TrajectoryCsvHeader();
std::vector<std::string> MetricsCsvHeader();

}  // namespace mpcgps

#endif  // MPCGPS_HARNESS_H_
