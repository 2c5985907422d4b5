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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>

#include <gtest/gtest.h>

#include "mpcgps/harness.h"

namespace mpcgps {
namespace {

namespace fs = std::filesystem;

// The test-time controller sees the observation vector and nothing else.
static_assert(std::is_same_v<ObservationPolicy, std::function<Action(const ObservationVector&)>>);

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> ReadTree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      out[fs::relative(entry.path(), dir).string()] = ReadFile(entry.path());
    }
  }
  return out;
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mpcgps_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.gps.iterations = 1;
  c.gps.num_initial_states = 1;
  c.gps.samples_per_state = 2;
  c.gps.horizon = 20;
  c.gps.scenario = "straight_hallway";
  c.gps.train.steps = 100;
  c.gps.train.report_every = 0;
  c.gps.seed = 5;
  c.test.runs = 3;
  c.test.episode_cap_s = 2.0;
  return c;
}

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig defaults;
  EXPECT_NO_THROW(defaults.Validate());
  const std::string text = ExperimentConfigToJson(defaults);
  const ExperimentConfig back = ParseExperimentConfig(text);
  EXPECT_EQ(ExperimentConfigToJson(back), text);
}

TEST(Config, ModifiedValuesRoundTrip) {
  ExperimentConfig c = SmallConfig();
  c.gps.model_error = ModelErrorSpec::RotorBias(0.08, RotorSide::kRear);
  c.gps.variant = TrainingVariant::kOfflineOnly;
  c.gps.vehicle.mass = 1.234567890123;
  c.gps.duals.lambda_step = 0.25;
  c.gps.mpc.solver.line_search_steps = 7;
  c.test.scenario = "forest";
  const std::string text = ExperimentConfigToJson(c);
  const ExperimentConfig back = ParseExperimentConfig(text);
  EXPECT_EQ(back.gps.vehicle.mass, 1.234567890123);
  EXPECT_EQ(back.gps.model_error.side, RotorSide::kRear);
  EXPECT_EQ(back.gps.variant, TrainingVariant::kOfflineOnly);
  EXPECT_EQ(back.gps.mpc.solver.line_search_steps, 7);
  EXPECT_EQ(ExperimentConfigToJson(back), text);
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const ExperimentConfig c = ParseExperimentConfig(R"({"gps": {"iterations": 5}, "seed": 9})");
  EXPECT_EQ(c.gps.iterations, 5);
  EXPECT_EQ(c.gps.seed, 9u);
  EXPECT_EQ(c.gps.horizon, 100);
  EXPECT_EQ(c.test.runs, 20);
}

void ExpectRejected(const std::string& text, const std::string& fragment) {
  try {
    ParseExperimentConfig(text, "cfg.json");
    ADD_FAILURE() << "accepted: " << text;
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsUnknownFieldsAndBadValues) {
  ExpectRejected(R"({"gps": {"iteratons": 3}})", "gps.iteratons");
  ExpectRejected(R"({"bogus": 1})", "bogus");
  ExpectRejected(R"({"gps": {"iterations": "three"}})", "gps.iterations");
  ExpectRejected(R"({"gps": {"iterations": 0}})", "cfg.json");
  ExpectRejected(R"({"scenario": "maze"})", "maze");
  ExpectRejected(R"({"model_error": {"type": "rotor_bias", "rotor_bias_fraction": 2.0}})",
                 "rotor bias");
  ExpectRejected(R"({"test": {"runs": 0}})", "cfg.json");
  ExpectRejected("{\n  \"gps\": {\n    \"iterations\": 3,,\n  }\n}", "cfg.json:3:");
}

TEST(Config, OutputRootEnvironmentVariable) {
  ::setenv("MPCGPS_OUTPUT_ROOT", "/tmp/root", 1);
  EXPECT_EQ(ResolveOutputPath("runs/a"), fs::path("/tmp/root/runs/a"));
  EXPECT_EQ(ResolveOutputPath("/abs/b"), fs::path("/abs/b"));
  ::unsetenv("MPCGPS_OUTPUT_ROOT");
  EXPECT_EQ(ResolveOutputPath("runs/a"), fs::path("runs/a"));
}

TEST(Export, HeaderLayout) {
  const std::vector<std::string> header = TrajectoryCsvHeader();
  ASSERT_EQ(header.size(), 59u);
  EXPECT_EQ(header.front(), "t");
  EXPECT_EQ(header.back(), "crashed");
  EXPECT_FALSE(MetricsCsvHeader().empty());
}

class TrainedRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(TempDir("train"));
    TrainExperiment(SmallConfig(), *dir_);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }
  static fs::path* dir_;
};
fs::path* TrainedRun::dir_ = nullptr;

TEST_F(TrainedRun, WritesAllArtifacts) {
  for (const char* f : {kConfigFile, kMetricsFile, kTrajectoriesFile, kPolicyFile}) {
    EXPECT_TRUE(fs::exists(*dir_ / f)) << f;
  }
  EXPECT_TRUE(fs::exists(*dir_ / kCheckpointDir / "policy_iter1.bin"));
  EXPECT_TRUE(fs::exists(*dir_ / kCheckpointDir / "duals_iter1.json"));
  // the embedded config reproduces the run settings
  const ExperimentConfig embedded = LoadExperimentConfig((*dir_ / kConfigFile).string());
  EXPECT_EQ(ExperimentConfigToJson(embedded), ExperimentConfigToJson(SmallConfig()));
  EXPECT_NO_THROW(PolicyNet::Load((*dir_ / kPolicyFile).string()).Validate());
}

TEST_F(TrainedRun, ExportIsCompleteAndRepeatable) {
  ASSERT_EQ(ExportTrajectories(*dir_), 2);
  ExportMetrics(*dir_);
  const auto first = ReadTree(*dir_ / "export");
  ASSERT_TRUE(first.count("trajectories/iter001_traj000_sample000.csv"));
  ASSERT_TRUE(first.count("trajectories/schema.json"));
  ASSERT_TRUE(first.count("metrics.csv"));
  std::istringstream csv(first.at("trajectories/iter001_traj000_sample000.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 58) << "row " << rows;
  }
  EXPECT_EQ(rows, 1 + 20);
  ExportTrajectories(*dir_);
  ExportMetrics(*dir_);
  EXPECT_EQ(ReadTree(*dir_ / "export"), first);
}

TEST_F(TrainedRun, SameSeedSameFiles) {
  const fs::path other = TempDir("train_again");
  TrainExperiment(SmallConfig(), other);
  for (const char* f : {kMetricsFile, kTrajectoriesFile, kPolicyFile}) {
    EXPECT_EQ(ReadFile(other / f), ReadFile(*dir_ / f)) << f;
  }
  fs::remove_all(other);
}

TEST(Evaluate, ZeroThrustFallsWithinTwoSeconds) {
  ExperimentConfig c = SmallConfig();
  c.test.episode_cap_s = 10.0;
  const TestReport report =
      EvaluatePolicy([](const ObservationVector&) { return Action(Action::Zero()); }, c);
  ASSERT_EQ(report.runs.size(), 3u);
  for (const TestRun& r : report.runs) {
    EXPECT_EQ(r.status, CrashStatus::kGroundCollision);
    EXPECT_LT(r.duration_s, 2.0);
    EXPECT_GT(r.duration_s, 0.0);
    EXPECT_NEAR(r.duration_s, r.steps * c.gps.dt, 1e-12);
  }
}

TEST(Evaluate, HoverPolicyReachesCap) {
  ExperimentConfig c = SmallConfig();
  c.test.scenario = "empty";
  c.gps.plant_noise_variance = 0.0;
  const Action hover = HoverControls(c.gps.vehicle);
  const TestReport report = EvaluatePolicy([&](const ObservationVector&) { return hover; }, c);
  for (const TestRun& r : report.runs) {
    EXPECT_EQ(r.status, CrashStatus::kFlying);
    EXPECT_NEAR(r.duration_s, 2.0, 1e-12);
  }
  EXPECT_NEAR(report.stddev_duration_s, 0.0, 1e-12);
}

TEST(Evaluate, DeterministicAndSummaryConsistent) {
  const ExperimentConfig c = SmallConfig();
  PolicyNet trained = PolicyNet::Random(3);
  trained.covariance = Eigen::MatrixXd::Identity(4, 4);
  const PolicyNet net = RandomWeightBaseline(trained, 4);
  const TestReport a = EvaluatePolicy(net, c);
  const TestReport b = EvaluatePolicy(net, c);
  EXPECT_EQ(TestReportToJson(a), TestReportToJson(b));
  double mean = 0.0, var = 0.0;
  for (const TestRun& r : a.runs) mean += r.duration_s / a.runs.size();
  for (const TestRun& r : a.runs) var += (r.duration_s - mean) * (r.duration_s - mean) / a.runs.size();
  EXPECT_NEAR(a.mean_duration_s, mean, 1e-9);
  EXPECT_NEAR(a.stddev_duration_s, std::sqrt(var), 1e-9);
  for (size_t r = 0; r < a.runs.size(); ++r) EXPECT_EQ(a.runs[r].environment_seed, c.test.first_seed + r);
}

TEST(Evaluate, SummarizeRecomputes) {
  TestReport report;
  for (double d : {1.0, 2.0, 4.0, 9.5}) report.runs.push_back({0, d, CrashStatus::kFlying, 0});
  Summarize(&report);
  EXPECT_NEAR(report.mean_duration_s, 4.125, 1e-12);
  EXPECT_NEAR(report.stddev_duration_s, std::sqrt((9.765625 + 4.515625 + 0.015625 + 28.890625) / 4.0),
              1e-12);
}

TEST(Evaluate, RandomBaselineKeepsLayout) {
  PolicyNet trained = PolicyNet::Random(1);
  trained.covariance = Eigen::MatrixXd::Identity(4, 4) * 2.0;
  trained.output_mean = Eigen::VectorXd::Constant(4, 600.0);
  const PolicyNet plain = RandomWeightBaseline(trained, 8);
  const PolicyNet kept = RandomWeightBaseline(trained, 8, true);
  EXPECT_EQ(plain.sizes(), trained.sizes());
  EXPECT_EQ(plain.covariance, trained.covariance);
  EXPECT_EQ(plain.output_mean, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(kept.output_mean, trained.output_mean);
  EXPECT_EQ(kept.Parameters(), plain.Parameters());
  EXPECT_NE(plain.Parameters(), trained.Parameters());
}

}  // namespace
}  // namespace mpcgps
