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

#include "mpcgps/harness.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpcgps/parallel.h"
#include "mpcgps/types.h"

namespace mpcgps {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kEvalStream = 4;

Json Array(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json RolloutJson(int iteration, const RolloutRecord& r) {
  Json steps = Json::array();
  for (int t = 0; t < r.length(); ++t) {
    const RolloutStep& s = r.steps[t];
    steps.push_back({{"t", t},
                     {"state", Array(s.state)},
                     {"observation", Array(s.observation)},
                     {"action", Array(s.action)},
                     {"fallback", s.decision.fallback}});
  }
  return {{"iteration", iteration},
          {"trajectory", r.trajectory_index},
          {"sample", r.sample_index},
          {"status", CrashStatusName(r.status)},
          {"crashed", r.crashed()},
          {"diverged", r.diverged},
          {"failure", r.failure},
          {"fallbacks", r.fallback_count},
          {"task_cost", r.task_cost},
          {"final_state", Array(r.final_state)},
          {"steps", std::move(steps)}};
}

Json ReportJson(const IterationReport& r) {
  return {{"iteration", r.iteration},
          {"rollouts", r.rollouts},
          {"crashes", r.crashes},
          {"fallbacks", r.fallbacks},
          {"samples", r.samples},
          {"mean_task_cost", r.mean_task_cost},
          {"offline_cost", r.offline_cost},
          {"initial_policy_loss", r.initial_policy_loss},
          {"policy_loss", r.policy_loss},
          {"mean_kl", r.mean_kl},
          {"mean_nu", r.mean_nu},
          {"min_nu", r.min_nu},
          {"max_nu", r.max_nu},
          {"mean_abs_lambda", r.mean_abs_lambda}};
}

Json DualsJson(const std::vector<DualState>& duals) {
  Json out = Json::array();
  for (const DualState& d : duals) {
    Json lambda = Json::array();
    for (const Eigen::VectorXd& l : d.lambda) lambda.push_back(Array(l));
    out.push_back({{"nu", d.nu}, {"lambda", std::move(lambda)}});
  }
  return out;
}

std::ofstream OpenOutput(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

std::string Number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteCsvRow(std::ostream& out, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing artifact '" + path.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void AppendNumbers(const Json& array, std::size_t expected, const std::string& what,
                   std::vector<std::string>* row) {
  if (!array.is_array() || array.size() != expected) {
    throw Error("malformed trajectory record: " + what);
  }
  for (const Json& v : array) row->push_back(v.is_number() ? Number(v.get<double>()) : "nan");
}

}  // namespace

fs::path ResolveOutputPath(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* root = std::getenv("MPCGPS_OUTPUT_ROOT"); root && *root) {
      return fs::path(root) / p;
    }
  }
  return p;
}

GpsResult TrainExperiment(const ExperimentConfig& config, const fs::path& run_dir,
                          std::ostream* log) {
  config.Validate();
  fs::create_directories(run_dir / kCheckpointDir);
  {
    std::ofstream out = OpenOutput(run_dir / kConfigFile);
    out << ExperimentConfigToJson(config);
  }
  std::ofstream metrics = OpenOutput(run_dir / kMetricsFile);
  std::ofstream trajectories = OpenOutput(run_dir / kTrajectoriesFile);

  GpsResult result = RunGps(config.gps, [&](const IterationArtifacts& a) {
    const int k = a.report.iteration;
    for (const RolloutRecord& r : a.rollouts) {
      trajectories << RolloutJson(k, r).dump() << '\n';
      trajectories.flush();
    }
    metrics << ReportJson(a.report).dump() << '\n';
    metrics.flush();
    const std::string tag = "_iter" + std::to_string(k);
    a.policy.Save((run_dir / kCheckpointDir / ("policy" + tag + ".bin")).string());
    {
      std::ofstream out = OpenOutput(run_dir / kCheckpointDir / ("duals" + tag + ".json"));
      out << DualsJson(a.duals).dump() << '\n';
    }
    if (log != nullptr) {
      *log << "iteration " << k << ": crashes " << a.report.crashes << "/"
           << a.report.rollouts << ", mean task cost " << a.report.mean_task_cost
           << ", policy loss " << a.report.policy_loss << ", mean KL "
           << a.report.mean_kl << std::endl;
    }
  });
  result.policy.Save((run_dir / kPolicyFile).string());
  return result;
}

void Summarize(TestReport* report) {
  const double n = static_cast<double>(report->runs.size());
  double mean = 0.0;
  for (const TestRun& r : report->runs) mean += r.duration_s;
  mean = n > 0 ? mean / n : 0.0;
  double var = 0.0;
  for (const TestRun& r : report->runs) var += (r.duration_s - mean) * (r.duration_s - mean);
  report->mean_duration_s = mean;
  report->stddev_duration_s = n > 0 ? std::sqrt(var / n) : 0.0;
}

TestReport EvaluatePolicy(const ObservationPolicy& policy, const ExperimentConfig& config) {
  config.Validate();
  const GpsSetup setup = MakeSetup(config.gps);
  const TestSpec& spec = config.test;
  const int max_steps =
      std::max(1, static_cast<int>(std::llround(spec.episode_cap_s / config.gps.dt)));

  TestReport report;
  report.runs.resize(spec.runs);
  ParallelFor(spec.runs, config.gps.threads, [&](int r) {
    TestRun& run = report.runs[r];
    run.environment_seed = spec.first_seed + static_cast<std::uint64_t>(r);
    Plant plant = setup.plant;
    plant.env = std::make_shared<const Environment>(
        MakeScenario(spec.scenario, run.environment_seed));
    std::mt19937_64 rng =
        MakeRng({config.gps.seed, kEvalStream, static_cast<std::uint64_t>(r)});

    State start;
    start.position = Eigen::Vector3d(0.0, 0.0, setup.targets.height);
    Eigen::VectorXd x = start.ToVector();
    int t = 0;
    run.status = DetectCrash(*plant.env, start, plant.crash);
    try {
      while (run.status == CrashStatus::kFlying && t < max_steps) {
        const Observation obs = Observe(*plant.env, State::FromVector(x), plant.sensor, &rng);
        const Action u = policy(obs.ToVector());
        x = PlantStep(plant, x, ClampAction(plant, u), rng);
        ++t;
        run.status = DetectCrash(*plant.env, State::FromVector(x), plant.crash);
      }
    } catch (const SimulationDivergence&) {
      // a non-finite state ends the flight like a crash at this step
      run.status = CrashStatus::kGroundCollision;
      t = std::max(t, 1);
    }
    run.steps = t;
    run.duration_s = t * config.gps.dt;
  });
  Summarize(&report);
  return report;
}

TestReport EvaluatePolicy(const PolicyNet& policy, const ExperimentConfig& config) {
  policy.Validate();
  return EvaluatePolicy(
      [&policy](const ObservationVector& o) -> Action { return policy.Forward(o); },
      config);
}

PolicyNet RandomWeightBaseline(const PolicyNet& trained, std::uint64_t seed,
                               bool keep_normalization) {
  PolicyNet out = PolicyNet::Random(seed, trained.sizes());
  if (keep_normalization) {
    out.input_mean = trained.input_mean;
    out.input_scale = trained.input_scale;
    out.output_mean = trained.output_mean;
    out.output_scale = trained.output_scale;
    out.normalization_frozen = trained.normalization_frozen;
  }
  out.covariance = trained.covariance;
  return out;
}

std::string TestReportToJson(const TestReport& report) {
  Json runs = Json::array();
  for (const TestRun& r : report.runs) {
    runs.push_back({{"environment_seed", r.environment_seed},
                    {"duration_s", r.duration_s},
                    {"steps", r.steps},
                    {"status", CrashStatusName(r.status)}});
  }
  Json out = {{"mean_duration_s", report.mean_duration_s},
              {"stddev_duration_s", report.stddev_duration_s},
              {"runs", std::move(runs)}};
  return out.dump(2) + "\n";
}

std::vector<std::string> TrajectoryCsvHeader() {
  std::vector<std::string> h{"t",  "px", "py", "pz", "vx", "vy", "vz",
                             "qw", "qx", "qy", "qz", "wx", "wy", "wz"};
  for (int i = 0; i < kNumBeams; ++i) h.push_back("range" + std::to_string(i));
  for (const char* name : {"obs_vx", "obs_vy", "obs_vz", "obs_qw", "obs_qx", "obs_qy",
                           "obs_qz", "obs_wx", "obs_wy", "obs_wz"}) {
    h.push_back(name);
  }
  for (int i = 0; i < kActionDim; ++i) h.push_back("u" + std::to_string(i));
  h.push_back("crashed");
  return h;
}

std::vector<std::string> MetricsCsvHeader() {
  std::vector<std::string> h;
  const Json fields = ReportJson(IterationReport{});
  for (const auto& item : fields.items()) h.push_back(item.key());
  return h;
}

int ExportTrajectories(const fs::path& run_dir) {
  const std::vector<std::string> lines = ReadLines(run_dir / kTrajectoriesFile);
  const fs::path dir = run_dir / "export" / "trajectories";
  fs::create_directories(dir);
  const std::vector<std::string> header = TrajectoryCsvHeader();
  {
    Json schema = {{"version", kExportSchemaVersion}, {"columns", header}};
    std::ofstream out = OpenOutput(dir / "schema.json");
    out << schema.dump(2) << '\n';
  }
  int written = 0;
  for (const std::string& line : lines) {
    const Json rec = Json::parse(line);
    char name[96];
    std::snprintf(name, sizeof(name), "iter%03d_traj%03d_sample%03d.csv",
                  rec.at("iteration").get<int>(), rec.at("trajectory").get<int>(),
                  rec.at("sample").get<int>());
    std::ofstream out = OpenOutput(dir / name);
    WriteCsvRow(out, header);
    const Json& steps = rec.at("steps");
    const bool crashed = rec.at("crashed").get<bool>();
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const Json& step = steps[s];
      std::vector<std::string> row{std::to_string(step.at("t").get<int>())};
      AppendNumbers(step.at("state"), kStateDim, "state", &row);
      AppendNumbers(step.at("observation"), kObservationDim, "observation", &row);
      AppendNumbers(step.at("action"), kActionDim, "action", &row);
      row.push_back(crashed && s + 1 == steps.size() ? "1" : "0");
      WriteCsvRow(out, row);
    }
    ++written;
  }
  return written;
}

void ExportMetrics(const fs::path& run_dir) {
  const std::vector<std::string> lines = ReadLines(run_dir / kMetricsFile);
  fs::create_directories(run_dir / "export");
  std::ofstream out = OpenOutput(run_dir / "export" / "metrics.csv");
  const std::vector<std::string> header = MetricsCsvHeader();
  WriteCsvRow(out, header);
  for (const std::string& line : lines) {
    const Json rec = Json::parse(line);
    std::vector<std::string> row;
    for (const std::string& key : header) {
      const Json& v = rec.at(key);
      row.push_back(v.is_number_integer() ? std::to_string(v.get<long long>())
                    : v.is_number()       ? Number(v.get<double>())
                                          : "nan");
    }
    WriteCsvRow(out, row);
  }
}

}  // namespace mpcgps
