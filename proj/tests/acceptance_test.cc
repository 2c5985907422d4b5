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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "mpcgps/gps.h"
#include "mpcgps/harness.h"
#include "mpcgps/mpc.h"
#include "mpcgps/policy.h"
#include "mpcgps/trajopt.h"
#include "test_util.h"

namespace mpcgps {
namespace {

namespace fs = std::filesystem;
using testing::NumericGradient;
using testing::NumericJacobian;
using testing::QuadraticCost;
using testing::RandomMatrix;
using testing::RandomSpd;
using testing::RandomVector;
using testing::RelativeError;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Format(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

Eigen::MatrixXd Scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

BackwardPassResult SolveAround(const SystemModel& model, const CostFunction& cost,
                               const Trajectory& nominal) {
  QuadExpansion terminal;
  const auto dyn = LinearizeTrajectory(model, nominal);
  const auto run = QuadratizeTrajectory(model, cost, nominal, &terminal);
  return BackwardPass(dyn, run, terminal, 0.0);
}

// ----- 1 ----- //

Outcome RiccatiFixedPoint() {
  const Stopwatch clock;
  const double a = 1.1, b = 0.5, q = 2.0, r = 0.3;
  const int T = 50;
  // scalar DARE: b^2 P^2 + (r - q b^2 - a^2 r) P - q r = 0
  const double lin = r - q * b * b - a * a * r;
  const double p_star = (-lin + std::sqrt(lin * lin + 4.0 * b * b * q * r)) / (2.0 * b * b);
  const double k_star = -(a * b * p_star) / (r + b * b * p_star);

  const LinearModel model(Scalar(a), Scalar(b));
  double worst = 0.0;
  // terminal weight q: the first gain has converged after 50 steps;
  // terminal weight P*: every gain is the fixed point
  for (double qf : {q, p_star}) {
    const QuadraticCost cost(Scalar(q), Scalar(r), Scalar(qf));
    const RolloutResult nominal = OpenLoopRollout(
        model, std::vector<Eigen::VectorXd>(T, Eigen::VectorXd::Zero(1)),
        Eigen::VectorXd::Constant(1, 1.0), cost);
    const BackwardPassResult bp = SolveAround(model, cost, nominal.trajectory);
    const int last = qf == q ? 0 : T - 1;
    for (int t = 0; t <= last; ++t) worst = std::max(worst, std::abs(bp.gain[t](0, 0) - k_star));
  }
  const double seconds = clock.Seconds();
  return {worst < 1e-6 && seconds < 1.0,
          Format("K*=%.9f max|K-K*|=%.2e, %.3f s", k_star, worst, seconds)};
}

// ----- 2 ----- //

Outcome LqrExactness() {
  const Stopwatch clock;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dn(1, 6), dm(1, 3), dt(1, 20);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dn(rng), m = dm(rng), T = dt(rng);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + RandomMatrix(n, n, rng, 0.2);
    const LinearModel model(a, RandomMatrix(n, m, rng), RandomVector(n, rng, 0.1),
                            Eigen::MatrixXd::Zero(n, n));
    const QuadraticCost cost = QuadraticCost(RandomSpd(n, rng), RandomSpd(m, rng), RandomSpd(n, rng))
                                   .WithLinear(RandomVector(n, rng), RandomVector(m, rng));
    const Eigen::VectorXd x0 = RandomVector(n, rng);
    std::vector<Eigen::VectorXd> actions;
    for (int t = 0; t < T; ++t) actions.push_back(RandomVector(m, rng));
    const RolloutResult nominal = OpenLoopRollout(model, actions, x0, cost);
    const BackwardPassResult bp = SolveAround(model, cost, nominal.trajectory);
    LinGaussController ctrl;
    ctrl.gain = bp.gain;
    ctrl.feedforward = bp.feedforward;
    ctrl.covariance = bp.covariance;
    ctrl.nominal = nominal.trajectory;
    const RolloutResult rolled = ForwardRollout(model, ctrl, x0, 1.0, cost);
    const double predicted = nominal.trajectory.cost + bp.ExpectedChange(1.0);
    worst = std::max(worst, std::abs(rolled.trajectory.cost - predicted) /
                                std::max(1.0, std::abs(predicted)));
  }
  const double seconds = clock.Seconds();
  return {worst < 1e-8 && seconds < 5.0,
          Format("50 instances, max scaled error %.2e, %.3f s", worst, seconds)};
}

// ----- 3 ----- //

struct ClosedLoop {
  std::shared_ptr<LinearModel> model;
  Eigen::MatrixXd a, b, noise;
  Eigen::VectorXd c, x0;
  LinGaussController ctrl;
};

ClosedLoop RandomClosedLoop(std::mt19937_64& rng, int n, int m, int T) {
  ClosedLoop s;
  s.a = Eigen::MatrixXd::Identity(n, n) + RandomMatrix(n, n, rng, 0.15);
  s.b = RandomMatrix(n, m, rng, 0.5);
  s.c = RandomVector(n, rng, 0.1);
  s.noise = RandomSpd(n, rng, 0.01) * 0.05;
  s.model = std::make_shared<LinearModel>(s.a, s.b, s.c, s.noise);
  for (int t = 0; t < T; ++t) {
    s.ctrl.gain.push_back(RandomMatrix(m, n, rng, 0.3));
    s.ctrl.feedforward.push_back(RandomVector(m, rng, 0.2));
    s.ctrl.covariance.push_back(RandomSpd(m, rng, 0.01) * 0.1);
    s.ctrl.nominal.actions.push_back(RandomVector(m, rng));
  }
  // nominal states need not be consistent with the dynamics
  for (int t = 0; t <= T; ++t) s.ctrl.nominal.states.push_back(RandomVector(n, rng));
  s.x0 = s.ctrl.nominal.states[0] + RandomVector(n, rng, 0.3);
  return s;
}

// z-scores of sampled moments against the predicted marginals: mean
// components and covariance entries, every step.
std::vector<double> MomentZScores(const ClosedLoop& s, const std::vector<GaussianMarginal>& predicted,
                                  int samples, std::mt19937_64& rng) {
  const int n = s.a.rows();
  std::normal_distribution<double> gauss;
  auto noise_block = [&](const Eigen::MatrixXd& cov) -> Eigen::MatrixXd {
    Eigen::MatrixXd z(cov.rows(), samples);
    for (int j = 0; j < samples; ++j) {
      for (int i = 0; i < cov.rows(); ++i) z(i, j) = gauss(rng);
    }
    return Eigen::MatrixXd(Eigen::LLT<Eigen::MatrixXd>(cov).matrixL()) * z;
  };
  Eigen::MatrixXd x = s.x0.replicate(1, samples);
  std::vector<double> z;
  for (size_t k = 0; k < predicted.size(); ++k) {
    const Eigen::MatrixXd dev = x.colwise() - s.ctrl.nominal.states[k];
    Eigen::MatrixXd u = (s.ctrl.gain[k] * dev).colwise() +
                        (s.ctrl.nominal.actions[k] + s.ctrl.feedforward[k]);
    u += noise_block(s.ctrl.covariance[k]);
    x = ((s.a * x + s.b * u).colwise() + s.c) + noise_block(s.noise);

    const Eigen::MatrixXd d = x.colwise() - s.ctrl.nominal.states[k + 1];
    const Eigen::VectorXd mean = d.rowwise().mean();
    const Eigen::MatrixXd centered = d.colwise() - mean;
    const Eigen::MatrixXd cov = centered * centered.transpose() / (samples - 1);
    const GaussianMarginal& g = predicted[k];
    for (int i = 0; i < n; ++i) {
      z.push_back((mean(i) - g.mean(i)) / std::sqrt(g.covariance(i, i) / samples));
      for (int j = i; j < n; ++j) {
        const double se = std::sqrt((g.covariance(i, i) * g.covariance(j, j) +
                                     g.covariance(i, j) * g.covariance(i, j)) / samples);
        z.push_back((cov(i, j) - g.covariance(i, j)) / se);
      }
    }
  }
  return z;
}

Outcome MarginalsMonteCarlo() {
  const Stopwatch clock;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dn(1, 6), dm(1, 3);
  const int samples = 100000, horizon = 10;
  int passed = 0, exceed = 0, total = 0;
  double worst_rms = 0.0, worst_abs = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ClosedLoop s = RandomClosedLoop(rng, dn(rng), dm(rng), horizon);
    const auto predicted = PropagateMarginals(s.ctrl, *s.model, s.x0, 0, horizon);
    const std::vector<double> z = MomentZScores(s, predicted, samples, rng);
    double sq = 0.0;
    for (double v : z) {
      sq += v * v;
      worst_abs = std::max(worst_abs, std::abs(v));
      exceed += std::abs(v) > 3.0 ? 1 : 0;
    }
    const double rms = std::sqrt(sq / z.size());
    worst_rms = std::max(worst_rms, rms);
    total += static_cast<int>(z.size());
    passed += rms <= 3.0 ? 1 : 0;
  }
  // negative control: a model with 1.5x process noise must be detected
  const ClosedLoop s = RandomClosedLoop(rng, 4, 2, horizon);
  const LinearModel wrong(s.a, s.b, s.c, 1.5 * s.noise);
  const auto off = PropagateMarginals(s.ctrl, wrong, s.x0, 0, horizon);
  double sq = 0.0;
  const std::vector<double> z = MomentZScores(s, off, samples, rng);
  for (double v : z) sq += v * v;
  const double control_rms = std::sqrt(sq / z.size());
  const double seconds = clock.Seconds();
  return {passed == 20 && control_rms > 3.0 && seconds < 30.0,
          Format("%d/20 instances, worst RMS z %.2f, max |z| %.2f, |z|>3 in %d of %d moments, "
                 "1.5x-noise control RMS z %.1f, %.1f s",
                 passed, worst_rms, worst_abs, exceed, total, control_rms, seconds)};
}

// ----- 4 ----- //

PolicyNet PerturbedNet(std::uint64_t seed, const std::vector<int>& sizes) {
  PolicyNet net = PolicyNet::Random(seed, sizes);
  std::mt19937_64 rng(seed + 7);
  for (DenseLayer& layer : net.layers()) layer.bias = RandomVector(layer.bias.size(), rng, 0.2);
  net.input_mean = RandomVector(net.input_dim(), rng);
  net.input_scale = RandomVector(net.input_dim(), rng).cwiseAbs().array() + 0.5;
  net.output_mean = RandomVector(net.output_dim(), rng);
  net.output_scale = RandomVector(net.output_dim(), rng).cwiseAbs().array() + 0.5;
  return net;
}

Outcome FiniteDifferenceChecks() {
  const Stopwatch clock;
  const std::vector<int> sizes{kObservationDim, 12, 10, kActionDim};
  double loss_err = 0.0, input_err = 0.0, param_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    PolicyNet net = PerturbedNet(100 + trial, sizes);
    std::mt19937_64 rng(500 + trial);
    TrainingSet set;
    set.num_distributions = 2;
    for (int k = 0; k < 10; ++k) {
      TrainingSample s;
      s.trajectory = k % 2;
      s.t = k / 2;
      s.observation = RandomVector(net.input_dim(), rng);
      s.target = RandomVector(net.output_dim(), rng);
      s.precision = RandomSpd(net.output_dim(), rng);
      s.lambda = RandomVector(net.output_dim(), rng, 0.3);
      s.weight = 0.5 + 0.1 * k;
      set.samples.push_back(s);
    }
    std::vector<int> batch(set.samples.size());
    for (size_t i = 0; i < batch.size(); ++i) batch[i] = static_cast<int>(i);

    const Eigen::VectorXd theta = net.Parameters();
    const LossResult analytic = KlSupervisedLoss(net, set, batch);
    const Eigen::VectorXd numeric = NumericGradient(
        [&](const Eigen::VectorXd& p) {
          PolicyNet copy = net;
          copy.SetParameters(p);
          return KlSupervisedLoss(copy, set);
        },
        theta, 1e-6);
    loss_err = std::max(loss_err, RelativeError(analytic.gradient, numeric));

    const Eigen::VectorXd o = RandomVector(net.input_dim(), rng);
    const Eigen::MatrixXd jin = NumericJacobian(
        [&](const Eigen::VectorXd& v) { return net.Forward(v); }, o, 1e-6);
    input_err = std::max(input_err, RelativeError(net.InputJacobian(o), jin));

    // d mu / d theta, one row per output
    Eigen::MatrixXd jtheta(net.output_dim(), theta.size());
    for (int i = 0; i < net.output_dim(); ++i) {
      jtheta.row(i) = net.ParameterGradient(o, Eigen::VectorXd::Unit(net.output_dim(), i)).transpose();
    }
    const Eigen::MatrixXd jtheta_fd = NumericJacobian(
        [&](const Eigen::VectorXd& p) {
          PolicyNet copy = net;
          copy.SetParameters(p);
          return copy.Forward(o);
        },
        theta, 1e-6);
    param_err = std::max(param_err, RelativeError(jtheta, jtheta_fd));
  }
  const double seconds = clock.Seconds();
  const double worst = std::max({loss_err, input_err, param_err});
  return {worst < 1e-4 && seconds < 10.0,
          Format("20 instances each, max rel error: loss grad %.1e, d mu/d o %.1e, d mu/d theta "
                 "%.1e, %.2f s",
                 loss_err, input_err, param_err, seconds)};
}

// ----- 5 ----- //

Outcome ClosedFormSigmaCheck() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + trial % 4, N = 1 + trial % 3, T = 1 + trial % 5;
    TrainingSet set;
    set.num_distributions = N;
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(dim, dim);
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < N; ++i) {
        TrainingSample s;
        s.t = t;
        s.trajectory = i;
        s.precision = RandomSpd(dim, rng);
        avg += s.precision / (N * T);
        set.samples.push_back(s);
      }
    }
    const Eigen::MatrixXd sigma = ClosedFormSigma(set);
    // direct inverse and stationarity of sum_t [tr(Sigma M_t) - log|Sigma|]
    const Eigen::MatrixXd direct = avg.fullPivLu().inverse();
    const Eigen::MatrixXd residual = sigma * avg - Eigen::MatrixXd::Identity(dim, dim);
    worst = std::max({worst, (sigma - direct).norm() / direct.norm(), residual.norm()});
  }
  return {worst < 1e-10, Format("20 precision sets, max error %.2e", worst)};
}

// ----- 6 ----- //

Outcome Hover() {
  const Stopwatch clock;
  GpsConfig config;
  config.scenario = "empty";
  config.targets.velocity.setZero();
  const GpsSetup setup = MakeSetup(config);
  const int T = 150;
  int crashes = 0, fallbacks = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const State start = SampleInitialState("empty", 0, 1, setup.targets.height, 0.2, &rng);
    const Eigen::VectorXd x0 = start.ToVector();
    ILQGResult solved = ILQGOptimize(*setup.model, *setup.task, x0,
                                     std::vector<Eigen::VectorXd>(T, setup.targets.hover));
    MpcProblem problem;
    problem.reference = std::make_shared<const LinGaussController>(std::move(solved.controller));
    problem.model = setup.model;
    const RolloutRecord rec =
        MpcRollout(setup.plant, problem, config.mpc, x0, T, rng, setup.task.get());
    crashes += rec.crashed() ? 1 : 0;
    fallbacks += rec.fallback_count;
    const State end = State::FromVector(rec.final_state);
    const Eigen::Vector3d goal(start.position.x(), start.position.y(), setup.targets.height);
    worst = std::max(worst, (end.position - goal).norm());
  }
  const double seconds = clock.Seconds();
  return {crashes == 0 && worst < 0.5 && seconds < 120.0,
          Format("10 seeds, %d crashes, %d fallbacks, max terminal error %.3f m, %.1f s",
                 crashes, fallbacks, worst, seconds)};
}

// ----- 7 and 8 ----- //

struct TrainingRun {
  GpsResult result;
  int crashes = 0;
  int rollouts = 0;
};

TrainingRun Train(const GpsConfig& config) {
  TrainingRun run;
  run.result = RunGps(config);
  for (const IterationReport& r : run.result.reports) {
    run.crashes += r.crashes;
    run.rollouts += r.rollouts;
  }
  return run;
}

Outcome DeskScaleTraining(PolicyNet* trained) {
  const Stopwatch clock;
  GpsConfig base;  // straight hallway, N=2, M=2, T=100, K=3
  struct Case {
    const char* name;
    ModelErrorSpec error;
    TrainingVariant variant;
  };
  const std::vector<Case> cases = {
      {"mpc/no error", ModelErrorSpec::None(), TrainingVariant::kMpcSurrogate},
      {"mpc/mass +0.05 kg", ModelErrorSpec::MassOffset(0.05), TrainingVariant::kMpcSurrogate},
      {"mpc/rotor bias 8%", ModelErrorSpec::RotorBias(0.08, RotorSide::kLeft),
       TrainingVariant::kMpcSurrogate},
      {"offline_only/rotor bias 8%", ModelErrorSpec::RotorBias(0.08, RotorSide::kLeft),
       TrainingVariant::kOfflineOnly},
  };
  bool pass = true;
  std::string detail;
  for (size_t i = 0; i < cases.size(); ++i) {
    GpsConfig config = base;
    config.model_error = cases[i].error;
    config.variant = cases[i].variant;
    const TrainingRun run = Train(config);
    if (i == 0) *trained = run.result.policy;
    const bool ok = config.variant == TrainingVariant::kOfflineOnly ? run.crashes >= 1
                                                                     : run.crashes == 0;
    pass = pass && ok;
    detail += Format("%s%s %d/%d crashes%s", i ? "; " : "", cases[i].name, run.crashes,
                     run.rollouts, ok ? "" : " (unmet)");
  }
  const double seconds = clock.Seconds();
  pass = pass && seconds < 1800.0;
  return {pass, detail + Format(", %.0f s", seconds)};
}

Outcome Generalization(const PolicyNet& trained) {
  ExperimentConfig config;
  config.test.scenario = "winding_hallway";
  config.test.runs = 20;
  config.test.episode_cap_s = 100.0;
  const TestReport ours = EvaluatePolicy(trained, config);
  const TestReport random = EvaluatePolicy(RandomWeightBaseline(trained, 1), config);
  const TestReport centered = EvaluatePolicy(RandomWeightBaseline(trained, 1, true), config);
  const double ratio = ours.mean_duration_s / random.mean_duration_s;
  return {ratio >= 3.0,
          Format("trained %.2f +- %.2f s, random weights %.2f s, ratio %.1f "
                 "(random weights with trained scaling: %.2f s, ratio %.1f)",
                 ours.mean_duration_s, ours.stddev_duration_s, random.mean_duration_s, ratio,
                 centered.mean_duration_s, ours.mean_duration_s / centered.mean_duration_s)};
}

// ----- 9 ----- //

Outcome Tracking() {
  GpsConfig config;
  config.scenario = "empty";  // hallway targets without walls
  config.plant_noise_variance = 0.0;
  config.model_noise_variance = 0.0;
  const GpsSetup setup = MakeSetup(config);
  const int T = config.horizon;
  const Eigen::VectorXd x0 = SampleInitialState("straight_hallway", 0, 1, setup.targets.height,
                                                0.0, nullptr)
                                 .ToVector();
  ILQGResult solved = ILQGOptimize(*setup.model, *setup.task, x0,
                                   std::vector<Eigen::VectorXd>(T, setup.targets.hover));
  MpcProblem problem;
  problem.reference = std::make_shared<const LinGaussController>(std::move(solved.controller));
  problem.model = setup.model;  // no policy, no duals
  MpcOptions options = config.mpc;
  options.deterministic = true;
  std::mt19937_64 rng(9);
  const RolloutRecord rec = MpcRollout(setup.plant, problem, options, x0, T, rng, setup.task.get());
  double worst = 0.0;
  for (int t = 0; t < rec.length(); ++t) {
    worst = std::max(worst, setup.model->Difference(rec.steps[t].state,
                                                    problem.reference->nominal.states[t]).norm());
  }
  worst = std::max(worst, setup.model->Difference(rec.final_state,
                                                  problem.reference->nominal.states[rec.length()])
                              .norm());
  const bool ok = rec.length() == T && !rec.crashed() && worst < 1e-3;
  return {ok, Format("%d/%d steps, %d fallbacks, max tangent error %.2e", rec.length(), T,
                     rec.fallback_count, worst)};
}

// ----- 10 ----- //

std::map<std::string, std::string> ReadTree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    out[fs::relative(entry.path(), dir).string()] = s.str();
  }
  return out;
}

Outcome Determinism() {
  ExperimentConfig config;
  config.gps.iterations = 2;
  config.gps.num_initial_states = 1;
  config.gps.horizon = 40;
  config.gps.train.steps = 300;
  config.gps.train.report_every = 0;
  config.gps.seed = 1234;
  config.test.runs = 3;
  config.test.episode_cap_s = 5.0;
  std::vector<std::map<std::string, std::string>> trees;
  std::vector<std::string> evals;
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = fs::temp_directory_path() / Format("mpcgps_acceptance_%d", k);
    fs::remove_all(dir);
    const GpsResult result = TrainExperiment(config, dir);
    ExportTrajectories(dir);
    ExportMetrics(dir);
    trees.push_back(ReadTree(dir));
    evals.push_back(TestReportToJson(EvaluatePolicy(result.policy, config)));
    fs::remove_all(dir);
  }
  size_t bytes = 0;
  for (const auto& [name, content] : trees[0]) bytes += content.size();
  const bool ok = trees[0] == trees[1] && evals[0] == evals[1] && !trees[0].empty();
  return {ok, Format("%zu files, %zu bytes, evaluation reports %s", trees[0].size(), bytes,
                     evals[0] == evals[1] ? "identical" : "differ")};
}

}  // namespace
}  // namespace mpcgps

int main() {
  using namespace mpcgps;
  bool all = true;
  auto report = [&](int id, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };
  PolicyNet trained;
  report(1, RiccatiFixedPoint);
  report(2, LqrExactness);
  report(3, MarginalsMonteCarlo);
  report(4, FiniteDifferenceChecks);
  report(5, ClosedFormSigmaCheck);
  report(6, Hover);
  report(7, [&] { return DeskScaleTraining(&trained); });
  report(8, [&] { return Generalization(trained); });
  report(9, Tracking);
  report(10, Determinism);
  return all ? 0 : 1;
}
