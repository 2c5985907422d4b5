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

#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mpcgps/environment.h"
#include "mpcgps/gps.h"
#include "mpcgps/mpc.h"
#include "mpcgps/policy.h"
#include "mpcgps/trajopt.h"

namespace mpcgps {
namespace {

static void BM_DynamicsStep(benchmark::State& state) {
  const VehicleParams params;
  State s;
  s.position = {0.0, 0.0, 2.0};
  const Action u = HoverControls(params) * 1.01;
  for (auto _ : state) {
    s = Step(s, u, params, 0.05);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_DynamicsStep);

static void BM_Linearize(benchmark::State& state) {
  const VehicleParams params;
  const QuadrotorModel model(params, 0.05);
  State s;
  s.position = {0.0, 0.0, 2.0};
  const Eigen::VectorXd x = s.ToVector();
  const Eigen::VectorXd u = HoverControls(params);
  for (auto _ : state) benchmark::DoNotOptimize(model.Linearize(x, u));
}
BENCHMARK(BM_Linearize);

static void BM_Observe(benchmark::State& state) {
  const Environment env = MakeScenario("forest", 3);
  const SensorConfig sensor;
  State s;
  s.position = {0.0, 0.0, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(Observe(env, s, sensor, nullptr));
}
BENCHMARK(BM_Observe);

// Backward pass over a quadrotor trajectory of the given length.
static void BM_BackwardPass(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  GpsConfig config;
  config.scenario = "empty";
  const GpsSetup setup = MakeSetup(config);
  State start;
  start.position = {0.0, 0.0, 2.0};
  const RolloutResult nominal =
      OpenLoopRollout(*setup.model, std::vector<Eigen::VectorXd>(T, setup.targets.hover),
                      start.ToVector(), *setup.task);
  QuadExpansion terminal;
  const auto dyn = LinearizeTrajectory(*setup.model, nominal.trajectory);
  const auto run = QuadratizeTrajectory(*setup.model, *setup.task, nominal.trajectory, &terminal);
  for (auto _ : state) benchmark::DoNotOptimize(BackwardPass(dyn, run, terminal, 1e-6));
  state.SetComplexityN(T);
}
BENCHMARK(BM_BackwardPass)->RangeMultiplier(2)->Range(16, 128)->Complexity(benchmark::oN);

static void BM_MpcStep(benchmark::State& state) {
  GpsConfig config;
  config.scenario = "straight_hallway";
  const GpsSetup setup = MakeSetup(config);
  const Eigen::VectorXd x0 =
      SampleInitialState(config.scenario, 0, 1, setup.targets.height, 0.0, nullptr).ToVector();
  ILQGResult solved = ILQGOptimize(*setup.model, *setup.task, x0,
                                   std::vector<Eigen::VectorXd>(config.horizon, setup.targets.hover));
  MpcProblem problem;
  problem.reference = std::make_shared<const LinGaussController>(std::move(solved.controller));
  problem.model = setup.model;
  MpcOptions options = config.mpc;
  options.horizon = static_cast<int>(state.range(0));
  std::mt19937_64 rng(0);
  for (auto _ : state) {
    LinGaussController plan;
    benchmark::DoNotOptimize(MpcStep(x0, 0, problem, options, nullptr, &rng, &plan));
  }
}
BENCHMARK(BM_MpcStep)->Arg(15)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_PolicyForward(benchmark::State& state) {
  const PolicyNet net = PolicyNet::Random(0);
  const ObservationVector o = ObservationVector::Constant(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(net.Forward(o));
}
BENCHMARK(BM_PolicyForward);

static void BM_PolicyForwardBatch(benchmark::State& state) {
  const PolicyNet net = PolicyNet::Random(0);
  const Eigen::MatrixXd batch = Eigen::MatrixXd::Ones(kObservationDim, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(net.ForwardBatch(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PolicyForwardBatch)->Arg(50)->Arg(500);

}  // namespace
}  // namespace mpcgps

BENCHMARK_MAIN();
