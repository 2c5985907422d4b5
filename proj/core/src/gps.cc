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

#include "mpcgps/gps.h"

#include <algorithm>
#include <cmath>

#include "mpcgps/parallel.h"

namespace mpcgps {

namespace {
// stream tags for derived random generators
constexpr std::uint64_t kRolloutStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kInitStream = 3;

bool IsHallway(const std::string& scenario) {
  return scenario == "straight_hallway" || scenario == "winding_hallway";
}
}  // namespace

const char* TrainingVariantName(TrainingVariant variant) {
  switch (variant) {
    case TrainingVariant::kOfflineOnly: return "offline_only";
    case TrainingVariant::kMpcTrueCost: return "mpc_true_cost";
    case TrainingVariant::kMpcSurrogate: return "mpc_surrogate";
  }
  return "unknown";
}

TrainingVariant ParseTrainingVariant(const std::string& name) {
  if (name == "offline_only") return TrainingVariant::kOfflineOnly;
  if (name == "mpc_true_cost") return TrainingVariant::kMpcTrueCost;
  if (name == "mpc_surrogate") return TrainingVariant::kMpcSurrogate;
  throw ValidationError("unknown training variant '" + name +
                        "' (expected offline_only, mpc_true_cost, mpc_surrogate)");
}

void GpsConfig::Validate() const {
  if (iterations < 1 || num_initial_states < 1 || samples_per_state < 1 ||
      horizon < 1 || mpc.horizon < 1 || mpc.iterations < 1) {
    throw ValidationError("K, N, M, T, H and MPC iterations must be >= 1");
  }
  if (!IsKnownScenario(scenario)) {
    throw ValidationError("unknown scenario '" + scenario + "'");
  }
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (plant_noise_variance < 0.0 || model_noise_variance < 0.0 ||
      initial_jitter < 0.0) {
    throw ValidationError("noise levels must be non-negative");
  }
  if (!(duals.kl_target > 0.0) || !(duals.nu_min > 0.0) ||
      duals.nu_max < duals.nu_min || !(duals.initial_nu > 0.0) ||
      duals.lambda_bound < 0.0) {
    throw ValidationError("invalid dual update options");
  }
  if (train.batch_size < 1 || train.steps < 0 || !(train.learning_rate >= 0.0)) {
    throw ValidationError("invalid training options");
  }
  vehicle.Validate();
  targets.Validate();
}

State SampleInitialState(const std::string& scenario, int i, int n,
                         double height, double jitter, std::mt19937_64* rng) {
  if (n < 1 || i < 0 || i >= n) throw ValidationError("initial state index out of range");
  auto spread = [&](double half, int count, int k) {
    return count == 1 ? 0.0 : -half + 2.0 * half * k / (count - 1);
  };
  State s;
  if (IsHallway(scenario)) {
    // 5 m hallway with a 0.5 m wall margin
    s.position = {0.0, spread(2.0, n, i), height};
  } else if (scenario == "cylinder") {
    // rows of six lateral offsets in front of the cylinder
    const int cols = std::min(n, 6);
    s.position = {-1.0 * (i / 6), spread(1.25, cols, i % 6), height};
  } else {
    s.position = {0.0, spread(1.0, n, i), height};
  }
  if (rng != nullptr && jitter > 0.0) {
    std::normal_distribution<double> normal(0.0, jitter);
    for (int k = 0; k < 3; ++k) s.position(k) += normal(*rng);
  }
  return s;
}

GpsSetup MakeSetup(const GpsConfig& config) {
  GpsSetup setup;
  setup.env = std::make_shared<const Environment>(
      MakeScenario(config.scenario, config.scenario_seed));
  setup.model = std::make_shared<const QuadrotorModel>(
      config.vehicle, config.dt, DefaultProcessNoise(config.model_noise_variance));
  setup.targets = config.targets;
  if (setup.targets.hover.isZero()) setup.targets.hover = HoverControls(config.vehicle);
  setup.task = std::make_shared<const TaskCost>(setup.targets, setup.env, config.weights);
  setup.plant.params = ApplyModelError(config.vehicle, config.model_error);
  setup.plant.dt = config.dt;
  setup.plant.process_noise = DefaultProcessNoise(config.plant_noise_variance);
  setup.plant.env = setup.env;
  setup.plant.sensor = config.sensor;
  setup.plant.crash = config.crash;
  return setup;
}

DualState UpdateDuals(const DualState& duals,
                      const std::vector<const RolloutRecord*>& rollouts,
                      const LinearizedPolicy& policy, const DualOptions& options,
                      DualUpdateStats* stats) {
  DualState out = duals;
  const int horizon = duals.horizon();
  double kl_total = 0.0;
  int kl_steps = 0;
  for (int t = 0; t < horizon; ++t) {
    Eigen::VectorXd mismatch = Eigen::VectorXd::Zero(duals.lambda[t].size());
    double kl = 0.0;
    int count = 0;
    for (const RolloutRecord* r : rollouts) {
      if (t >= r->length() || t >= policy.horizon()) continue;
      const RolloutStep& step = r->steps[t];
      const Eigen::VectorXd pi_mean = policy.Mean(t, step.state);
      mismatch += pi_mean - step.decision.mean_action;
      kl += KlGaussians(step.decision.mean_action, step.decision.covariance,
                        pi_mean, policy.covariance[t]);
      ++count;
    }
    if (count == 0) {
      if (out.nu[t] == 0.0) out.nu[t] = options.initial_nu;
      continue;
    }
    mismatch /= count;
    kl /= count;
    kl_total += kl;
    ++kl_steps;

    double& nu = out.nu[t];
    if (nu == 0.0) {
      nu = options.initial_nu;
    } else if (kl > 2.0 * options.kl_target) {
      nu *= 2.0;
    } else if (kl < 0.5 * options.kl_target) {
      nu *= 0.5;
    }
    nu = std::clamp(nu, options.nu_min, options.nu_max);
    out.lambda[t] = (out.lambda[t] + options.lambda_step * nu * mismatch)
                        .cwiseMax(-options.lambda_bound)
                        .cwiseMin(options.lambda_bound);
  }
  if (stats != nullptr) {
    stats->steps = kl_steps;
    stats->mean_kl = kl_steps > 0 ? kl_total / kl_steps : 0.0;
  }
  return out;
}

GpsResult RunGps(const GpsConfig& config,
                 const std::function<void(const IterationArtifacts&)>& on_iteration) {
  config.Validate();
  const GpsSetup setup = MakeSetup(config);
  const int n_states = config.num_initial_states;
  const int n_samples = config.samples_per_state;
  const int horizon = config.horizon;
  const int m = kActionDim;

  std::vector<Eigen::VectorXd> starts;
  for (int i = 0; i < n_states; ++i) {
    starts.push_back(SampleInitialState(config.scenario, i, n_states,
                                        setup.targets.height, 0.0, nullptr)
                         .ToVector());
  }

  GpsResult result;
  result.policy = PolicyNet::Random(MakeRng({config.seed, kInitStream})());
  PolicyNet& net = result.policy;
  std::vector<DualState> duals(n_states, DualState::Zero(horizon, m));
  std::vector<LinearizedPolicy> fits(n_states);
  std::vector<std::shared_ptr<const LinGaussController>> controllers(n_states);

  for (int k = 1; k <= config.iterations; ++k) {
    const bool first = k == 1;
    IterationReport report;
    report.iteration = k;

    // (1) offline maximum-entropy solves
    std::vector<double> offline_costs(n_states, 0.0);
    ParallelFor(n_states, config.threads, [&](int i) {
      std::unique_ptr<CostFunction> cost;
      if (first) {
        DualState unit = DualState::Zero(horizon, m);
        unit.nu.assign(horizon, 1.0);
        cost = std::make_unique<AugmentedOfflineCost>(setup.task, nullptr, unit);
      } else {
        cost = std::make_unique<AugmentedOfflineCost>(setup.task, &fits[i], duals[i]);
      }
      const std::vector<Eigen::VectorXd> init =
          controllers[i] ? controllers[i]->nominal.actions
                         : std::vector<Eigen::VectorXd>(horizon, setup.targets.hover);
      ILQGResult solved = ILQGOptimize(*setup.model, *cost, starts[i], init,
                                       config.offline);
      if (solved.failed && solved.cost_history.size() <= 1) {
        throw SolverFailure("offline solve " + std::to_string(i) +
                            " failed: " + solved.failure);
      }
      offline_costs[i] = solved.controller.nominal.cost;
      controllers[i] =
          std::make_shared<const LinGaussController>(std::move(solved.controller));
    });
    for (double c : offline_costs) report.offline_cost += c / n_states;

    // (2) rollouts on the true plant
    std::vector<RolloutRecord> rollouts(n_states * n_samples);
    ParallelFor(n_states * n_samples, config.threads, [&](int index) {
      const int i = index / n_samples;
      const int j = index % n_samples;
      std::mt19937_64 rng = MakeRng({config.seed, kRolloutStream,
                                     static_cast<std::uint64_t>(k),
                                     static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(j)});
      const Eigen::VectorXd x0 =
          SampleInitialState(config.scenario, i, n_states, setup.targets.height,
                             config.initial_jitter, &rng)
              .ToVector();
      std::unique_ptr<ActionSource> source;
      if (config.variant == TrainingVariant::kOfflineOnly) {
        source = std::make_unique<LinGaussActor>(controllers[i], setup.model,
                                                 config.mpc.deterministic);
      } else {
        MpcProblem problem;
        problem.reference = controllers[i];
        problem.model = setup.model;
        problem.policy = first ? nullptr : &fits[i];
        problem.duals = first ? nullptr : &duals[i];
        problem.objective = config.variant == TrainingVariant::kMpcSurrogate
                                ? MpcObjective::kSurrogate
                                : MpcObjective::kTrueCost;
        problem.task = setup.task;
        source = std::make_unique<MpcController>(problem, config.mpc);
      }
      rollouts[index] = Rollout(setup.plant, *source, x0, horizon, rng,
                                setup.task.get());
      rollouts[index].trajectory_index = i;
      rollouts[index].sample_index = j;
    });

    // (3) supervised policy training on this iteration's samples
    TrainingSet set;
    set.num_distributions = n_states;
    for (const RolloutRecord& r : rollouts) {
      report.rollouts += 1;
      report.crashes += r.crashed() ? 1 : 0;
      report.fallbacks += r.fallback_count;
      report.mean_task_cost += r.task_cost / rollouts.size();
      const DualState& d = duals[r.trajectory_index];
      for (int t = 0; t < r.length(); ++t) {
        const RolloutStep& step = r.steps[t];
        TrainingSample s;
        s.trajectory = r.trajectory_index;
        s.sample = r.sample_index;
        s.t = t;
        s.state = step.state;
        s.observation = step.observation;
        s.gain = step.decision.gain;
        s.feedforward = step.decision.feedforward;
        s.target = step.decision.mean_action;
        s.precision = step.decision.Precision();
        s.nu = d.nu[t];
        s.lambda = d.lambda[t];
        s.weight = first ? 1.0 : d.nu[t];
        set.samples.push_back(std::move(s));
      }
    }
    if (set.empty()) throw Error("all rollouts failed before producing samples");
    report.samples = static_cast<int>(set.samples.size());
    if (!net.normalization_frozen) {
      std::vector<Eigen::VectorXd> obs, targets;
      for (const TrainingSample& s : set.samples) {
        obs.push_back(s.observation);
        targets.push_back(s.target);
      }
      net.FitNormalization(obs, targets);
    }
    TrainOptions train = config.train;
    train.seed = MakeRng({config.seed, kTrainStream, static_cast<std::uint64_t>(k)})();
    const TrainReport trained = Train(net, set, train);
    report.initial_policy_loss = trained.initial_loss;
    report.policy_loss = trained.final_loss;
    net.covariance = ClosedFormSigma(set);

    // (4) linear-Gaussian fits of the policy per distribution
    std::vector<std::vector<const RolloutRecord*>> grouped(n_states);
    for (const RolloutRecord& r : rollouts) grouped[r.trajectory_index].push_back(&r);
    ParallelFor(n_states, config.threads, [&](int i) {
      fits[i] = FitLinearizedPolicy(net, grouped[i], horizon, config.fit);
    });

    // (5) dual updates
    double kl_sum = 0.0;
    int kl_steps = 0;
    for (int i = 0; i < n_states; ++i) {
      DualUpdateStats stats;
      duals[i] = UpdateDuals(duals[i], grouped[i], fits[i], config.duals, &stats);
      kl_sum += stats.mean_kl * stats.steps;
      kl_steps += stats.steps;
    }
    report.mean_kl = kl_steps > 0 ? kl_sum / kl_steps : 0.0;
    double nu_sum = 0.0, lambda_sum = 0.0;
    report.min_nu = duals[0].nu[0];
    report.max_nu = duals[0].nu[0];
    for (const DualState& d : duals) {
      for (int t = 0; t < horizon; ++t) {
        nu_sum += d.nu[t];
        report.min_nu = std::min(report.min_nu, d.nu[t]);
        report.max_nu = std::max(report.max_nu, d.nu[t]);
        lambda_sum += d.lambda[t].cwiseAbs().mean();
      }
    }
    report.mean_nu = nu_sum / (n_states * horizon);
    report.mean_abs_lambda = lambda_sum / (n_states * horizon);

    result.reports.push_back(report);
    if (on_iteration) on_iteration({result.reports.back(), rollouts, net, duals});
  }
  return result;
}

}  // namespace mpcgps
