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

#include "mpcgps/mpc.h"

#include <algorithm>
#include <utility>

#include "mpcgps/gaussian.h"

namespace mpcgps {

std::vector<GaussianMarginal> PropagateMarginals(
    const LinGaussController& reference, const SystemModel& model,
    const Eigen::VectorXd& x_t, int t, int horizon) {
  const int total = reference.horizon();
  if (t < 0 || t >= total) throw ValidationError("marginals: t out of range");
  if (horizon < 1) throw ValidationError("marginals: horizon must be >= 1");
  const int steps = std::min(horizon, total - t);
  const bool stored = static_cast<int>(reference.dynamics.size()) == total;
  const Trajectory& nominal = reference.nominal;

  const int n = model.tangent_dim();
  Eigen::VectorXd mean = model.Difference(x_t, nominal.states[t]);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);

  std::vector<GaussianMarginal> out;
  out.reserve(steps);
  for (int s = t; s < t + steps; ++s) {
    const LinearDynamics f =
        stored ? reference.dynamics[s]
               : model.Linearize(nominal.states[s], nominal.actions[s],
                                 &nominal.states[s + 1]);
    const Eigen::MatrixXd& k_gain = reference.gain[s];
    const Eigen::VectorXd du = reference.feedforward[s] + k_gain * mean;
    const Eigen::MatrixXd closed = f.fx + f.fu * k_gain;
    mean = f.fx * mean + f.fu * du + f.fc;
    cov = closed * cov * closed.transpose() +
          f.fu * reference.covariance[s] * f.fu.transpose() + f.noise;
    cov = Symmetrize(cov);
    out.push_back({nominal.states[s + 1], mean, cov});
  }
  return out;
}

Eigen::MatrixXd MpcStepResult::Precision() const {
  return InverseSpd(covariance);
}

// ----- true-cost window ----- //

TrueCostWindow::TrueCostWindow(std::shared_ptr<const CostFunction> task,
                               const LinearizedPolicy* policy,
                               const DualState* duals, int start_time)
    : task_(std::move(task)),
      policy_(policy),
      duals_(duals),
      start_time_(start_time) {
  if (task_ == nullptr) throw ValidationError("true-cost MPC needs a task cost");
}

double TrueCostWindow::Running(int k, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) const {
  const int t = start_time_ + k;
  double value = task_->Running(t, x, u);
  if (duals_ != nullptr && t < duals_->horizon()) {
    value -= u.dot(duals_->lambda[t]);
    const double nu = duals_->nu[t];
    if (policy_ != nullptr && nu != 0.0 && t < policy_->horizon()) {
      value += nu * policy_->NegativeLogProbability(t, x, u);
    }
  }
  return value;
}

QuadExpansion TrueCostWindow::QuadratizeRunning(int k, const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& u,
                                                const SystemModel& model) const {
  const int t = start_time_ + k;
  QuadExpansion q = task_->QuadratizeRunning(t, x, u, model);
  if (duals_ != nullptr && t < duals_->horizon()) {
    q.gradient.tail(u.size()) -= duals_->lambda[t];
    q.constant -= u.dot(duals_->lambda[t]);
    if (policy_ != nullptr) {
      AddPolicyExpansion(*policy_, t, duals_->nu[t], x, u, model, &q);
    }
  }
  return q;
}

// ----- MPC step ----- //

namespace {

MpcStepResult Fallback(const Eigen::VectorXd& x_t, int t,
                       const MpcProblem& problem, const std::string& why) {
  const LinGaussController& ref = *problem.reference;
  MpcStepResult out;
  out.gain = ref.gain[t];
  out.feedforward = ref.feedforward[t];
  out.covariance = ref.covariance[t];
  out.mean_action = ref.Mean(t, x_t, *problem.model);
  out.action = out.mean_action;
  out.fallback = true;
  out.failure = why;
  return out;
}

}  // namespace

MpcStepResult MpcStep(const Eigen::VectorXd& x_t, int t,
                      const MpcProblem& problem, const MpcOptions& options,
                      const LinGaussController* warm_start,
                      std::mt19937_64* rng, LinGaussController* plan) {
  if (problem.reference == nullptr || problem.model == nullptr) {
    throw ValidationError("MPC problem needs a reference and a model");
  }
  const LinGaussController& ref = *problem.reference;
  const SystemModel& model = *problem.model;
  if (t < 0 || t >= ref.horizon()) throw ValidationError("MPC: t out of range");
  if (options.horizon < 1 || options.iterations < 1) {
    throw ValidationError("MPC horizon and iterations must be >= 1");
  }
  const int steps = std::min(options.horizon, ref.horizon() - t);

  ILQGResult solved;
  try {
    // closed-loop warm start: shifted previous plan, then the reference
    std::vector<Eigen::VectorXd> initial;
    initial.reserve(steps);
    Eigen::VectorXd x = x_t;
    for (int k = 0; k < steps; ++k) {
      Eigen::VectorXd u = (warm_start != nullptr && k + 1 < warm_start->horizon())
                              ? warm_start->Mean(k + 1, x, model)
                              : ref.Mean(t + k, x, model);
      x = model.Step(x, u);
      initial.push_back(std::move(u));
    }

    std::unique_ptr<CostFunction> cost;
    if (problem.objective == MpcObjective::kSurrogate) {
      cost = std::make_unique<SurrogateCost>(
          PropagateMarginals(ref, model, x_t, t, steps), problem.policy,
          problem.duals, t, problem.model, options.covariance_regularization);
    } else {
      cost = std::make_unique<TrueCostWindow>(problem.task, problem.policy,
                                              problem.duals, t);
    }
    ILQGOptions solver = options.solver;
    solver.max_iterations = options.iterations;
    solved = ILQGOptimize(model, *cost, x_t, initial, solver);
  } catch (const Error& e) {
    return Fallback(x_t, t, problem, e.what());
  }
  if (solved.failed) return Fallback(x_t, t, problem, solved.failure);

  const LinGaussController& local = solved.controller;
  MpcStepResult out;
  out.gain = local.gain[0];
  out.feedforward = local.feedforward[0];
  out.covariance = local.covariance[0];
  out.mean_action = local.nominal.actions[0] + local.feedforward[0];
  out.predicted = local.nominal;
  out.solver_iterations = solved.iterations;
  if (options.deterministic || rng == nullptr) {
    out.action = out.mean_action;
  } else {
    out.action = SampleGaussian(out.mean_action, out.covariance, *rng);
  }
  if (plan != nullptr) *plan = std::move(solved.controller);
  return out;
}

// ----- action sources ----- //

MpcController::MpcController(MpcProblem problem, MpcOptions options)
    : problem_(std::move(problem)), options_(options) {}

MpcStepResult MpcController::Decide(int t, const Eigen::VectorXd& x,
                                    std::mt19937_64* rng) {
  LinGaussController next;
  MpcStepResult out = MpcStep(x, t, problem_, options_,
                              has_plan_ ? &plan_ : nullptr, rng, &next);
  has_plan_ = !out.fallback;
  if (has_plan_) plan_ = std::move(next);
  return out;
}

LinGaussActor::LinGaussActor(std::shared_ptr<const LinGaussController> controller,
                             std::shared_ptr<const SystemModel> model,
                             bool deterministic)
    : controller_(std::move(controller)),
      model_(std::move(model)),
      deterministic_(deterministic) {}

MpcStepResult LinGaussActor::Decide(int t, const Eigen::VectorXd& x,
                                    std::mt19937_64* rng) {
  if (t < 0 || t >= controller_->horizon()) {
    throw ValidationError("controller: t out of range");
  }
  MpcStepResult out;
  out.gain = controller_->gain[t];
  out.feedforward = controller_->feedforward[t];
  out.covariance = controller_->covariance[t];
  out.mean_action = controller_->Mean(t, x, *model_);
  out.action = (deterministic_ || rng == nullptr)
                   ? out.mean_action
                   : SampleGaussian(out.mean_action, out.covariance, *rng);
  return out;
}

// ----- rollouts ----- //

Eigen::VectorXd PlantStep(const Plant& plant, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& action, std::mt19937_64& rng) {
  Eigen::VectorXd next = Step(State::FromVector(x), action, plant.params, plant.dt).ToVector();
  if (plant.process_noise.size() > 0 && plant.process_noise.cwiseAbs().maxCoeff() > 0.0) {
    next = RetractVector(next, SampleGaussian(Eigen::VectorXd::Zero(kTangentDim),
                                              plant.process_noise, rng));
  }
  return next;
}

Eigen::VectorXd ClampAction(const Plant& plant, const Eigen::VectorXd& action) {
  return action.cwiseMax(0.0).cwiseMin(MaxRotorVelocity(plant.params));
}

RolloutRecord Rollout(const Plant& plant, ActionSource& source,
                      const Eigen::VectorXd& x0, int horizon,
                      std::mt19937_64& rng, const CostFunction* task_cost) {
  if (plant.env == nullptr) throw ValidationError("plant needs an environment");

  RolloutRecord rec;
  rec.steps.reserve(horizon);
  Eigen::VectorXd x = x0;
  bool crashed = false;
  for (int t = 0; t < horizon; ++t) {
    const State state = State::FromVector(x);
    rec.status = DetectCrash(*plant.env, state, plant.crash);
    if (rec.status != CrashStatus::kFlying) {
      crashed = true;
      break;
    }
    const Observation obs = Observe(*plant.env, state, plant.sensor, &rng);
    RolloutStep step;
    try {
      step.decision = source.Decide(t, x, &rng);
      step.action = ClampAction(plant, step.decision.action);
      Eigen::VectorXd x_next = PlantStep(plant, x, step.action, rng);
      if (task_cost != nullptr) {
        rec.task_cost += task_cost->Running(t, x, step.action);
      }
      step.state = x;
      step.observation = obs.ToVector();
      if (step.decision.fallback) ++rec.fallback_count;
      rec.steps.push_back(std::move(step));
      x = std::move(x_next);
    } catch (const Error& e) {
      rec.diverged = true;
      rec.failure = e.what();
      rec.final_state = x;
      return rec;
    }
  }
  if (!crashed) {
    rec.status = DetectCrash(*plant.env, State::FromVector(x), plant.crash);
  }
  rec.final_state = x;
  return rec;
}

RolloutRecord MpcRollout(const Plant& plant, const MpcProblem& problem,
                         const MpcOptions& options, const Eigen::VectorXd& x0,
                         int horizon, std::mt19937_64& rng,
                         const CostFunction* task_cost) {
  MpcController controller(problem, options);
  return Rollout(plant, controller, x0, horizon, rng, task_cost);
}

}  // namespace mpcgps
