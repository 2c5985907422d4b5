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

#include "mpcgps/trajopt.h"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mpcgps/gaussian.h"

namespace mpcgps {

Eigen::VectorXd LinGaussController::Mean(int t, const Eigen::VectorXd& x,
                                         const SystemModel& model) const {
  return nominal.actions[t] + feedforward[t] +
         gain[t] * model.Difference(x, nominal.states[t]);
}

double ControllerEntropy(const Eigen::MatrixXd& covariance) {
  const int n = covariance.rows();
  return 0.5 * (LogDeterminantSpd(covariance) +
                n * std::log(2.0 * M_PI * M_E));
}

// ----- backward pass ----- //

BackwardPassResult BackwardPass(const std::vector<LinearDynamics>& dynamics,
                                const std::vector<QuadExpansion>& running,
                                const QuadExpansion& terminal,
                                double regularization) {
  const int horizon = static_cast<int>(dynamics.size());
  if (static_cast<int>(running.size()) != horizon) {
    throw ValidationError("backward pass: dynamics and cost lengths differ");
  }
  BackwardPassResult out;
  out.gain.resize(horizon);
  out.feedforward.resize(horizon);
  out.covariance.resize(horizon);
  out.value.vx.resize(horizon + 1);
  out.value.vxx.resize(horizon + 1);
  out.value.qxu.resize(horizon);
  out.value.qxuxu.resize(horizon);

  Eigen::VectorXd vx = terminal.gradient;
  Eigen::MatrixXd vxx = terminal.hessian;
  out.value.vx[horizon] = vx;
  out.value.vxx[horizon] = vxx;

  for (int t = horizon - 1; t >= 0; --t) {
    const LinearDynamics& f = dynamics[t];
    const QuadExpansion& l = running[t];
    const int n = f.fx.cols();
    const int m = f.fu.cols();

    const Eigen::VectorXd vx_next = vx + vxx * f.fc;
    Eigen::MatrixXd fxu(f.fx.rows(), n + m);
    fxu << f.fx, f.fu;
    Eigen::VectorXd q = l.gradient + fxu.transpose() * vx_next;
    Eigen::MatrixXd qq = l.hessian + fxu.transpose() * vxx * fxu;
    qq = Symmetrize(qq);

    const Eigen::VectorXd qx = q.head(n);
    const Eigen::VectorXd qu = q.tail(m);
    const Eigen::MatrixXd qxx = qq.topLeftCorner(n, n);
    const Eigen::MatrixXd quu = qq.bottomRightCorner(m, m);
    const Eigen::MatrixXd qux = qq.bottomLeftCorner(m, n);

    const Eigen::MatrixXd quu_reg =
        quu + regularization * Eigen::MatrixXd::Identity(m, m);
    Eigen::LLT<Eigen::MatrixXd> llt(quu_reg);
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "Q_uu not positive definite at t=" << t << " (min eigenvalue "
          << Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(quu_reg)
                 .eigenvalues()
                 .minCoeff()
          << ", regularization " << regularization << ")";
      throw SolverFailure(msg.str());
    }
    const Eigen::MatrixXd k_gain = -llt.solve(qux);
    const Eigen::VectorXd k_ff = -llt.solve(qu);

    vx = qx + k_gain.transpose() * quu * k_ff + k_gain.transpose() * qu +
         qux.transpose() * k_ff;
    vxx = qxx + k_gain.transpose() * quu * k_gain + k_gain.transpose() * qux +
          qux.transpose() * k_gain;
    vxx = Symmetrize(vxx);

    out.expected_linear += k_ff.dot(qu);
    out.expected_quadratic += 0.5 * k_ff.dot(quu * k_ff);
    out.gain[t] = k_gain;
    out.feedforward[t] = k_ff;
    out.covariance[t] = Symmetrize(llt.solve(Eigen::MatrixXd::Identity(m, m)));
    out.value.vx[t] = vx;
    out.value.vxx[t] = vxx;
    out.value.qxu[t] = q;
    out.value.qxuxu[t] = qq;
  }
  return out;
}

// ----- rollouts ----- //

double TrajectoryCost(const Trajectory& trajectory, const CostFunction& cost) {
  double total = 0.0;
  const int horizon = trajectory.horizon();
  for (int t = 0; t < horizon; ++t) {
    total += cost.Running(t, trajectory.states[t], trajectory.actions[t]);
  }
  total += cost.Terminal(horizon, trajectory.states[horizon]);
  return total;
}

RolloutResult ForwardRollout(const SystemModel& model,
                             const LinGaussController& controller,
                             const Eigen::VectorXd& x0, double step,
                             const CostFunction& cost) {
  RolloutResult out;
  const int horizon = controller.horizon();
  Trajectory& traj = out.trajectory;
  traj.states.reserve(horizon + 1);
  traj.actions.reserve(horizon);
  traj.states.push_back(x0);
  try {
    for (int t = 0; t < horizon; ++t) {
      const Eigen::VectorXd& x = traj.states.back();
      Eigen::VectorXd u =
          controller.nominal.actions[t] + step * controller.feedforward[t] +
          controller.gain[t] * model.Difference(x, controller.nominal.states[t]);
      if (!u.allFinite()) throw SimulationDivergence("action", t);
      traj.states.push_back(model.Step(x, u));
      traj.actions.push_back(std::move(u));
    }
    traj.cost = TrajectoryCost(traj, cost);
    if (!std::isfinite(traj.cost)) throw Error("non-finite trajectory cost");
  } catch (const Error& e) {
    out.failure = e.what();
    return out;
  }
  out.ok = true;
  return out;
}

RolloutResult OpenLoopRollout(const SystemModel& model,
                              const std::vector<Eigen::VectorXd>& actions,
                              const Eigen::VectorXd& x0,
                              const CostFunction& cost) {
  RolloutResult out;
  Trajectory& traj = out.trajectory;
  traj.states.push_back(x0);
  try {
    for (const Eigen::VectorXd& u : actions) {
      traj.states.push_back(model.Step(traj.states.back(), u));
      traj.actions.push_back(u);
    }
    traj.cost = TrajectoryCost(traj, cost);
    if (!std::isfinite(traj.cost)) throw Error("non-finite trajectory cost");
  } catch (const Error& e) {
    out.failure = e.what();
    return out;
  }
  out.ok = true;
  return out;
}

std::vector<LinearDynamics> LinearizeTrajectory(const SystemModel& model,
                                                const Trajectory& nominal) {
  std::vector<LinearDynamics> out;
  out.reserve(nominal.horizon());
  for (int t = 0; t < nominal.horizon(); ++t) {
    out.push_back(model.Linearize(nominal.states[t], nominal.actions[t],
                                  &nominal.states[t + 1]));
  }
  return out;
}

std::vector<QuadExpansion> QuadratizeTrajectory(const SystemModel& model,
                                                const CostFunction& cost,
                                                const Trajectory& nominal,
                                                QuadExpansion* terminal) {
  std::vector<QuadExpansion> out;
  out.reserve(nominal.horizon());
  for (int t = 0; t < nominal.horizon(); ++t) {
    out.push_back(cost.QuadratizeRunning(t, nominal.states[t],
                                         nominal.actions[t], model));
  }
  if (terminal != nullptr) {
    *terminal = cost.QuadratizeTerminal(nominal.horizon(),
                                        nominal.states.back(), model);
  }
  return out;
}

// ----- iLQG ----- //

ILQGResult ILQGOptimize(const SystemModel& model, const CostFunction& cost,
                        const Eigen::VectorXd& x0,
                        const std::vector<Eigen::VectorXd>& initial_actions,
                        const ILQGOptions& options) {
  ILQGResult result;
  const int horizon = static_cast<int>(initial_actions.size());
  if (horizon < 1) throw ValidationError("iLQG horizon must be at least 1");

  RolloutResult initial = OpenLoopRollout(model, initial_actions, x0, cost);
  if (!initial.ok) {
    throw SolverFailure("initial rollout failed: " + initial.failure);
  }
  Trajectory nominal = std::move(initial.trajectory);
  result.cost_history.push_back(nominal.cost);

  double mu = 0.0;
  auto increase = [&] {
    mu = std::max(options.min_regularization,
                  mu * options.regularization_increase);
  };
  auto decrease = [&] {
    mu *= options.regularization_decrease;
    if (mu < options.min_regularization) mu = 0.0;
  };

  std::vector<LinearDynamics> dynamics;
  std::vector<QuadExpansion> running;
  QuadExpansion terminal;
  bool expanded = false;

  // backward pass with regularization increases until Q_uu is PD
  auto solve = [&](BackwardPassResult* out) -> bool {
    while (true) {
      try {
        *out = BackwardPass(dynamics, running, terminal, mu);
        return true;
      } catch (const SolverFailure& e) {
        increase();
        if (mu > options.max_regularization) {
          result.failed = true;
          result.failure = e.what();
          return false;
        }
      }
    }
  };

  LinGaussController candidate;
  candidate.nominal = nominal;
  BackwardPassResult bp;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (!expanded) {
      dynamics = LinearizeTrajectory(model, nominal);
      running = QuadratizeTrajectory(model, cost, nominal, &terminal);
      expanded = true;
    }
    if (!solve(&bp)) break;
    result.iterations = iter + 1;

    candidate.gain = bp.gain;
    candidate.feedforward = bp.feedforward;
    candidate.covariance = bp.covariance;
    candidate.nominal = nominal;

    bool accepted = false;
    double step = 1.0;
    for (int ls = 0; ls < options.line_search_steps; ++ls, step *= 0.5) {
      RolloutResult trial = ForwardRollout(model, candidate, x0, step, cost);
      if (trial.ok && trial.trajectory.cost < nominal.cost) {
        const double improvement =
            (nominal.cost - trial.trajectory.cost) /
            std::max(std::abs(nominal.cost), 1e-12);
        nominal = std::move(trial.trajectory);
        result.cost_history.push_back(nominal.cost);
        expanded = false;
        accepted = true;
        decrease();
        if (improvement < options.relative_tolerance) result.converged = true;
        break;
      }
    }
    if (result.converged) break;
    if (!accepted) {
      // no descent left along the Gauss-Newton direction
      if (std::abs(bp.expected_linear) <=
          options.relative_tolerance * std::max(std::abs(nominal.cost), 1e-12)) {
        result.converged = true;
        break;
      }
      increase();
      if (mu > options.max_regularization) {
        result.failure = "line search failed at maximum regularization";
        break;
      }
    }
  }

  // controller from a final backward pass around the returned nominal
  if (!expanded) {
    dynamics = LinearizeTrajectory(model, nominal);
    running = QuadratizeTrajectory(model, cost, nominal, &terminal);
  }
  result.controller.nominal = nominal;
  result.controller.dynamics = dynamics;
  result.final_regularization = mu;
  if (solve(&bp)) {
    result.controller.gain = bp.gain;
    result.controller.feedforward = bp.feedforward;
    result.controller.covariance = bp.covariance;
  } else {
    // best iterate with open-loop gains
    const int n = model.tangent_dim();
    const int m = model.action_dim();
    result.controller.gain.assign(horizon, Eigen::MatrixXd::Zero(m, n));
    result.controller.feedforward.assign(horizon, Eigen::VectorXd::Zero(m));
    result.controller.covariance.assign(horizon, Eigen::MatrixXd::Identity(m, m));
  }
  return result;
}

// ----- KL ----- //

double KlGaussians(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                   const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b) {
  const int d = mean_a.size();
  if (mean_b.size() != d || cov_a.rows() != d || cov_b.rows() != d) {
    throw ValidationError("KL: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt_b(cov_b);
  if (llt_b.info() != Eigen::Success) {
    throw ValidationError("KL: covariance B is not positive definite");
  }
  double log_det_a;
  try {
    log_det_a = LogDeterminantSpd(cov_a);
  } catch (const Error&) {
    throw ValidationError("KL: covariance A is not positive definite");
  }
  const double log_det_b =
      2.0 * llt_b.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Eigen::VectorXd diff = mean_b - mean_a;
  const double trace = llt_b.solve(cov_a).trace();
  const double mahalanobis = diff.dot(llt_b.solve(diff));
  return 0.5 * (trace + mahalanobis - d + log_det_b - log_det_a);
}

}  // namespace mpcgps
