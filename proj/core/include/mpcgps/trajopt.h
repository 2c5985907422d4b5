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

#ifndef MPCGPS_TRAJOPT_H_
#define MPCGPS_TRAJOPT_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mpcgps/cost.h"
#include "mpcgps/dynamics.h"

namespace mpcgps {

// States x_0..x_T and actions u_0..u_{T-1}.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> actions;
  double cost = 0.0;

  int horizon() const { return static_cast<int>(actions.size()); }
};

// Time-varying linear-Gaussian controller around a nominal trajectory:
//   u_t ~ N(u_hat_t + k_t + K_t (x_t - x_hat_t), C_t)
// where x_t - x_hat_t is taken in the model's tangent chart.
struct LinGaussController {
  std::vector<Eigen::MatrixXd> gain;
  std::vector<Eigen::VectorXd> feedforward;
  std::vector<Eigen::MatrixXd> covariance;
  Trajectory nominal;
  // linearization along the nominal, when available
  std::vector<LinearDynamics> dynamics;

  int horizon() const { return static_cast<int>(gain.size()); }

  Eigen::VectorXd Mean(int t, const Eigen::VectorXd& x,
                       const SystemModel& model) const;
};

// 0.5 log |2 pi e C|
double ControllerEntropy(const Eigen::MatrixXd& covariance);

struct ValueExpansion {
  std::vector<Eigen::VectorXd> vx;        // t = 0..T
  std::vector<Eigen::MatrixXd> vxx;
  std::vector<Eigen::VectorXd> qxu;       // t = 0..T-1, over [dx; du]
  std::vector<Eigen::MatrixXd> qxuxu;
};

struct BackwardPassResult {
  std::vector<Eigen::MatrixXd> gain;
  std::vector<Eigen::VectorXd> feedforward;
  std::vector<Eigen::MatrixXd> covariance;  // regularized Q_uu^{-1}
  ValueExpansion value;
  // predicted cost change of a step of size a: a * linear + a^2 * quadratic
  double expected_linear = 0.0;
  double expected_quadratic = 0.0;

  double ExpectedChange(double step) const {
    return step * expected_linear + step * step * expected_quadratic;
  }
};

// Riccati-style recursion of the quadratic Q and value functions. Q_uu is
// regularized by + regularization * I; throws SolverFailure when that is not
// positive definite.
BackwardPassResult BackwardPass(const std::vector<LinearDynamics>& dynamics,
                                const std::vector<QuadExpansion>& running,
                                const QuadExpansion& terminal,
                                double regularization);

struct RolloutResult {
  Trajectory trajectory;
  bool ok = false;
  std::string failure;
};

// Deterministic rollout of the controller mean with the feedforward scaled by
// step. Divergence is reported, not thrown.
RolloutResult ForwardRollout(const SystemModel& model,
                             const LinGaussController& controller,
                             const Eigen::VectorXd& x0, double step,
                             const CostFunction& cost);

// Open-loop rollout of a fixed action sequence.
RolloutResult OpenLoopRollout(const SystemModel& model,
                              const std::vector<Eigen::VectorXd>& actions,
                              const Eigen::VectorXd& x0, const CostFunction& cost);

double TrajectoryCost(const Trajectory& trajectory, const CostFunction& cost);

struct ILQGOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-6;
  double min_regularization = 1e-6;
  double max_regularization = 1e10;
  double regularization_increase = 10.0;
  double regularization_decrease = 0.5;
  int line_search_steps = 11;  // step sizes 1, 1/2, ..., 2^-10
};

struct ILQGResult {
  LinGaussController controller;
  int iterations = 0;
  std::vector<double> cost_history;  // accepted nominal costs
  bool converged = false;
  bool failed = false;
  std::string failure;
  double final_regularization = 0.0;
};

// Iterative LQG from x0 over T steps starting from the given action sequence.
// Covariances of the result are Q_uu^{-1} of the final backward pass.
ILQGResult ILQGOptimize(const SystemModel& model, const CostFunction& cost,
                        const Eigen::VectorXd& x0,
                        const std::vector<Eigen::VectorXd>& initial_actions,
                        const ILQGOptions& options = {});

// Linearizations and cost expansions along a nominal trajectory.
std::vector<LinearDynamics> LinearizeTrajectory(const SystemModel& model,
                                                const Trajectory& nominal);
std::vector<QuadExpansion> QuadratizeTrajectory(const SystemModel& model,
                                                const CostFunction& cost,
                                                const Trajectory& nominal,
                                                QuadExpansion* terminal);

// KL(N(mean_a, cov_a) || N(mean_b, cov_b)); throws on non-PD covariances.
double KlGaussians(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                   const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b);

}  // namespace mpcgps

#endif  // MPCGPS_TRAJOPT_H_
