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

#ifndef MPCGPS_COST_H_
#define MPCGPS_COST_H_

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "mpcgps/duals.h"
#include "mpcgps/dynamics.h"
#include "mpcgps/environment.h"
#include "mpcgps/linearized_policy.h"
#include "mpcgps/types.h"

namespace mpcgps {

// Local quadratic model of a cost around a nominal (x, u), in deviation
// coordinates [dx; du]:  c + g' z + 0.5 z' H z.
struct QuadExpansion {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  double constant = 0.0;

  int state_dim = 0;  // tangent dimension of the state block

  Eigen::VectorXd lx() const { return gradient.head(state_dim); }
  Eigen::VectorXd lu() const {
    return gradient.tail(gradient.size() - state_dim);
  }
  Eigen::MatrixXd lxx() const {
    return hessian.topLeftCorner(state_dim, state_dim);
  }
  Eigen::MatrixXd luu() const {
    const int m = hessian.rows() - state_dim;
    return hessian.bottomRightCorner(m, m);
  }
  Eigen::MatrixXd lux() const {
    const int m = hessian.rows() - state_dim;
    return hessian.bottomLeftCorner(m, state_dim);
  }
};

struct QuadratizeOptions {
  double step = 1e-4;
  // eigenvalue floor applied to the action-action block
  double min_action_eigenvalue = 1e-9;
};

// Gradient and Hessian by central finite differences of
// f(dx, u) around (0, u0). The Hessian is symmetrized and its action block
// projected to be positive definite.
QuadExpansion Quadratize(
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& f,
    int tangent_dim, const Eigen::VectorXd& u0,
    const QuadratizeOptions& options = {});

// Time-indexed cost over a horizon of actions t = 0..T-1 and a terminal state
// at T. Quadratizations are taken in the tangent chart of the model.
class CostFunction {
 public:
  virtual ~CostFunction() = default;

  virtual double Running(int t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) const = 0;
  virtual double Terminal(int /*t*/, const Eigen::VectorXd& /*x*/) const {
    return 0.0;
  }

  virtual QuadExpansion QuadratizeRunning(int t, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u,
                                          const SystemModel& model) const;
  // Expansion over dx only (no action block).
  virtual QuadExpansion QuadratizeTerminal(int t, const Eigen::VectorXd& x,
                                           const SystemModel& model) const;
};

// ----- task cost ----- //

struct TaskTargets {
  Eigen::Vector3d velocity{2.0, 0.0, 0.0};  // m/s
  double height = 2.0;                      // m
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
  Action hover = Action::Zero();            // rad/s
  double safe_distance = 1.0;               // m

  void Validate() const;
};

struct CostWeights {
  double velocity = 1e3;
  double height = 500.0;
  double orientation = 1e4;
  double angular_velocity = 250.0;
  double action = 0.5;
  double obstacle = 1e4;
};

// Obstacle-avoidance flight cost; see Value.
class TaskCost : public CostFunction {
 public:
  TaskCost(TaskTargets targets, std::shared_ptr<const Environment> env,
           CostWeights weights = {});

  // w_v |v - v*|^2 + w_z (z - z*)^2 + w_q |q - q*|^2 + w_w |w - w*|^2
  //   + w_u |u - u_hover|^2 + w_o max(d_safe - signed_distance, 0)
  double Value(const State& state, const Action& action) const;
  // all terms except the obstacle hinge
  double SmoothValue(const State& state, const Action& action) const;
  double Hinge(const State& state) const;

  double Running(int t, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u) const override;
  // Finite differences on the smooth part; the active hinge contributes its
  // gradient and a Gauss-Newton curvature (w_o / d_safe) grad_d grad_d'.
  QuadExpansion QuadratizeRunning(int t, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u,
                                  const SystemModel& model) const override;

  const TaskTargets& targets() const { return targets_; }
  const CostWeights& weights() const { return weights_; }
  const Environment& environment() const { return *env_; }

 private:
  TaskTargets targets_;
  std::shared_ptr<const Environment> env_;
  CostWeights weights_;
};

// Gaussian over the tangent deviation from a chart state.
struct GaussianMarginal {
  Eigen::VectorXd chart;  // packed reference state
  Eigen::VectorXd mean;   // tangent deviation from chart
  Eigen::MatrixXd covariance;
};

// Running cost of the maximum-entropy offline problem:
//   (1/nu_t) l(x,u) - (1/nu_t) u' lambda_t - log pi(u|x).
// With no policy the last term is dropped.
class AugmentedOfflineCost : public CostFunction {
 public:
  AugmentedOfflineCost(std::shared_ptr<const CostFunction> task,
                       const LinearizedPolicy* policy, DualState duals);

  double Running(int t, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u) const override;
  QuadExpansion QuadratizeRunning(int t, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u,
                                  const SystemModel& model) const override;

 private:
  std::shared_ptr<const CostFunction> task_;
  const LinearizedPolicy* policy_;
  DualState duals_;
};

double AugmentedOfflineValue(const TaskCost& task, const State& state,
                             const Action& action,
                             const LinearizedPolicy* policy, int t, double nu,
                             const Eigen::VectorXd& lambda);

// MPC cost over a window starting at absolute time start_time. Window step k
// (0 <= k <= H) maps to absolute step start_time + k.
//   k >= 1:     -log p(x_k | x_start) under marginals[k - 1]
//   k <= H - 1: -nu log pi(u_k | x_k) - u_k' lambda
class SurrogateCost : public CostFunction {
 public:
  SurrogateCost(std::vector<GaussianMarginal> marginals,
                const LinearizedPolicy* policy, const DualState* duals,
                int start_time, std::shared_ptr<const SystemModel> model,
                double covariance_regularization = 1e-6);

  int horizon() const { return static_cast<int>(marginals_.size()); }

  double Running(int k, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u) const override;
  double Terminal(int k, const Eigen::VectorXd& x) const override;

  // Gauss-Newton expansion; exact in the residual coordinates.
  QuadExpansion QuadratizeRunning(int k, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u,
                                  const SystemModel& model) const override;
  QuadExpansion QuadratizeTerminal(int k, const Eigen::VectorXd& x,
                                   const SystemModel& model) const override;

  double MarginalTerm(int k, const Eigen::VectorXd& x) const;
  double PolicyTerm(int k, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u) const;

 private:
  struct Precomputed {
    Eigen::MatrixXd precision;
    double log_normalizer;
  };
  void AddMarginal(int k, const Eigen::VectorXd& x, const SystemModel& model,
                   QuadExpansion* q) const;

  std::vector<GaussianMarginal> marginals_;
  std::vector<Precomputed> pre_;
  const LinearizedPolicy* policy_;
  const DualState* duals_;
  int start_time_;
  std::shared_ptr<const SystemModel> model_;
};

// Adds nu * (-log pi(u | x)) with its Gauss-Newton expansion.
void AddPolicyExpansion(const LinearizedPolicy& policy, int t, double nu,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        const SystemModel& model, QuadExpansion* q);

}  // namespace mpcgps

#endif  // MPCGPS_COST_H_
