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

#include "mpcgps/cost.h"

#include <cmath>
#include <utility>

#include "mpcgps/gaussian.h"

namespace mpcgps {
namespace {

constexpr double kResidualJacobianStep = 1e-6;

// d Difference(Retract(x, e), chart) / d e at e = 0.
Eigen::MatrixXd ResidualJacobian(const SystemModel& model,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& chart) {
  const int n = model.tangent_dim();
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    delta(i) = kResidualJacobianStep;
    const Eigen::VectorXd plus = model.Difference(model.Retract(x, delta), chart);
    delta(i) = -kResidualJacobianStep;
    const Eigen::VectorXd minus = model.Difference(model.Retract(x, delta), chart);
    delta(i) = 0.0;
    jac.col(i) = (plus - minus) / (2.0 * kResidualJacobianStep);
  }
  return jac;
}

// d PolicyFeatures(Retract(x, e)) / d e at e = 0.
Eigen::MatrixXd FeatureJacobian(const SystemModel& model,
                                const Eigen::VectorXd& x) {
  const int n = model.tangent_dim();
  const Eigen::VectorXd f0 = PolicyFeatures(x);
  Eigen::MatrixXd jac(f0.size(), n);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    delta(i) = kResidualJacobianStep;
    const Eigen::VectorXd plus = PolicyFeatures(model.Retract(x, delta));
    delta(i) = -kResidualJacobianStep;
    const Eigen::VectorXd minus = PolicyFeatures(model.Retract(x, delta));
    delta(i) = 0.0;
    jac.col(i) = (plus - minus) / (2.0 * kResidualJacobianStep);
  }
  return jac;
}

QuadExpansion ZeroExpansion(int n, int m) {
  QuadExpansion q;
  q.state_dim = n;
  q.gradient = Eigen::VectorXd::Zero(n + m);
  q.hessian = Eigen::MatrixXd::Zero(n + m, n + m);
  return q;
}

}  // namespace

// ----- finite-difference expansion ----- //

QuadExpansion Quadratize(
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& f,
    int tangent_dim, const Eigen::VectorXd& u0, const QuadratizeOptions& options) {
  const int n = tangent_dim;
  const int m = u0.size();
  const int dim = n + m;
  const double h = options.step;
  auto eval = [&](const Eigen::VectorXd& z) {
    return f(z.head(n), u0 + z.tail(m));
  };

  QuadExpansion q;
  q.state_dim = n;
  q.gradient.resize(dim);
  q.hessian.resize(dim, dim);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
  const double f0 = eval(z);
  q.constant = f0;
  Eigen::VectorXd plus(dim), minus(dim);
  for (int i = 0; i < dim; ++i) {
    z(i) = h;
    plus(i) = eval(z);
    z(i) = -h;
    minus(i) = eval(z);
    z(i) = 0.0;
    q.gradient(i) = (plus(i) - minus(i)) / (2.0 * h);
    q.hessian(i, i) = (plus(i) - 2.0 * f0 + minus(i)) / (h * h);
  }
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      z(i) = h; z(j) = h;
      const double pp = eval(z);
      z(j) = -h;
      const double pm = eval(z);
      z(i) = -h;
      const double mm = eval(z);
      z(j) = h;
      const double mp = eval(z);
      z(i) = 0.0; z(j) = 0.0;
      const double hij = (pp - pm - mp + mm) / (4.0 * h * h);
      q.hessian(i, j) = hij;
      q.hessian(j, i) = hij;
    }
  }
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(q.gradient(i)) || !q.hessian.row(i).allFinite()) {
      throw Error("cost expansion produced non-finite derivatives");
    }
  }
  if (m > 0) {
    q.hessian.bottomRightCorner(m, m) = ProjectEigenvalues(
        q.hessian.bottomRightCorner(m, m), options.min_action_eigenvalue);
  }
  return q;
}

QuadExpansion CostFunction::QuadratizeRunning(int t, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& u,
                                              const SystemModel& model) const {
  return Quadratize(
      [&](const Eigen::VectorXd& dx, const Eigen::VectorXd& uu) {
        return Running(t, model.Retract(x, dx), uu);
      },
      model.tangent_dim(), u);
}

QuadExpansion CostFunction::QuadratizeTerminal(int t, const Eigen::VectorXd& x,
                                               const SystemModel& model) const {
  return Quadratize(
      [&](const Eigen::VectorXd& dx, const Eigen::VectorXd&) {
        return Terminal(t, model.Retract(x, dx));
      },
      model.tangent_dim(), Eigen::VectorXd(0));
}

// ----- task cost ----- //

void TaskTargets::Validate() const {
  if (!(safe_distance > 0.0)) {
    throw ValidationError("safe distance must be positive");
  }
  if (std::abs(orientation.norm() - 1.0) > 1e-9) {
    throw ValidationError("target orientation must be a unit quaternion");
  }
}

TaskCost::TaskCost(TaskTargets targets, std::shared_ptr<const Environment> env,
                   CostWeights weights)
    : targets_(std::move(targets)), env_(std::move(env)), weights_(weights) {
  targets_.Validate();
  if (!env_) env_ = std::make_shared<const Environment>();
}

double TaskCost::SmoothValue(const State& s, const Action& u) const {
  Eigen::Vector4d q(s.orientation.w(), s.orientation.x(), s.orientation.y(),
                    s.orientation.z());
  const Eigen::Vector4d q_target(targets_.orientation.w(), targets_.orientation.x(),
                                 targets_.orientation.y(), targets_.orientation.z());
  if (q.dot(q_target) < 0.0) q = -q;
  const double dz = s.position.z() - targets_.height;
  return weights_.velocity * (s.velocity - targets_.velocity).squaredNorm() +
         weights_.height * dz * dz +
         weights_.orientation * (q - q_target).squaredNorm() +
         weights_.angular_velocity *
             (s.angular_velocity - targets_.angular_velocity).squaredNorm() +
         weights_.action * (u - targets_.hover).squaredNorm();
}

double TaskCost::Hinge(const State& s) const {
  const double d = SignedDistance(*env_, s.position);
  return weights_.obstacle * std::max(targets_.safe_distance - d, 0.0);
}

double TaskCost::Value(const State& s, const Action& u) const {
  return SmoothValue(s, u) + Hinge(s);
}

double TaskCost::Running(int, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) const {
  return Value(State::FromVector(x), Action(u));
}

QuadExpansion TaskCost::QuadratizeRunning(int, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u,
                                          const SystemModel& model) const {
  QuadExpansion q = Quadratize(
      [&](const Eigen::VectorXd& dx, const Eigen::VectorXd& uu) {
        return SmoothValue(State::FromVector(model.Retract(x, dx)), Action(uu));
      },
      model.tangent_dim(), u);

  const State s = State::FromVector(x);
  const double d = SignedDistance(*env_, s.position);
  if (d < targets_.safe_distance) {
    constexpr double h = 1e-4;
    Eigen::Vector3d grad;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d p = s.position;
      p(i) += h;
      const double plus = SignedDistance(*env_, p);
      p(i) -= 2.0 * h;
      const double minus = SignedDistance(*env_, p);
      grad(i) = (plus - minus) / (2.0 * h);
    }
    q.constant += weights_.obstacle * (targets_.safe_distance - d);
    q.gradient.head<3>() -= weights_.obstacle * grad;
    q.hessian.topLeftCorner<3, 3>() +=
        (weights_.obstacle / targets_.safe_distance) * grad * grad.transpose();
  }
  return q;
}

// ----- policy term ----- //

void AddPolicyExpansion(const LinearizedPolicy& policy, int t, double nu,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        const SystemModel& model, QuadExpansion* q) {
  if (nu == 0.0 || t >= policy.horizon()) return;
  const int n = model.tangent_dim();
  const int m = u.size();
  const Eigen::MatrixXd precision = InverseSpd(policy.covariance[t]);
  const Eigen::VectorXd e = u - policy.Mean(t, x);
  Eigen::MatrixXd de(m, n + m);
  de.leftCols(n) = -policy.gain[t] * FeatureJacobian(model, x);
  de.rightCols(m).setIdentity();
  q->gradient += nu * de.transpose() * precision * e;
  q->hessian += nu * de.transpose() * precision * de;
  q->constant += nu * policy.NegativeLogProbability(t, x, u);
}

// ----- augmented offline cost ----- //

AugmentedOfflineCost::AugmentedOfflineCost(
    std::shared_ptr<const CostFunction> task, const LinearizedPolicy* policy,
    DualState duals)
    : task_(std::move(task)), policy_(policy), duals_(std::move(duals)) {
  for (double nu : duals_.nu) {
    if (!(nu > 0.0)) {
      throw ValidationError("offline objective requires nu_t > 0");
    }
  }
}

double AugmentedOfflineCost::Running(int t, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u) const {
  const double inv_nu = 1.0 / duals_.nu.at(t);
  double value = inv_nu * task_->Running(t, x, u) -
                 inv_nu * u.dot(duals_.lambda.at(t));
  if (policy_ != nullptr && t < policy_->horizon()) {
    value += policy_->NegativeLogProbability(t, x, u);
  }
  return value;
}

QuadExpansion AugmentedOfflineCost::QuadratizeRunning(
    int t, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
    const SystemModel& model) const {
  const double inv_nu = 1.0 / duals_.nu.at(t);
  QuadExpansion q = task_->QuadratizeRunning(t, x, u, model);
  q.gradient *= inv_nu;
  q.hessian *= inv_nu;
  q.constant *= inv_nu;
  const Eigen::VectorXd& lambda = duals_.lambda.at(t);
  q.gradient.tail(u.size()) -= inv_nu * lambda;
  q.constant -= inv_nu * u.dot(lambda);
  if (policy_ != nullptr) AddPolicyExpansion(*policy_, t, 1.0, x, u, model, &q);
  return q;
}

double AugmentedOfflineValue(const TaskCost& task, const State& state,
                             const Action& action,
                             const LinearizedPolicy* policy, int t, double nu,
                             const Eigen::VectorXd& lambda) {
  if (!(nu > 0.0)) throw ValidationError("offline objective requires nu_t > 0");
  double value = (task.Value(state, action) - action.dot(lambda)) / nu;
  if (policy != nullptr && t < policy->horizon()) {
    value += policy->NegativeLogProbability(t, state.ToVector(), action);
  }
  return value;
}

// ----- surrogate cost ----- //

SurrogateCost::SurrogateCost(std::vector<GaussianMarginal> marginals,
                             const LinearizedPolicy* policy,
                             const DualState* duals, int start_time,
                             std::shared_ptr<const SystemModel> model,
                             double covariance_regularization)
    : marginals_(std::move(marginals)),
      policy_(policy),
      duals_(duals),
      start_time_(start_time),
      model_(std::move(model)) {
  pre_.reserve(marginals_.size());
  for (const GaussianMarginal& g : marginals_) {
    const int n = g.covariance.rows();
    const Eigen::MatrixXd reg =
        Symmetrize(g.covariance) +
        covariance_regularization * Eigen::MatrixXd::Identity(n, n);
    pre_.push_back({InverseSpd(reg),
                    0.5 * (LogDeterminantSpd(reg) + n * std::log(2.0 * M_PI))});
  }
}

double SurrogateCost::MarginalTerm(int k, const Eigen::VectorXd& x) const {
  if (k < 1 || k > horizon()) return 0.0;
  const GaussianMarginal& g = marginals_[k - 1];
  const Eigen::VectorXd r = model_->Difference(x, g.chart) - g.mean;
  return 0.5 * r.dot(pre_[k - 1].precision * r) + pre_[k - 1].log_normalizer;
}

double SurrogateCost::PolicyTerm(int k, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u) const {
  if (k >= horizon()) return 0.0;
  const int t = start_time_ + k;
  double value = 0.0;
  if (duals_ != nullptr && t < duals_->horizon()) {
    const double nu = duals_->nu[t];
    if (policy_ != nullptr && nu != 0.0 && t < policy_->horizon()) {
      value += nu * policy_->NegativeLogProbability(t, x, u);
    }
    value -= u.dot(duals_->lambda[t]);
  }
  return value;
}

double SurrogateCost::Running(int k, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u) const {
  return MarginalTerm(k, x) + PolicyTerm(k, x, u);
}

double SurrogateCost::Terminal(int k, const Eigen::VectorXd& x) const {
  return MarginalTerm(k, x);
}

void SurrogateCost::AddMarginal(int k, const Eigen::VectorXd& x,
                                const SystemModel& model,
                                QuadExpansion* q) const {
  if (k < 1 || k > horizon()) return;
  const GaussianMarginal& g = marginals_[k - 1];
  const Eigen::MatrixXd& precision = pre_[k - 1].precision;
  const int n = model.tangent_dim();
  const Eigen::VectorXd r = model.Difference(x, g.chart) - g.mean;
  const Eigen::MatrixXd jac = ResidualJacobian(model, x, g.chart);
  q->gradient.head(n) += jac.transpose() * precision * r;
  q->hessian.topLeftCorner(n, n) += jac.transpose() * precision * jac;
  q->constant += 0.5 * r.dot(precision * r) + pre_[k - 1].log_normalizer;
}

QuadExpansion SurrogateCost::QuadratizeRunning(int k, const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& u,
                                               const SystemModel& model) const {
  const int n = model.tangent_dim();
  const int m = u.size();
  QuadExpansion q = ZeroExpansion(n, m);
  AddMarginal(k, x, model, &q);
  const int t = start_time_ + k;
  if (k < horizon() && duals_ != nullptr && t < duals_->horizon()) {
    if (policy_ != nullptr) {
      AddPolicyExpansion(*policy_, t, duals_->nu[t], x, u, model, &q);
    }
    q.gradient.tail(m) -= duals_->lambda[t];
    q.constant -= u.dot(duals_->lambda[t]);
  }
  return q;
}

QuadExpansion SurrogateCost::QuadratizeTerminal(int k, const Eigen::VectorXd& x,
                                                const SystemModel& model) const {
  QuadExpansion q = ZeroExpansion(model.tangent_dim(), 0);
  AddMarginal(k, x, model, &q);
  return q;
}

}  // namespace mpcgps
