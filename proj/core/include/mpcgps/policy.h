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

#ifndef MPCGPS_POLICY_H_
#define MPCGPS_POLICY_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mpcgps/linearized_policy.h"
#include "mpcgps/mpc.h"

namespace mpcgps {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Conditionally Gaussian policy N(mu(o), sigma) with an MLP mean:
//   z = (o - input_mean) / input_scale
//   h_l = relu(W_l h_{l-1} + b_l) for hidden layers
//   mu = output_mean + output_scale * (W_L h_{L-1} + b_L)
class PolicyNet {
 public:
  // Observation -> 40 -> 40 -> action, all parameters zero.
  PolicyNet();
  // Zero-initialized network with the given layer widths (input first).
  explicit PolicyNet(const std::vector<int>& sizes);
  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  static PolicyNet Random(std::uint64_t seed,
                          const std::vector<int>& sizes = DefaultSizes());
  static std::vector<int> DefaultSizes();

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }

  Eigen::VectorXd Forward(const Eigen::VectorXd& observation) const;
  // columns are observations
  Eigen::MatrixXd ForwardBatch(const Eigen::MatrixXd& observations) const;
  // d mu / d o
  Eigen::MatrixXd InputJacobian(const Eigen::VectorXd& observation) const;

  // Gradient of sum_s grad_output_s' mu(o_s) with respect to the parameters,
  // given dL/dmu per column.
  Eigen::VectorXd ParameterGradient(const Eigen::MatrixXd& observations,
                                    const Eigen::MatrixXd& output_gradients) const;

  // Flattened layer parameters: per layer, weight (column-major) then bias.
  int num_parameters() const;
  Eigen::VectorXd Parameters() const;
  void SetParameters(const Eigen::VectorXd& theta);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;
  Eigen::VectorXd output_mean;
  Eigen::VectorXd output_scale;
  Eigen::MatrixXd covariance;
  bool normalization_frozen = false;

  // Per-dimension whitening of inputs and targets; scales are floored.
  void FitNormalization(const std::vector<Eigen::VectorXd>& observations,
                        const std::vector<Eigen::VectorXd>& targets);

  void Validate() const;

  void Save(std::ostream& out) const;
  void Save(const std::string& path) const;
  static PolicyNet Load(std::istream& in);
  static PolicyNet Load(const std::string& path);

 private:
  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
};

// One supervised sample: the local controller's mean and precision at the
// visited state, with the duals of its time step.
struct TrainingSample {
  int trajectory = 0;
  int sample = 0;
  int t = 0;
  Eigen::VectorXd state;
  Eigen::VectorXd observation;
  Eigen::MatrixXd gain;
  Eigen::VectorXd feedforward;
  Eigen::VectorXd target;     // local controller mean at the state
  Eigen::MatrixXd precision;  // inverse action covariance
  double nu = 0.0;
  Eigen::VectorXd lambda;
  double weight = 1.0;        // scale of the quadratic term
};

struct TrainingSet {
  std::vector<TrainingSample> samples;
  int num_distributions = 1;  // N

  void Validate() const;
  bool empty() const { return samples.empty(); }
};

// Mean over the batch of weight * 0.5 e' Q e + lambda' mu(o), e = mu(o) - target.
struct LossResult {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};
LossResult KlSupervisedLoss(const PolicyNet& net, const TrainingSet& set,
                            const std::vector<int>& batch);
double KlSupervisedLoss(const PolicyNet& net, const TrainingSet& set);

struct TrainOptions {
  int steps = 20000;
  int batch_size = 50;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int report_every = 1000;
};

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<std::pair<int, double>> progress;  // (step, full-set loss)
};

// Adam on the mean function. Throws Error if the loss becomes non-finite.
TrainReport Train(PolicyNet& net, const TrainingSet& set,
                  const TrainOptions& options,
                  const std::function<void(int, double)>& on_report = {});

// ((1/N) sum_{i,j} Q_tij)^{-1}, with the bracket averaged over the time steps
// present in the set.
Eigen::MatrixXd ClosedFormSigma(const TrainingSet& set);

// ----- linear-Gaussian fit of the policy ----- //

struct StateActionSample {
  int t = 0;
  Eigen::VectorXd state;
  Eigen::VectorXd action;
};

struct PolicyFitOptions {
  int mixture_components = 20;
  int em_iterations = 100;
  double em_tolerance = 1e-6;
  double regularization = 1e-6;
  double prior_strength = 1.0;  // pseudo-samples per time step
  int min_samples = 1;
};

// Per-step affine regression of action on PolicyFeatures(state) with a
// normal-inverse-Wishart prior from a mixture fitted on pooled samples. Steps
// with fewer than min_samples copy the nearest fitted step. The covariance is
// the conditional residual covariance plus policy_covariance.
LinearizedPolicy FitLinearizedPolicy(const std::vector<StateActionSample>& samples,
                                     int horizon,
                                     const Eigen::MatrixXd& policy_covariance,
                                     const PolicyFitOptions& options = {});

// Evaluates the net on the recorded observations of the rollouts.
LinearizedPolicy FitLinearizedPolicy(const PolicyNet& net,
                                     const std::vector<const RolloutRecord*>& rollouts,
                                     int horizon,
                                     const PolicyFitOptions& options = {});

}  // namespace mpcgps

#endif  // MPCGPS_POLICY_H_
