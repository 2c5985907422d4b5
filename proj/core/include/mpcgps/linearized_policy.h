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

#ifndef MPCGPS_LINEARIZED_POLICY_H_
#define MPCGPS_LINEARIZED_POLICY_H_

#include <vector>

#include <Eigen/Core>

namespace mpcgps {

// Coordinates in which state-conditional policy fits are expressed: the
// global chart for 13-dimensional quadrotor states, identity otherwise.
Eigen::VectorXd PolicyFeatures(const Eigen::VectorXd& x);

// Time-varying linear-Gaussian estimate of pi(u | x):
//   u ~ N(gain_t * PolicyFeatures(x) + bias_t, covariance_t).
struct LinearizedPolicy {
  std::vector<Eigen::MatrixXd> gain;
  std::vector<Eigen::VectorXd> bias;
  std::vector<Eigen::MatrixXd> covariance;

  int horizon() const { return static_cast<int>(gain.size()); }
  bool empty() const { return gain.empty(); }

  Eigen::VectorXd Mean(int t, const Eigen::VectorXd& x) const;
  double NegativeLogProbability(int t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u) const;
};

}  // namespace mpcgps

#endif  // MPCGPS_LINEARIZED_POLICY_H_
