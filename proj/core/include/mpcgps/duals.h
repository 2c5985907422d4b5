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

#ifndef MPCGPS_DUALS_H_
#define MPCGPS_DUALS_H_

#include <vector>

#include <Eigen/Core>

namespace mpcgps {

// Per-timestep dual variables of one trajectory distribution: the KL weight
// nu_t and the Lagrange multiplier lambda_t on the mean action. nu = 0 marks
// the policy terms as disabled (first iteration).
struct DualState {
  std::vector<double> nu;
  std::vector<Eigen::VectorXd> lambda;

  static DualState Zero(int horizon, int action_dim) {
    DualState d;
    d.nu.assign(horizon, 0.0);
    d.lambda.assign(horizon, Eigen::VectorXd::Zero(action_dim));
    return d;
  }

  int horizon() const { return static_cast<int>(nu.size()); }
};

}  // namespace mpcgps

#endif  // MPCGPS_DUALS_H_
