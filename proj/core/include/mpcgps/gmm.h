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

#ifndef MPCGPS_GMM_H_
#define MPCGPS_GMM_H_

#include <vector>

#include <Eigen/Core>

namespace mpcgps {

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  int size() const { return static_cast<int>(weights.size()); }

  // EM initialized from contiguous blocks of the data in the given order.
  // Covariances receive + regularization * I.
  static GaussianMixture Fit(const std::vector<Eigen::VectorXd>& data,
                             int components, int max_iterations,
                             double tolerance, double regularization);

  // Posterior component probabilities of one point.
  Eigen::VectorXd Responsibilities(const Eigen::VectorXd& y) const;
  double LogLikelihood(const std::vector<Eigen::VectorXd>& data) const;

  // Moment-matched single Gaussian of the mixture reweighted by the mean
  // responsibilities of the given points.
  void PosteriorMoments(const std::vector<Eigen::VectorXd>& points,
                        Eigen::VectorXd* mean, Eigen::MatrixXd* covariance) const;
};

}  // namespace mpcgps

#endif  // MPCGPS_GMM_H_
