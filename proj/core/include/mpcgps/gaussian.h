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

#ifndef MPCGPS_GAUSSIAN_H_
#define MPCGPS_GAUSSIAN_H_

#include <random>

#include <Eigen/Core>

namespace mpcgps {

// log det of a symmetric positive definite matrix; throws if not PD.
double LogDeterminantSpd(const Eigen::MatrixXd& a);

// -log N(residual; 0, covariance), including the normalization constant.
double GaussianNegativeLogDensity(const Eigen::VectorXd& residual,
                                  const Eigen::MatrixXd& covariance);

// Inverse of a symmetric positive definite matrix via Cholesky; throws if not
// PD. The result is symmetrized.
Eigen::MatrixXd InverseSpd(const Eigen::MatrixXd& a);

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& a);

// Clamp the eigenvalues of a symmetric matrix from below.
Eigen::MatrixXd ProjectEigenvalues(const Eigen::MatrixXd& a, double floor);

// Draw from N(mean, covariance); the covariance must be PSD.
Eigen::VectorXd SampleGaussian(const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& covariance,
                               std::mt19937_64& rng);

}  // namespace mpcgps

#endif  // MPCGPS_GAUSSIAN_H_
