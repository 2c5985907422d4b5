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

#include "mpcgps/gaussian.h"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mpcgps/types.h"

namespace mpcgps {

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

double LogDeterminantSpd(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error("matrix is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double GaussianNegativeLogDensity(const Eigen::VectorXd& residual,
                                  const Eigen::MatrixXd& covariance) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw Error("covariance is not positive definite");
  }
  const Eigen::VectorXd white = llt.matrixL().solve(residual);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * white.squaredNorm() +
         0.5 * (log_det + residual.size() * std::log(2.0 * M_PI));
}

Eigen::MatrixXd InverseSpd(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error("matrix is not positive definite");
  }
  return Symmetrize(llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols())));
}

Eigen::MatrixXd ProjectEigenvalues(const Eigen::MatrixXd& a, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Symmetrize(a));
  if (eig.eigenvalues().minCoeff() >= floor) return Symmetrize(a);
  const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(floor);
  return Symmetrize(eig.eigenvectors() * values.asDiagonal() *
                    eig.eigenvectors().transpose());
}

Eigen::VectorXd SampleGaussian(const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& covariance,
                               std::mt19937_64& rng) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(covariance);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw Error("sampling covariance is not positive semidefinite");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(mean.size());
  for (int i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const Eigen::VectorXd w = ldlt.matrixL() * d.cwiseProduct(z);
  return mean + (ldlt.transpositionsP().transpose() * w);
}

}  // namespace mpcgps
