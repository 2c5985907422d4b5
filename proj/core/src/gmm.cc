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

#include "mpcgps/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "mpcgps/types.h"

namespace mpcgps {
namespace {

// log N(y; mean, L L') for a Cholesky factor L
double LogDensity(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                  const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::VectorXd white = llt.matrixL().solve(y - mean);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (white.squaredNorm() + log_det + y.size() * std::log(2.0 * M_PI));
}

double LogSumExp(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

std::vector<Eigen::LLT<Eigen::MatrixXd>> Factor(const GaussianMixture& g) {
  std::vector<Eigen::LLT<Eigen::MatrixXd>> out;
  out.reserve(g.size());
  for (const Eigen::MatrixXd& c : g.covariances) {
    out.emplace_back(c);
    if (out.back().info() != Eigen::Success) {
      throw Error("mixture covariance is not positive definite");
    }
  }
  return out;
}

Eigen::VectorXd LogJoint(const GaussianMixture& g,
                         const std::vector<Eigen::LLT<Eigen::MatrixXd>>& f,
                         const Eigen::VectorXd& y) {
  Eigen::VectorXd out(g.size());
  for (int k = 0; k < g.size(); ++k) {
    out(k) = g.weights[k] > 0.0
                 ? std::log(g.weights[k]) + LogDensity(y, g.means[k], f[k])
                 : -std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace

GaussianMixture GaussianMixture::Fit(const std::vector<Eigen::VectorXd>& data,
                                     int components, int max_iterations,
                                     double tolerance, double regularization) {
  const int n = static_cast<int>(data.size());
  if (n < 1) throw ValidationError("mixture fit needs data");
  const int d = data.front().size();
  const int k_count = std::max(1, std::min(components, n / 2));
  const Eigen::MatrixXd reg = regularization * Eigen::MatrixXd::Identity(d, d);

  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k_count);
  for (int k = 0; k < k_count; ++k) {
    const int lo = static_cast<int>(static_cast<long>(k) * n / k_count);
    const int hi = static_cast<int>(static_cast<long>(k + 1) * n / k_count);
    for (int i = lo; i < hi; ++i) resp(i, k) = 1.0;
  }

  GaussianMixture g;
  g.weights.assign(k_count, 0.0);
  g.means.assign(k_count, Eigen::VectorXd::Zero(d));
  g.covariances.assign(k_count, reg);

  double previous = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= max_iterations; ++iter) {
    // M step
    for (int k = 0; k < k_count; ++k) {
      const double mass = resp.col(k).sum();
      if (mass < 1e-10) {
        g.weights[k] = 0.0;
        continue;
      }
      g.weights[k] = mass / n;
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < n; ++i) mean += resp(i, k) * data[i];
      mean /= mass;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd e = data[i] - mean;
        cov.noalias() += resp(i, k) * e * e.transpose();
      }
      g.means[k] = mean;
      cov = 0.5 * (cov + cov.transpose()) / mass + reg;
      // grow the ridge until the factorization succeeds
      double jitter = std::max(regularization, 1e-12);
      while (Eigen::LLT<Eigen::MatrixXd>(cov).info() != Eigen::Success) {
        cov += jitter * Eigen::MatrixXd::Identity(d, d);
        jitter *= 10.0;
      }
      g.covariances[k] = cov;
    }
    if (iter == max_iterations) break;

    // E step
    const auto factors = Factor(g);
    double log_lik = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd lj = LogJoint(g, factors, data[i]);
      const double lse = LogSumExp(lj);
      log_lik += lse;
      resp.row(i) = (lj.array() - lse).exp().transpose();
    }
    if (std::abs(log_lik - previous) <= tolerance * std::abs(log_lik)) break;
    previous = log_lik;
  }
  return g;
}

Eigen::VectorXd GaussianMixture::Responsibilities(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd lj = LogJoint(*this, Factor(*this), y);
  return (lj.array() - LogSumExp(lj)).exp();
}

double GaussianMixture::LogLikelihood(const std::vector<Eigen::VectorXd>& data) const {
  const auto factors = Factor(*this);
  double total = 0.0;
  for (const Eigen::VectorXd& y : data) total += LogSumExp(LogJoint(*this, factors, y));
  return total;
}

void GaussianMixture::PosteriorMoments(const std::vector<Eigen::VectorXd>& points,
                                       Eigen::VectorXd* mean,
                                       Eigen::MatrixXd* covariance) const {
  const auto factors = Factor(*this);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(size());
  for (const Eigen::VectorXd& y : points) {
    const Eigen::VectorXd lj = LogJoint(*this, factors, y);
    w += (lj.array() - LogSumExp(lj)).exp().matrix();
  }
  if (w.sum() <= 0.0) w = Eigen::Map<const Eigen::VectorXd>(weights.data(), size());
  w /= w.sum();

  const int d = means.front().size();
  *mean = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < size(); ++k) *mean += w(k) * means[k];
  *covariance = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < size(); ++k) {
    const Eigen::VectorXd e = means[k] - *mean;
    *covariance += w(k) * (covariances[k] + e * e.transpose());
  }
}

}  // namespace mpcgps
