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

#include "mpcgps/policy.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

#include "mpcgps/gaussian.h"
#include "mpcgps/gmm.h"
#include "mpcgps/types.h"

namespace mpcgps {

// ----- linearized policy ----- //

Eigen::VectorXd PolicyFeatures(const Eigen::VectorXd& x) {
  if (x.size() == kStateDim) return GlobalCoordinates(State::FromVector(x));
  return x;
}

Eigen::VectorXd LinearizedPolicy::Mean(int t, const Eigen::VectorXd& x) const {
  return gain.at(t) * PolicyFeatures(x) + bias.at(t);
}

double LinearizedPolicy::NegativeLogProbability(int t, const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& u) const {
  return GaussianNegativeLogDensity(u - Mean(t, x), covariance.at(t));
}

// ----- network ----- //

namespace {

constexpr char kMagic[8] = {'M', 'P', 'C', 'G', 'P', 'S', 'N', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd output;
};

}  // namespace

std::vector<int> PolicyNet::DefaultSizes() {
  return {kObservationDim, 40, 40, kActionDim};
}

PolicyNet::PolicyNet() : PolicyNet(DefaultSizes()) {}

PolicyNet::PolicyNet(const std::vector<int>& sizes) : sizes_(sizes) {
  if (sizes_.size() < 2) throw ValidationError("network needs at least one layer");
  for (int s : sizes_) {
    if (s < 1) throw ValidationError("layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]),
                       Eigen::VectorXd::Zero(sizes_[l + 1])});
  }
  input_mean = Eigen::VectorXd::Zero(input_dim());
  input_scale = Eigen::VectorXd::Ones(input_dim());
  output_mean = Eigen::VectorXd::Zero(output_dim());
  output_scale = Eigen::VectorXd::Ones(output_dim());
  covariance = Eigen::MatrixXd::Identity(output_dim(), output_dim());
}

PolicyNet PolicyNet::Random(std::uint64_t seed, const std::vector<int>& sizes) {
  PolicyNet net(sizes);
  std::mt19937_64 rng(seed);
  for (DenseLayer& layer : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (int j = 0; j < layer.weight.cols(); ++j) {
      for (int i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = uniform(rng);
    }
  }
  return net;
}

static ForwardCache Run(const PolicyNet& net, const Eigen::MatrixXd& obs) {
  if (obs.rows() != net.input_dim()) {
    throw ValidationError("observation dimension " + std::to_string(obs.rows()) +
                          " does not match network input " +
                          std::to_string(net.input_dim()));
  }
  ForwardCache c;
  Eigen::MatrixXd h = (obs.colwise() - net.input_mean).array().colwise() /
                      net.input_scale.array();
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    c.inputs.push_back(h);
    Eigen::MatrixXd a = layers[l].weight * h;
    a.colwise() += layers[l].bias;
    c.pre.push_back(a);
    h = (l + 1 < layers.size()) ? Eigen::MatrixXd(a.cwiseMax(0.0)) : a;
  }
  c.output = (h.array().colwise() * net.output_scale.array()).matrix();
  c.output.colwise() += net.output_mean;
  return c;
}

Eigen::VectorXd PolicyNet::Forward(const Eigen::VectorXd& observation) const {
  return Run(*this, observation).output.col(0);
}

Eigen::MatrixXd PolicyNet::ForwardBatch(const Eigen::MatrixXd& observations) const {
  return Run(*this, observations).output;
}

Eigen::MatrixXd PolicyNet::InputJacobian(const Eigen::VectorXd& observation) const {
  const ForwardCache c = Run(*this, observation);
  Eigen::MatrixXd jac = output_scale.asDiagonal() * layers_.back().weight;
  for (int l = static_cast<int>(layers_.size()) - 2; l >= 0; --l) {
    const Eigen::VectorXd active =
        (c.pre[l].col(0).array() > 0.0).cast<double>().matrix();
    jac = jac * active.asDiagonal() * layers_[l].weight;
  }
  return jac * input_scale.cwiseInverse().asDiagonal();
}

int PolicyNet::num_parameters() const {
  int n = 0;
  for (const DenseLayer& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::VectorXd PolicyNet::Parameters() const {
  Eigen::VectorXd theta(num_parameters());
  int offset = 0;
  for (const DenseLayer& l : layers_) {
    theta.segment(offset, l.weight.size()) =
        Eigen::Map<const Eigen::VectorXd>(l.weight.data(), l.weight.size());
    offset += l.weight.size();
    theta.segment(offset, l.bias.size()) = l.bias;
    offset += l.bias.size();
  }
  return theta;
}

void PolicyNet::SetParameters(const Eigen::VectorXd& theta) {
  if (theta.size() != num_parameters()) {
    throw ValidationError("parameter vector has the wrong size");
  }
  int offset = 0;
  for (DenseLayer& l : layers_) {
    Eigen::Map<Eigen::VectorXd>(l.weight.data(), l.weight.size()) =
        theta.segment(offset, l.weight.size());
    offset += l.weight.size();
    l.bias = theta.segment(offset, l.bias.size());
    offset += l.bias.size();
  }
}

Eigen::VectorXd PolicyNet::ParameterGradient(
    const Eigen::MatrixXd& observations,
    const Eigen::MatrixXd& output_gradients) const {
  const ForwardCache c = Run(*this, observations);
  Eigen::VectorXd grad(num_parameters());
  std::vector<int> offsets;
  int offset = 0;
  for (const DenseLayer& l : layers_) {
    offsets.push_back(offset);
    offset += l.weight.size() + l.bias.size();
  }
  Eigen::MatrixXd g =
      (output_gradients.array().colwise() * output_scale.array()).matrix();
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const DenseLayer& layer = layers_[l];
    const Eigen::MatrixXd dw = g * c.inputs[l].transpose();
    grad.segment(offsets[l], dw.size()) =
        Eigen::Map<const Eigen::VectorXd>(dw.data(), dw.size());
    grad.segment(offsets[l] + dw.size(), layer.bias.size()) = g.rowwise().sum();
    if (l > 0) {
      g = (layer.weight.transpose() * g).cwiseProduct(
          (c.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grad;
}

void PolicyNet::FitNormalization(const std::vector<Eigen::VectorXd>& observations,
                                 const std::vector<Eigen::VectorXd>& targets) {
  auto stats = [](const std::vector<Eigen::VectorXd>& v, double floor,
                  Eigen::VectorXd* mean, Eigen::VectorXd* scale) {
    const double n = static_cast<double>(v.size());
    *mean = Eigen::VectorXd::Zero(v.front().size());
    for (const auto& x : v) *mean += x;
    *mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(mean->size());
    for (const auto& x : v) var += (x - *mean).cwiseAbs2();
    *scale = (var / n).cwiseSqrt().cwiseMax(floor);
  };
  if (observations.empty() || targets.empty()) {
    throw ValidationError("normalization needs samples");
  }
  stats(observations, 0.1, &input_mean, &input_scale);
  stats(targets, 1.0, &output_mean, &output_scale);
  normalization_frozen = true;
}

void PolicyNet::Validate() const {
  const int in = input_dim();
  const int out = output_dim();
  if (input_mean.size() != in || input_scale.size() != in ||
      output_mean.size() != out || output_scale.size() != out ||
      covariance.rows() != out || covariance.cols() != out) {
    throw ValidationError("network normalization dimensions are inconsistent");
  }
  if ((input_scale.array() <= 0.0).any() || (output_scale.array() <= 0.0).any()) {
    throw ValidationError("normalization scales must be positive");
  }
  for (const DenseLayer& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw ValidationError("network weights are not finite");
    }
  }
  if (!input_mean.allFinite() || !output_mean.allFinite() ||
      !input_scale.allFinite() || !output_scale.allFinite()) {
    throw ValidationError("normalization statistics are not finite");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (!covariance.allFinite() || (covariance - covariance.transpose()).norm() > 1e-9 ||
      llt.info() != Eigen::Success) {
    throw ValidationError("policy covariance is not symmetric positive definite");
  }
}

// ----- checkpoint format ----- //
//
// little-endian:
//   char[8] "MPCGPSNN", u32 version, u32 layer count L, u32 widths[L + 1]
//   per layer: f64 weight (row-major), f64 bias
//   f64 input_mean, input_scale, output_mean, output_scale
//   f64 covariance (row-major), u8 normalization_frozen

namespace {

void PutU32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void PutF64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void PutMatrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) PutF64(out, m(i, j));
  }
}

void Need(std::istream& in, const char* what) {
  if (!in) throw ValidationError(std::string("corrupt checkpoint: truncated ") + what);
}

std::uint32_t GetU32(std::istream& in, const char* what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  Need(in, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double GetF64(std::istream& in, const char* what) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  Need(in, what);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void GetMatrix(std::istream& in, Eigen::MatrixXd* m, const char* what) {
  for (int i = 0; i < m->rows(); ++i) {
    for (int j = 0; j < m->cols(); ++j) (*m)(i, j) = GetF64(in, what);
  }
}

void GetVector(std::istream& in, Eigen::VectorXd* v, const char* what) {
  for (int i = 0; i < v->size(); ++i) (*v)(i) = GetF64(in, what);
}

}  // namespace

void PolicyNet::Save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  PutU32(out, kFormatVersion);
  PutU32(out, static_cast<std::uint32_t>(layers_.size()));
  for (int s : sizes_) PutU32(out, static_cast<std::uint32_t>(s));
  for (const DenseLayer& l : layers_) {
    PutMatrix(out, l.weight);
    PutMatrix(out, l.bias);
  }
  PutMatrix(out, input_mean);
  PutMatrix(out, input_scale);
  PutMatrix(out, output_mean);
  PutMatrix(out, output_scale);
  PutMatrix(out, covariance);
  const char frozen = normalization_frozen ? 1 : 0;
  out.write(&frozen, 1);
  if (!out) throw Error("failed to write policy checkpoint");
}

void PolicyNet::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  Save(out);
}

PolicyNet PolicyNet::Load(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  Need(in, "header");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ValidationError("corrupt checkpoint: bad magic");
  }
  const std::uint32_t version = GetU32(in, "header");
  if (version != kFormatVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = GetU32(in, "header");
  if (count < 1 || count > 64) {
    throw ValidationError("corrupt checkpoint: layer count " + std::to_string(count));
  }
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i <= count; ++i) {
    const std::uint32_t s = GetU32(in, "layer widths");
    if (s < 1 || s > 100000) {
      throw ValidationError("corrupt checkpoint: layer width " + std::to_string(s));
    }
    sizes.push_back(static_cast<int>(s));
  }
  PolicyNet net(sizes);
  for (DenseLayer& l : net.layers_) {
    GetMatrix(in, &l.weight, "weights");
    GetVector(in, &l.bias, "biases");
  }
  GetVector(in, &net.input_mean, "normalization");
  GetVector(in, &net.input_scale, "normalization");
  GetVector(in, &net.output_mean, "normalization");
  GetVector(in, &net.output_scale, "normalization");
  GetMatrix(in, &net.covariance, "covariance");
  char frozen = 0;
  in.read(&frozen, 1);
  Need(in, "flags");
  if (frozen != 0 && frozen != 1) throw ValidationError("corrupt checkpoint: flags");
  net.normalization_frozen = frozen == 1;
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ValidationError("corrupt checkpoint: trailing bytes");
  }
  net.Validate();
  return net;
}

PolicyNet PolicyNet::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path);
  return Load(in);
}

// ----- supervised objective ----- //

void TrainingSet::Validate() const {
  if (num_distributions < 1) throw ValidationError("training set needs N >= 1");
  for (const TrainingSample& s : samples) {
    if (s.trajectory < 0 || s.trajectory >= num_distributions || s.t < 0) {
      throw ValidationError("training sample index out of bounds");
    }
    if (s.target.size() != s.precision.rows() ||
        s.lambda.size() != s.target.size()) {
      throw ValidationError("training sample dimensions are inconsistent");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s.precision);
    if (llt.info() != Eigen::Success) {
      throw ValidationError("training precision is not positive definite");
    }
  }
}

LossResult KlSupervisedLoss(const PolicyNet& net, const TrainingSet& set,
                            const std::vector<int>& batch) {
  if (batch.empty()) throw ValidationError("empty training batch");
  const int b = static_cast<int>(batch.size());
  Eigen::MatrixXd obs(net.input_dim(), b);
  for (int k = 0; k < b; ++k) obs.col(k) = set.samples[batch[k]].observation;
  const Eigen::MatrixXd mu = net.ForwardBatch(obs);

  LossResult out;
  Eigen::MatrixXd dmu(net.output_dim(), b);
  for (int k = 0; k < b; ++k) {
    const TrainingSample& s = set.samples[batch[k]];
    const Eigen::VectorXd e = mu.col(k) - s.target;
    const Eigen::VectorXd qe = s.precision * e;
    out.loss += s.weight * 0.5 * e.dot(qe) + s.lambda.dot(mu.col(k));
    dmu.col(k) = s.weight * qe + s.lambda;
  }
  out.loss /= b;
  dmu /= b;
  out.gradient = net.ParameterGradient(obs, dmu);
  return out;
}

double KlSupervisedLoss(const PolicyNet& net, const TrainingSet& set) {
  std::vector<int> all(set.samples.size());
  std::iota(all.begin(), all.end(), 0);
  const int b = static_cast<int>(all.size());
  Eigen::MatrixXd obs(net.input_dim(), b);
  for (int k = 0; k < b; ++k) obs.col(k) = set.samples[k].observation;
  const Eigen::MatrixXd mu = net.ForwardBatch(obs);
  double loss = 0.0;
  for (int k = 0; k < b; ++k) {
    const TrainingSample& s = set.samples[k];
    const Eigen::VectorXd e = mu.col(k) - s.target;
    loss += s.weight * 0.5 * e.dot(s.precision * e) + s.lambda.dot(mu.col(k));
  }
  return loss / b;
}

TrainReport Train(PolicyNet& net, const TrainingSet& set,
                  const TrainOptions& options,
                  const std::function<void(int, double)>& on_report) {
  if (set.empty()) throw ValidationError("training set is empty");
  if (options.batch_size < 1 || options.steps < 0) {
    throw ValidationError("invalid training options");
  }
  const int n = static_cast<int>(set.samples.size());
  std::mt19937_64 rng(options.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  int cursor = 0;

  TrainReport report;
  report.initial_loss = KlSupervisedLoss(net, set);
  Eigen::VectorXd theta = net.Parameters();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
  const int batch_size = std::min(options.batch_size, n);
  std::vector<int> batch(batch_size);
  double b1_power = 1.0;
  double b2_power = 1.0;

  for (int step = 1; step <= options.steps; ++step) {
    if (cursor + batch_size > n) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    std::copy(order.begin() + cursor, order.begin() + cursor + batch_size,
              batch.begin());
    cursor += batch_size;

    const LossResult r = KlSupervisedLoss(net, set, batch);
    if (!std::isfinite(r.loss) || !r.gradient.allFinite()) {
      std::ostringstream msg;
      msg << "policy training diverged at step " << step << " (batch loss "
          << r.loss << ", gradient norm " << r.gradient.norm() << ")";
      throw Error(msg.str());
    }
    b1_power *= options.beta1;
    b2_power *= options.beta2;
    m1 = options.beta1 * m1 + (1.0 - options.beta1) * r.gradient;
    m2 = options.beta2 * m2 + (1.0 - options.beta2) * r.gradient.cwiseAbs2();
    const Eigen::VectorXd m1_hat = m1 / (1.0 - b1_power);
    const Eigen::VectorXd m2_hat = m2 / (1.0 - b2_power);
    theta.array() -= options.learning_rate * m1_hat.array() /
                     (m2_hat.array().sqrt() + options.epsilon);
    net.SetParameters(theta);

    if (options.report_every > 0 && step % options.report_every == 0) {
      const double loss = KlSupervisedLoss(net, set);
      report.progress.emplace_back(step, loss);
      if (on_report) on_report(step, loss);
    }
  }
  report.final_loss = KlSupervisedLoss(net, set);
  if (!std::isfinite(report.final_loss)) throw Error("policy training loss is not finite");
  return report;
}

Eigen::MatrixXd ClosedFormSigma(const TrainingSet& set) {
  if (set.empty()) throw ValidationError("closed-form covariance needs samples");
  std::map<int, Eigen::MatrixXd> per_step;
  for (const TrainingSample& s : set.samples) {
    auto it = per_step.find(s.t);
    if (it == per_step.end()) {
      per_step.emplace(s.t, s.precision);
    } else {
      it->second += s.precision;
    }
  }
  const int m = set.samples.front().precision.rows();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(m, m);
  for (const auto& [t, sum] : per_step) mean += sum / set.num_distributions;
  mean /= static_cast<double>(per_step.size());
  mean = Symmetrize(mean);
  Eigen::LLT<Eigen::MatrixXd> llt(mean);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("summed precision is singular");
  }
  return Symmetrize(llt.solve(Eigen::MatrixXd::Identity(m, m)));
}

// ----- linear-Gaussian policy fit ----- //

LinearizedPolicy FitLinearizedPolicy(const std::vector<StateActionSample>& samples,
                                     int horizon,
                                     const Eigen::MatrixXd& policy_covariance,
                                     const PolicyFitOptions& options) {
  if (horizon < 1) throw ValidationError("policy fit horizon must be >= 1");
  if (samples.empty()) throw Error("policy fit: no samples");

  std::vector<std::vector<Eigen::VectorXd>> by_step(horizon);
  std::vector<Eigen::VectorXd> pooled;
  int p = -1;
  int m = -1;
  std::vector<const StateActionSample*> sorted;
  for (const StateActionSample& s : samples) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto* a, const auto* b) { return a->t < b->t; });
  for (const StateActionSample* s : sorted) {
    if (s->t < 0 || s->t >= horizon) continue;
    const Eigen::VectorXd f = PolicyFeatures(s->state);
    p = f.size();
    m = s->action.size();
    Eigen::VectorXd y(p + m);
    y << f, s->action;
    by_step[s->t].push_back(y);
    pooled.push_back(std::move(y));
  }
  if (pooled.empty()) throw Error("policy fit: no samples inside the horizon");

  // fit in per-dimension standardized coordinates
  Eigen::VectorXd center = Eigen::VectorXd::Zero(p + m);
  for (const auto& y : pooled) center += y;
  center /= static_cast<double>(pooled.size());
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(p + m);
  for (const auto& y : pooled) scale += (y - center).cwiseAbs2();
  scale = (scale / static_cast<double>(pooled.size())).cwiseSqrt();
  for (int d = 0; d < scale.size(); ++d) {
    if (!(scale(d) > 1e-12)) scale(d) = 1.0;
  }
  auto standardize = [&](Eigen::VectorXd& y) {
    y = (y - center).cwiseQuotient(scale);
  };
  for (auto& y : pooled) standardize(y);
  for (auto& step : by_step) {
    for (auto& y : step) standardize(y);
  }

  const GaussianMixture prior =
      GaussianMixture::Fit(pooled, options.mixture_components,
                           options.em_iterations, options.em_tolerance,
                           options.regularization);

  const Eigen::VectorXd f_scale = scale.head(p);
  const Eigen::VectorXd u_scale = scale.tail(m);
  LinearizedPolicy out;
  out.gain.resize(horizon);
  out.bias.resize(horizon);
  out.covariance.resize(horizon);
  std::vector<bool> fitted(horizon, false);
  const double m0 = options.prior_strength;
  for (int t = 0; t < horizon; ++t) {
    const auto& ys = by_step[t];
    const int n = static_cast<int>(ys.size());
    if (n < std::max(1, options.min_samples)) continue;

    Eigen::VectorXd ybar = Eigen::VectorXd::Zero(p + m);
    for (const auto& y : ys) ybar += y;
    ybar /= n;
    Eigen::MatrixXd emp = Eigen::MatrixXd::Zero(p + m, p + m);
    for (const auto& y : ys) emp += (y - ybar) * (y - ybar).transpose();
    emp /= n;

    Eigen::VectorXd mu0;
    Eigen::MatrixXd phi0;
    prior.PosteriorMoments(ys, &mu0, &phi0);
    const Eigen::VectorXd mean = (m0 * mu0 + n * ybar) / (m0 + n);
    const Eigen::VectorXd shift = ybar - mu0;
    const Eigen::MatrixXd cov = Symmetrize(
        (m0 * phi0 + n * emp + (m0 * n / (m0 + n)) * shift * shift.transpose()) /
        (m0 + n));

    const Eigen::MatrixXd sff = cov.topLeftCorner(p, p);
    const Eigen::MatrixXd suf = cov.bottomLeftCorner(m, p);
    Eigen::LLT<Eigen::MatrixXd> llt(sff);
    if (llt.info() != Eigen::Success) {
      throw Error("policy fit: feature covariance is singular at t=" +
                  std::to_string(t));
    }
    // standardized map u' = a f' + c, mapped back to raw coordinates
    const Eigen::MatrixXd a = llt.solve(suf.transpose()).transpose();
    const Eigen::VectorXd c = mean.tail(m) - a * mean.head(p);
    const Eigen::MatrixXd resid = ProjectEigenvalues(
        Symmetrize(cov.bottomRightCorner(m, m) - a * suf.transpose()), 0.0);
    out.gain[t] = u_scale.asDiagonal() * a * f_scale.cwiseInverse().asDiagonal();
    out.bias[t] = u_scale.cwiseProduct(c) + center.tail(m) -
                  out.gain[t] * center.head(p);
    out.covariance[t] = Symmetrize(
        u_scale.asDiagonal() * resid * u_scale.asDiagonal() + policy_covariance);
    fitted[t] = true;
  }

  for (int t = 0; t < horizon; ++t) {
    if (fitted[t]) continue;
    int source = -1;
    for (int d = 1; d < horizon && source < 0; ++d) {
      if (t - d >= 0 && fitted[t - d]) source = t - d;
      else if (t + d < horizon && fitted[t + d]) source = t + d;
    }
    if (source < 0) throw Error("policy fit: no time step has enough samples");
    out.gain[t] = out.gain[source];
    out.bias[t] = out.bias[source];
    out.covariance[t] = out.covariance[source];
  }
  return out;
}

LinearizedPolicy FitLinearizedPolicy(const PolicyNet& net,
                                     const std::vector<const RolloutRecord*>& rollouts,
                                     int horizon,
                                     const PolicyFitOptions& options) {
  std::vector<StateActionSample> samples;
  for (const RolloutRecord* r : rollouts) {
    if (r->steps.empty()) continue;
    Eigen::MatrixXd obs(net.input_dim(), r->length());
    for (int t = 0; t < r->length(); ++t) obs.col(t) = r->steps[t].observation;
    const Eigen::MatrixXd actions = net.ForwardBatch(obs);
    for (int t = 0; t < r->length(); ++t) {
      samples.push_back({t, r->steps[t].state, actions.col(t)});
    }
  }
  return FitLinearizedPolicy(samples, horizon, net.covariance, options);
}

}  // namespace mpcgps
