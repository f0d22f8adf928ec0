// Copyright 2026 The alphavb Authors
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
#include "alphavb/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "alphavb/errors.hpp"
#include "alphavb/numeric.hpp"

namespace alphavb {

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs))
{
  require(!probs_.empty(), "discrete distribution must have at least one state");
  double total = 0.0;
  for (double p : probs_) {
    require(p >= 0.0 && std::isfinite(p), "probabilities must be finite and nonnegative");
    total += p;
  }
  require(std::abs(total - 1.0) <= kSumTolerance, "probabilities must sum to 1");
}

DiscreteDistribution DiscreteDistribution::from_weights(std::vector<double> weights)
{
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(total > 0.0 && std::isfinite(total), "weights must have positive finite mass");
  for (double& w : weights) w /= total;
  return DiscreteDistribution(std::move(weights));
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t k)
{
  require(k > 0, "uniform distribution needs k > 0");
  return DiscreteDistribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

DiscreteDistribution DiscreteDistribution::point_mass(std::size_t k, std::size_t at)
{
  require(at < k, "point mass index out of range");
  std::vector<double> p(k, 0.0);
  p[at] = 1.0;
  return DiscreteDistribution(std::move(p));
}

GaussianDensity::GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance))
{
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw DimensionMismatch("covariance shape does not match mean");
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NotPositiveDefinite("covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("covariance is not positive definite");
  chol_ = llt.matrixL();
  for (Eigen::Index i = 0; i < chol_.rows(); ++i) {
    if (!(chol_(i, i) > 0.0)) throw NotPositiveDefinite("covariance is not positive definite");
    log_det_ += 2.0 * std::log(chol_(i, i));
  }
}

GaussianDensity GaussianDensity::isotropic(Eigen::VectorXd mean, double variance)
{
  require(variance > 0.0, "isotropic variance must be positive");
  const auto d = mean.size();
  return GaussianDensity(std::move(mean), variance * Eigen::MatrixXd::Identity(d, d));
}

double GaussianDensity::log_pdf(const Eigen::VectorXd& x) const
{
  if (x.size() != mean_.size()) throw DimensionMismatch("point dimension does not match density");
  const Eigen::VectorXd z =
      chol_.triangularView<Eigen::Lower>().solve(x - mean_);
  return -0.5 * (static_cast<double>(dim()) * kLog2Pi + log_det_ + z.squaredNorm());
}

Eigen::VectorXd GaussianDensity::sample(CounterRng& rng) const
{
  Eigen::VectorXd z(dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean_ + chol_ * z;
}

DivergenceKind DivergenceKind::renyi(double order)
{
  require(order > 0.0 && order < 1.0, "Renyi order must lie strictly inside (0, 1)");
  return DivergenceKind(Tag::Renyi, order);
}

std::string DivergenceKind::name() const
{
  switch (tag_) {
  case Tag::KL:
    return "kl";
  case Tag::V:
    return "v";
  case Tag::HellingerSq:
    return "hellinger_sq";
  case Tag::Renyi:
    return "renyi(" + std::to_string(order_) + ")";
  }
  return "unknown";
}

double discrete_divergence(const DivergenceKind& kind, const DiscreteDistribution& p,
                           const DiscreteDistribution& q)
{
  if (p.size() != q.size()) throw DimensionMismatch("distributions have different lengths");
  const std::size_t k = p.size();
  switch (kind.tag()) {
  case DivergenceKind::Tag::KL:
  case DivergenceKind::Tag::V: {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (p[i] == 0.0) continue;
      if (q[i] == 0.0)
        throw AbsoluteContinuityError("p puts mass where q has none; divergence is infinite");
      const double lr = std::log(p[i]) - std::log(q[i]);
      acc += kind.tag() == DivergenceKind::Tag::KL ? p[i] * lr : p[i] * lr * lr;
    }
    return std::max(0.0, acc);
  }
  case DivergenceKind::Tag::HellingerSq: {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double diff = std::sqrt(p[i]) - std::sqrt(q[i]);
      acc += diff * diff;
    }
    return acc;
  }
  case DivergenceKind::Tag::Renyi: {
    const double a = kind.order();
    double overlap = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      if (p[i] > 0.0 && q[i] > 0.0) overlap += std::pow(p[i], a) * std::pow(q[i], 1.0 - a);
    if (overlap <= 0.0)
      throw AbsoluteContinuityError("p and q are mutually singular; Renyi divergence is infinite");
    return std::max(0.0, std::log(overlap) / (a - 1.0));
  }
  }
  return 0.0;
}

namespace {

bool same_covariance(const GaussianDensity& a, const GaussianDensity& b)
{
  const double scale = std::max(a.covariance().cwiseAbs().maxCoeff(), 1e-300);
  return (a.covariance() - b.covariance()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

double solve_quadratic(const GaussianDensity& g, const Eigen::VectorXd& v)
{
  const Eigen::VectorXd z = g.cholesky_lower().triangularView<Eigen::Lower>().solve(v);
  return z.squaredNorm();
}

double gaussian_kl(const GaussianDensity& a, const GaussianDensity& b)
{
  const auto& lb = b.cholesky_lower();
  // tr(Sb^-1 Sa) = ||Lb^-1 La||_F^2
  const Eigen::MatrixXd m = lb.triangularView<Eigen::Lower>().solve(a.cholesky_lower());
  const double trace = m.squaredNorm();
  const double maha = solve_quadratic(b, b.mean() - a.mean());
  return 0.5 * (trace + maha - static_cast<double>(a.dim()) + b.log_det() - a.log_det());
}

// log(a/b)(x) with x = mu_a + La z is c + z'Az/2 + g'z for z ~ N(0, I);
// its variance is tr(A^2)/2 + |g|^2.
double gaussian_v(const GaussianDensity& a, const GaussianDensity& b)
{
  const auto d = a.dim();
  const auto& lb = b.cholesky_lower();
  const Eigen::MatrixXd m = lb.triangularView<Eigen::Lower>().solve(a.cholesky_lower());
  const Eigen::MatrixXd amat = m.transpose() * m - Eigen::MatrixXd::Identity(d, d);
  const Eigen::VectorXd w =
      lb.transpose().triangularView<Eigen::Upper>().solve(
          lb.triangularView<Eigen::Lower>().solve(b.mean() - a.mean()));
  const Eigen::VectorXd g = a.cholesky_lower().transpose() * w;
  const double variance = 0.5 * (amat * amat).trace() + g.squaredNorm();
  const double kl = gaussian_kl(a, b);
  return variance + kl * kl;
}

double gaussian_hellinger_sq(const GaussianDensity& a, const GaussianDensity& b)
{
  const Eigen::MatrixXd avg = 0.5 * (a.covariance() + b.covariance());
  const GaussianDensity mid(Eigen::VectorXd::Zero(a.dim()), avg);
  const double log_bc = 0.25 * a.log_det() + 0.25 * b.log_det() - 0.5 * mid.log_det() -
                        0.125 * solve_quadratic(mid, a.mean() - b.mean());
  return std::max(0.0, 2.0 * (1.0 - std::exp(log_bc)));
}

} // namespace

double gaussian_divergence(const DivergenceKind& kind, const GaussianDensity& a,
                           const GaussianDensity& b)
{
  if (a.dim() != b.dim()) throw DimensionMismatch("Gaussians have different dimensions");
  switch (kind.tag()) {
  case DivergenceKind::Tag::KL:
    return std::max(0.0, gaussian_kl(a, b));
  case DivergenceKind::Tag::V:
    return std::max(0.0, gaussian_v(a, b));
  case DivergenceKind::Tag::HellingerSq:
    return gaussian_hellinger_sq(a, b);
  case DivergenceKind::Tag::Renyi:
    if (!same_covariance(a, b))
      throw InvalidArgument(
          "closed-form Renyi divergence needs a shared covariance; use monte_carlo_renyi");
    return 0.5 * kind.order() * solve_quadratic(a, a.mean() - b.mean());
  }
  return 0.0;
}

Estimate monte_carlo_renyi(const LogDensity& log_p, const LogDensity& log_pstar, double order,
                           const Sampler& sample_pstar, std::size_t n_samples, CounterRng rng)
{
  require(order > 0.0 && order < 1.0, "Renyi order must lie strictly inside (0, 1)");
  require(n_samples >= 2, "monte_carlo_renyi needs at least two samples");
  std::vector<double> logw(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Eigen::VectorXd x = sample_pstar(rng);
    const double lp = log_p(x);
    const double ls = log_pstar(x);
    logw[i] = lp == ls ? 0.0 : order * (lp - ls);
    if (std::isnan(logw[i])) throw DegenerateEstimate("log-density ratio is NaN");
  }
  const double shift = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(shift))
    throw DegenerateEstimate("every importance weight underflowed to zero");
  double mean = 0.0;
  for (double& lw : logw) {
    lw = std::exp(lw - shift);
    mean += lw;
  }
  mean /= static_cast<double>(n_samples);
  double ss = 0.0;
  for (double w : logw) ss += (w - mean) * (w - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n_samples - 1));
  const double value = (shift + std::log(mean)) / (order - 1.0);
  const double se = sd / (std::sqrt(static_cast<double>(n_samples)) * mean * (1.0 - order));
  return {value + 0.0, se};
}

} // namespace alphavb
