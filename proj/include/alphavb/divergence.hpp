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
#ifndef ALPHAVB_DIVERGENCE_HPP
#define ALPHAVB_DIVERGENCE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "alphavb/rng.hpp"

namespace alphavb {

/// A Monte-Carlo (or exact, with zero error) scalar estimate.
struct Estimate
{
  double value = 0.0;
  double standard_error = 0.0;
};

/// Probability vector on {0, ..., K-1}.
class DiscreteDistribution
{
public:
  static constexpr double kSumTolerance = 1e-12;

  DiscreteDistribution() = default;
  /// Validates nonnegativity and unit mass (within kSumTolerance).
  explicit DiscreteDistribution(std::vector<double> probs);

  /// Normalizes arbitrary nonnegative weights.
  static DiscreteDistribution from_weights(std::vector<double> weights);
  static DiscreteDistribution uniform(std::size_t k);
  static DiscreteDistribution point_mass(std::size_t k, std::size_t at);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  bool operator==(const DiscreteDistribution&) const = default;

private:
  std::vector<double> probs_;
};

/// Multivariate normal density with a cached Cholesky factor.
class GaussianDensity
{
public:
  GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  static GaussianDensity isotropic(Eigen::VectorXd mean, double variance);

  Eigen::Index dim() const noexcept { return mean_.size(); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  const Eigen::MatrixXd& cholesky_lower() const noexcept { return chol_; }
  double log_det() const noexcept { return log_det_; }

  double log_pdf(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(CounterRng& rng) const;

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  double log_det_ = 0.0;
};

class DivergenceKind
{
public:
  enum class Tag { KL, V, HellingerSq, Renyi };

  static DivergenceKind kl() { return DivergenceKind(Tag::KL, 0.0); }
  static DivergenceKind v() { return DivergenceKind(Tag::V, 0.0); }
  static DivergenceKind hellinger_sq() { return DivergenceKind(Tag::HellingerSq, 0.0); }
  /// Order must lie strictly inside (0, 1).
  static DivergenceKind renyi(double order);

  Tag tag() const noexcept { return tag_; }
  double order() const noexcept { return order_; }
  std::string name() const;

private:
  DivergenceKind(Tag tag, double order) : tag_(tag), order_(order) {}
  Tag tag_;
  double order_;
};

/// D(p||q), V(p||q), h^2(p||q) = sum (sqrt p - sqrt q)^2, or D_a(p||q).
/// Throws AbsoluteContinuityError rather than returning +inf.
double discrete_divergence(const DivergenceKind& kind, const DiscreteDistribution& p,
                           const DiscreteDistribution& q);

/// Closed forms. Renyi is available only when both covariances coincide;
/// use monte_carlo_renyi otherwise.
double gaussian_divergence(const DivergenceKind& kind, const GaussianDensity& a,
                           const GaussianDensity& b);

using LogDensity = std::function<double(const Eigen::VectorXd&)>;
using Sampler = std::function<Eigen::VectorXd(CounterRng&)>;

/// Estimates D_a(p||p*) = log E_{p*}[(p/p*)^a] / (a - 1) from draws of p*,
/// with a delta-method standard error. Deterministic in `rng`.
Estimate monte_carlo_renyi(const LogDensity& log_p, const LogDensity& log_pstar, double order,
                           const Sampler& sample_pstar, std::size_t n_samples, CounterRng rng);

} // namespace alphavb

#endif
