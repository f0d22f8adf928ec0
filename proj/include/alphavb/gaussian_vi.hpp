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
#ifndef ALPHAVB_GAUSSIAN_VI_HPP
#define ALPHAVB_GAUSSIAN_VI_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "alphavb/divergence.hpp"
#include "alphavb/objective.hpp"

namespace alphavb {

/// Mixture sum_j w_j N(mu_j, Sigma_j).
struct GaussianComponentSet
{
  DiscreteDistribution weights;
  std::vector<GaussianDensity> components;

  std::size_t size() const noexcept { return components.size(); }
  Eigen::Index dim() const;
  void validate() const;
  double log_pdf(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd sample(CounterRng& rng) const;
};

/// Latent-free model: log p(Y^n | theta) and log p_theta(theta).
struct ParametricTarget
{
  Eigen::Index dim = 1;
  std::function<double(const Eigen::VectorXd&)> log_likelihood;
  std::function<double(const Eigen::VectorXd&)> prior_log_density;

  double log_joint(const Eigen::VectorXd& theta) const
  {
    return log_likelihood(theta) + prior_log_density(theta);
  }
};

/// E_{N(mu_a, Sigma_a)}[N(theta; mu_b, Sigma_b)] = N(mu_a; mu_b, Sigma_a + Sigma_b).
double gaussian_cross_density(const GaussianDensity& a, const GaussianDensity& b);
double log_gaussian_cross_density(const GaussianDensity& a, const GaussianDensity& b);

/// -sum_j w_j log E_{q_j}[q(theta)], a lower bound on the entropy of q.
double surrogate_entropy(const GaussianComponentSet& q);

/// E_q[log p(Y^n, theta)] - sum_j w_j log E_{q_j}[q(theta)], first term by
/// n_mc seeded draws per component.
Estimate surrogate_elbo(const GaussianComponentSet& q, const ParametricTarget& target,
                        std::size_t n_mc, std::uint64_t seed);

/// E_q[log p(Y^n, theta) - log q(theta)] by the same draws.
Estimate elbo_monte_carlo(const GaussianComponentSet& q, const ParametricTarget& target,
                          std::size_t n_mc, std::uint64_t seed);

/// L(q) - surrogate L(q) = H(q) - surrogate_entropy(q); target-free.
Estimate surrogate_gap(const GaussianComponentSet& q, std::size_t n_mc, std::uint64_t seed);

struct GviOptions
{
  /// Draws per component in the sample-average objective (antithetic, even).
  std::size_t n_mc = 64;
  int max_evaluations = 2000;
  /// Initial component means; seeded N(0, init_scale^2 I) draws when empty.
  std::vector<Eigen::VectorXd> init_means;
  double init_scale = 1.0;
  double grad_tol = 1e-7;
};

struct GviFit
{
  GaussianComponentSet q;
  /// Objective after every accepted step; nondecreasing by construction.
  std::vector<double> trace;
  int evaluations = 0;
  /// False when the budget ran out or the line search stalled with a large gradient.
  bool converged = false;
};

/// Maximizes alpha E_q[log lik] + E_q[log p_theta] + surrogate_entropy(q) over
/// weights (softmax), means and log-Cholesky covariance factors. Expectations
/// use fixed whitened antithetic base draws, so the objective is deterministic.
GviFit fit_gaussian_vi(const ParametricTarget& target, std::size_t num_components,
                       const AlphaConfig& cfg, const GviOptions& options = {});

} // namespace alphavb

#endif
