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
#ifndef ALPHAVB_OBJECTIVE_HPP
#define ALPHAVB_OBJECTIVE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alphavb/divergence.hpp"
#include "alphavb/rng.hpp"

namespace alphavb {

using Theta = Eigen::VectorXd;
using Observation = Eigen::VectorXd;

struct FactorizedVariational;

/// Likelihood and prior hooks a model exposes to the objective machinery.
/// theta packs (mu, pi); the hooks know how to unpack it.
///
/// num_latent == 0 marks a latent-free model: log_lik(y, theta, 0) is then the
/// per-observation log-likelihood and log_latent_prior is never called.
struct ModelSpec
{
  std::size_t num_latent = 0;
  std::function<double(const Observation&, const Theta&, std::size_t)> log_lik;
  std::function<double(std::size_t, const Theta&)> log_latent_prior;
  /// Optional; defaults to log-sum-exp over latent states.
  std::function<double(const Observation&, const Theta&)> log_marginal_lik;
  std::function<double(const Theta&)> prior_log_density;
  std::function<Theta(CounterRng&)> prior_sampler;
  /// Optional closed form of E_q[sum_i sum_s q(s) log(p(y_i|mu,s) pi_s / q(s))].
  /// Returns nullopt when it cannot handle the given q.
  std::function<std::optional<double>(std::span<const Observation>, const FactorizedVariational&)>
      expected_fit;

  bool latent_free() const noexcept { return num_latent == 0; }
  double marginal_log_lik(const Observation& y, const Theta& theta) const;
};

/// Variational density over theta. Finitely supported densities (atoms) get
/// exact expectations; everything else is sampled.
struct ParameterDensity
{
  std::function<Theta(CounterRng&)> sample;
  std::function<double(const Theta&)> log_density;
  /// KL(q || prior) in closed form; every family in the library supplies one.
  std::optional<double> kl_to_prior;
  std::vector<Theta> atoms;
  std::vector<double> atom_weights;

  bool finitely_supported() const noexcept { return !atoms.empty(); }

  static ParameterDensity point_mass(Theta at, std::optional<double> kl_to_prior);
  /// q over a finite grid; KL is taken against the grid prior `prior`.
  static ParameterDensity discrete(std::vector<Theta> atoms, const DiscreteDistribution& weights,
                                   const DiscreteDistribution& prior);
  static ParameterDensity gaussian(const GaussianDensity& q, const GaussianDensity& prior);
};

struct FactorizedVariational
{
  ParameterDensity q_theta;
  /// One distribution of length K per observation; empty for latent-free models.
  std::vector<DiscreteDistribution> q_latent;
};

struct AlphaConfig
{
  double alpha = 1.0;
  int max_iters = 100;
  double elbo_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Monte-Carlo draws for expectations over q_theta when no closed form exists.
  std::size_t n_theta_samples = 1000;

  /// Throws InvalidArgument on alpha outside (0, 1] or nonpositive tolerances.
  void validate() const;
};

struct ElboTrace
{
  std::vector<double> values;
  std::optional<std::size_t> converged_at;

  bool converged() const noexcept { return converged_at.has_value(); }
  std::size_t sweeps() const noexcept { return values.size(); }
  /// Largest drop between consecutive values (0 when nondecreasing).
  double max_decrease() const noexcept;
  /// Appends a value and marks convergence when |change| < tol.
  bool push(double value, double tol);
};

/// Average Jensen gap E_q[l_n(theta) - hat l_n(theta)]; exact for finitely
/// supported q_theta, seeded Monte Carlo otherwise.
Estimate jensen_gap(const ModelSpec& model, std::span<const Observation> data,
                    const FactorizedVariational& q, std::size_t n_theta_samples, CounterRng rng);

/// Fit objective without the theta*-anchor:
///   -E_q[sum_i sum_s q(s) log(p(y_i|mu,s) pi_s / q(s))] + KL(q_theta||p_theta) / alpha.
/// At alpha = 1 this is the negative ELBO.
Estimate alpha_objective(const ModelSpec& model, std::span<const Observation> data,
                         const FactorizedVariational& q, const AlphaConfig& cfg,
                         std::size_t n_theta_samples, CounterRng rng);

/// Entropy of the product latent distribution, sum_i H(q_{S_i}).
double latent_entropy(std::span<const DiscreteDistribution> q_latent);

} // namespace alphavb

#endif
