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
#ifndef ALPHAVB_LINREG_HPP
#define ALPHAVB_LINREG_HPP

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "alphavb/objective.hpp"

namespace alphavb {

/// y = X beta + w, w ~ N(0, sigma^2 I).
struct RegressionData
{
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  double sigma = 1.0;

  Eigen::Index n() const noexcept { return X.rows(); }
  Eigen::Index d() const noexcept { return X.cols(); }
  void validate() const;
};

/// q(beta_j, z_j) = [phi_j N(mu_j, sigma_sq_j)]^{z_j} [(1 - phi_j) delta_0]^{1 - z_j}.
struct SpikeSlabState
{
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma_sq;
  Eigen::VectorXd phi;
  double nu1 = 1.0;
};

/// `Paper`: batch solve for mu, then sigma_sq_j with phi_j in the slab term,
/// then phi_j. `Derived`: block_sweep, exact coordinate ascent on
/// spike_slab_elbo. Both start from phi = 1 and the batch solve.
enum class HdrUpdateRule { Paper, Derived };

HdrUpdateRule parse_hdr_update_rule(const std::string& name);
std::string to_string(HdrUpdateRule rule);

struct HdrOptions
{
  HdrUpdateRule rule = HdrUpdateRule::Derived;
  /// Slab variance multiplier: beta_j | z_j = 1 ~ N(0, nu1 sigma^2).
  double nu1 = 1.0;
  /// Prior inclusion probability; 1/d when unset.
  std::optional<double> inclusion_prior;
  /// Replace sigma by the residual standard deviation of a ridge pilot fit.
  bool plug_in_sigma = false;
};

struct HdrFit
{
  SpikeSlabState state;
  ElboTrace trace;
  double sigma_used = 0.0;
};

/// mu = (X'X + diag(phi) / nu1)^{-1} X'y via LLT. Throws SingularSystem.
Eigen::VectorXd solve_coefficients(const RegressionData& data, const Eigen::VectorXd& phi,
                                   double nu1);

/// Coordinate pass over j: sigma_sq_j from diag(X'X)_j and phi_j, then phi_j.
/// Uses sigma_tilde^2 = sigma^2 / alpha.
void update_local(const RegressionData& data, SpikeSlabState& state, double alpha,
                  double inclusion_prior);

/// Spike-and-slab ELBO with sigma replaced by sigma_tilde in likelihood and slab.
double spike_slab_elbo(const RegressionData& data, const SpikeSlabState& state, double alpha,
                       double inclusion_prior);

/// Exact block pass: joint mu given (phi, sigma_sq), then sigma_sq, then phi_j in turn.
void block_sweep(const RegressionData& data, SpikeSlabState& state, double alpha,
                 double inclusion_prior);

/// Requires d >= 2.
HdrFit fit_hdr(const RegressionData& data, const HdrOptions& options, const AlphaConfig& cfg);

/// beta ~ N(m0, S0), sigma^2 ~ InvGamma(a0, b0), independent.
struct BlmPrior
{
  Eigen::VectorXd m0;
  Eigen::MatrixXd S0;
  double a0 = 1.0;
  double b0 = 1.0;
};

/// q(beta) = N(beta_mean, beta_cov), q(sigma^2) = InvGamma(shape, rate).
struct LowDimState
{
  Eigen::VectorXd beta_mean;
  Eigen::MatrixXd beta_cov;
  double inv_gamma_shape = 1.0;
  double inv_gamma_rate = 1.0;
};

struct BlmFit
{
  LowDimState state;
  ElboTrace trace;
};

/// KL(InvGamma(a, b) || InvGamma(a0, b0)).
double inverse_gamma_kl(double a, double b, double a0, double b0);

/// alpha E_q[log p(y | beta, sigma^2)] - KL(q_beta || p_beta) - KL(q_sigma || p_sigma).
double blm_elbo(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const BlmPrior& prior,
                const LowDimState& state, double alpha);

/// Two-block CAVI; q(beta) is updated first, starting from E[1/sigma^2] = a0 / b0.
BlmFit fit_blm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const BlmPrior& prior,
               const AlphaConfig& cfg);

/// E_q ||beta - beta*||^2 = ||m - beta*||^2 + tr(S).
double expected_squared_error(const LowDimState& state, const Eigen::VectorXd& beta_star);

} // namespace alphavb

#endif
