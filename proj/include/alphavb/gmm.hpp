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
#ifndef ALPHAVB_GMM_HPP
#define ALPHAVB_GMM_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alphavb/divergence.hpp"
#include "alphavb/objective.hpp"

namespace alphavb {

/// Isotropic Gaussian prior on every component mean, known mixing weights.
struct GmmPrior
{
  Eigen::VectorXd mu0;
  double sigma0_sq = 50.0;
  DiscreteDistribution pi;

  std::size_t num_components() const noexcept { return pi.size(); }
  void validate(Eigen::Index dim) const;
};

/// Mean-field state: q(mu_k) = N(mu_tilde_k, sigma_tilde_sq_k I), q(S_i) = resp row i.
struct GmmVariationalState
{
  Eigen::MatrixXd mu_tilde;       // K x d
  Eigen::VectorXd sigma_tilde_sq; // K
  Eigen::MatrixXd resp;           // n x K
};

/// Component update. `Paper` uses precision 1/sigma0^2 + N_k / alpha with an
/// unscaled data sum; `Derived` uses 1/sigma0^2 + alpha N_k with an alpha-scaled
/// data sum. The two agree at alpha = 1.
enum class GmmUpdateRule { Paper, Derived };

GmmUpdateRule parse_gmm_update_rule(const std::string& name);
std::string to_string(GmmUpdateRule rule);

struct GmmOptions
{
  GmmUpdateRule rule = GmmUpdateRule::Derived;
  /// Number of initializations when no explicit init is given. Start 0 is the
  /// farthest-point seeding, later starts use D^2-weighted (k-means++) picks.
  /// The run with the largest final objective is returned.
  int restarts = 10;
};

struct GmmFit
{
  GmmVariationalState state;
  ElboTrace trace;
};

/// resp_ik proportional to exp{alpha [log pi_k + <y_i, mu_k> - (|mu_k|^2 + d s_k^2) / 2]}.
Eigen::MatrixXd update_responsibilities(const Eigen::MatrixXd& data,
                                        const GmmVariationalState& state, const GmmPrior& prior,
                                        double alpha);

/// Returns the new (mu_tilde, sigma_tilde_sq).
std::pair<Eigen::MatrixXd, Eigen::VectorXd>
update_components(const Eigen::MatrixXd& data, const Eigen::MatrixXd& resp,
                  const GmmPrior& prior, double alpha, GmmUpdateRule rule);

/// alpha E_q[sum_i sum_k r_ik log(pi_k N(y_i; mu_k, I))] + H(r) - sum_k KL(q(mu_k) || prior).
/// Up to a constant this is -KL(q || fractional posterior); the Derived rule
/// is exact coordinate ascent on it.
double gmm_elbo(const Eigen::MatrixXd& data, const GmmVariationalState& state,
                const GmmPrior& prior, double alpha);

/// Farthest-point means (first pick seeded), sigma_tilde_sq = sigma0^2, uniform resp.
GmmVariationalState gmm_initial_state(const Eigen::MatrixXd& data, const GmmPrior& prior,
                                      std::uint64_t seed);

/// Same, but every pick after the first is drawn with probability proportional
/// to the squared distance to the nearest chosen mean.
GmmVariationalState gmm_kmeanspp_state(const Eigen::MatrixXd& data, const GmmPrior& prior,
                                       std::uint64_t seed);

/// Runs CAVI from `init` only.
GmmFit fit_gmm_from(const Eigen::MatrixXd& data, const GmmPrior& prior, const AlphaConfig& cfg,
                    GmmUpdateRule rule, GmmVariationalState init);

GmmFit fit_gmm(const Eigen::MatrixXd& data, const GmmPrior& prior, const AlphaConfig& cfg,
               const GmmOptions& options = {},
               const std::optional<GmmVariationalState>& init = std::nullopt);

/// sum_k pi_k N(y; means_k, I).
double predictive_density(const Eigen::MatrixXd& means, const DiscreteDistribution& pi,
                          const Eigen::VectorXd& y);

/// Hungarian method on a square cost matrix (rows: estimates, columns: truth).
/// Returns perm minimizing sum_c cost(perm[c], c).
std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost);

/// Matches estimated means to true means by Euclidean cost; returns perm as above.
std::vector<std::size_t> match_components(const Eigen::MatrixXd& estimated,
                                          const Eigen::MatrixXd& truth);

/// Largest Euclidean error after matching.
double max_matched_error(const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& truth);

} // namespace alphavb

#endif
