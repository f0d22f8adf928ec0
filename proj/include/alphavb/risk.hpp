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
#ifndef ALPHAVB_RISK_HPP
#define ALPHAVB_RISK_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alphavb/divergence.hpp"
#include "alphavb/gaussian_vi.hpp"
#include "alphavb/gmm.hpp"
#include "alphavb/objective.hpp"
#include "alphavb/rng.hpp"
#include "alphavb/tiny_model.hpp"

namespace alphavb {

// ---------------------------------------------------------------------------
// Variational risk

struct RiskEstimate
{
  double value = 0.0;
  double standard_error = 0.0;
  DivergenceKind divergence = DivergenceKind::kl();
  std::size_t n_theta_samples = 0;
  std::uint64_t seed = 0;
};

/// Per-observation divergence between p(.|theta) and p(.|theta*). The
/// generator is for evaluators that need Monte Carlo; closed forms ignore it.
using DivergenceAt = std::function<double(const Theta&, CounterRng&)>;

/// Integral of divergence_at against q. Exact (SE 0 from the theta side)
/// when q is finitely supported; otherwise n_theta_samples draws from q.
/// Draw m uses substream m of the seed for both the theta draw and the
/// divergence evaluation, so runs sharing a seed share random numbers.
RiskEstimate estimate_variational_risk(const ParameterDensity& q, const DivergenceAt& divergence_at,
                                       const DivergenceKind& kind, std::size_t n_theta_samples,
                                       std::uint64_t seed);

/// Closed-form divergence for the isotropic Gaussian location model
/// p(.|theta) = N(theta, variance I).
DivergenceAt gaussian_location_divergence(Eigen::VectorXd truth, double variance,
                                          DivergenceKind kind);

/// Renyi divergence between the mixture at theta and the true mixture, both
/// with identity component covariance and weights pi. theta packs the K
/// means row by row. Estimated with n_mc draws from the true mixture.
DivergenceAt gmm_renyi_divergence(Eigen::MatrixXd true_means, DiscreteDistribution pi,
                                  double order, std::size_t n_mc);

/// q over packed GMM means: independent N(mu_tilde_k, sigma_tilde_sq_k I).
ParameterDensity gmm_parameter_density(const GmmVariationalState& state);

// ---------------------------------------------------------------------------
// Enumerated objective on the tiny model

/// log p(y_i, s | theta_g) tables for a fixed dataset.
class TinyFitTable
{
public:
  TinyFitTable(const TinyDiscreteModel& model, std::span<const int> data);

  std::size_t grid_size() const noexcept { return table_.size(); }
  std::size_t n() const noexcept { return n_; }
  std::size_t num_latent() const noexcept { return k_; }
  double log_joint(std::size_t g, std::size_t i, std::size_t s) const { return table_[g](i, s); }
  double log_marginal(std::size_t g, std::size_t i) const { return marginal_[g](i); }

private:
  std::size_t n_;
  std::size_t k_;
  std::vector<Eigen::MatrixXd> table_;
  std::vector<Eigen::VectorXd> marginal_;
};

struct TinyVariational
{
  DiscreteDistribution q_theta;
  std::vector<DiscreteDistribution> q_latent;
};

/// Psi anchored at theta*: -E_q[sum_i sum_s q_i(s) log(p(y_i,s|theta)/q_i(s))]
/// + sum_i log p(y_i|theta*) + KL(q_theta || prior)/alpha.
/// Infinite when q_theta puts mass outside the prior support.
double tiny_psi(const TinyDiscreteModel& model, const TinyFitTable& table, const TinyVariational& q,
                double alpha);

/// Sum_g q(g) D_alpha(p_g || p_theta*) using full enumeration of the
/// observation alphabet.
double tiny_risk(const TinyDiscreteModel& model, const DiscreteDistribution& q_theta, double alpha);

/// Optimal q_S given q_theta: q_i(s) proportional to exp(E_q log p(y_i, s | theta)).
std::vector<DiscreteDistribution> tiny_best_latent(const TinyFitTable& table,
                                                   const DiscreteDistribution& q_theta);

/// Latent conditional at theta*; makes the Jensen gap zero at theta*.
std::vector<DiscreteDistribution> tiny_conditional_latent(const TinyDiscreteModel& model,
                                                          const TinyFitTable& table);

struct TinyCaviFit
{
  TinyVariational q;
  ElboTrace trace; ///< -Psi after each sweep
};

/// Coordinate descent on Psi from q_theta = prior.
TinyCaviFit tiny_cavi(const TinyDiscreteModel& model, const TinyFitTable& table,
                      const AlphaConfig& cfg);

/// Enumerated family: every q_theta on the simplex lattice with the given
/// step, each paired with the best-response, uniform and theta*-conditional
/// q_S; then the prior with uniform q_S; then the CAVI optimum (last).
std::vector<TinyVariational> tiny_family(const TinyDiscreteModel& model, const TinyFitTable& table,
                                         const AlphaConfig& cfg, double step = 0.05);

// ---------------------------------------------------------------------------
// Risk inequality checks

struct RiskReplication
{
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::size_t q_index = 0; ///< family member attaining rhs
  bool violated = false;
  double rhs_prior_uniform = 0.0; ///< rhs at q_theta = prior, q_S uniform
};

struct RiskCheckReport
{
  std::vector<RiskReplication> rows;
  double violation_rate = 0.0;
  double binomial_se = 0.0;
  std::size_t prior_uniform_violations = 0;
  std::vector<double> slack; ///< rhs - lhs per replication

  void write_csv(std::ostream& out) const;
};

struct RiskCheckOptions
{
  double lattice_step = 0.05;
  /// Nonnegative amount added to Psi for a family member, e.g. a surrogate
  /// gap. The minimizer is then taken over the augmented objective.
  std::function<double(const TinyVariational&)> psi_offset;
};

/// For each replication draws Y^n from theta*, enumerates the family, takes
/// q-hat as the minimizer of Psi and compares its exact risk with
/// alpha/(n(1-alpha)) Psi(q) + log(1/zeta)/(n(1-alpha)) minimized over q.
RiskCheckReport check_risk_inequality(const TinyDiscreteModel& model, std::size_t n, double alpha,
                                      double zeta, std::size_t n_replications, std::uint64_t seed,
                                      const RiskCheckOptions& options = {});

/// Gaussian location problem y_i ~ N(theta*, sigma^2), prior N(m0, s0^2),
/// fitted by a J-component Gaussian mixture with the surrogate entropy.
struct SurrogateRiskProblem
{
  double truth = 0.0;
  double sigma = 1.0;
  double prior_mean = 0.0;
  double prior_sd = 3.0;
  std::size_t num_components = 2;
};

/// Psi with the entropy replaced by its surrogate, in closed form:
/// Psi(q) + (H(q) - surrogate H(q))/alpha.
double surrogate_psi(const SurrogateRiskProblem& problem, std::span<const double> data,
                     const GaussianComponentSet& q, double alpha);

/// Same report as check_risk_inequality; q_index is always 0 (the fitted q).
RiskCheckReport check_surrogate_risk_inequality(const SurrogateRiskProblem& problem, std::size_t n,
                                                double alpha, double zeta,
                                                std::size_t n_replications, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Prior mass of KL neighbourhoods

struct KLNeighborhoodSpec
{
  double eps_pi = 0.5;
  double eps_mu = 0.5;

  void validate() const;
};

struct MassEstimate
{
  std::size_t hits = 0;
  std::size_t draws = 0;
  double mass = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  bool zero_hits() const noexcept { return hits == 0; }
  /// -log mass; with zero hits only -log ci_high, a lower bound.
  double neg_log_mass() const;
};

/// Wilson score interval at normal quantile z.
MassEstimate wilson_interval(std::size_t hits, std::size_t draws, double z = 1.96);

/// Draws one parameter block from its prior and reports ball membership.
using MembershipDraw = std::function<bool(CounterRng&)>;

/// KL and V from the truth for one latent state, as functions of the block.
struct StateDivergence
{
  std::function<double(const Theta&)> kl;
  std::function<double(const Theta&)> v;
};

/// Membership in {KL <= eps^2 and V <= eps^2 for every listed state}.
MembershipDraw kl_ball_membership(std::function<Theta(CounterRng&)> prior_sampler,
                                  std::vector<StateDivergence> states, double eps);

/// Identity-covariance Gaussian state at truth: KL = |d|^2/2, V = |d|^2 + |d|^4/4.
StateDivergence gaussian_state_divergence(Eigen::VectorXd truth);

MassEstimate estimate_prior_mass(const MembershipDraw& draw, std::size_t n_mc, CounterRng rng);

struct PriorMassReport
{
  std::vector<MassEstimate> pi_blocks;
  std::vector<MassEstimate> mu_blocks;
  double neg_log_pi = 0.0;
  double neg_log_mu = 0.0;
  bool lower_bound_only = false;
};

/// Independent prior blocks: the ball mass is the product of block masses.
/// An empty pi list means pi is known (mass 1).
PriorMassReport prior_mass_bound(const std::vector<MembershipDraw>& pi_blocks,
                                 const std::vector<MembershipDraw>& mu_blocks, std::size_t n_mc,
                                 std::uint64_t seed);

struct MixtureRiskBound
{
  double divergence_term = 0.0;
  double prior_term = 0.0;
  double total = 0.0;
  double probability = 0.0; ///< guaranteed coverage, clamped at 0
};

/// D alpha/(1-alpha) (eps_pi^2 + eps_mu^2) + (-log P_pi - log P_mu)/(n(1-alpha)),
/// holding with probability 1 - 5/((D-1)^2 n (eps_pi^2 + eps_mu^2)).
MixtureRiskBound mixture_risk_bound(double D, double alpha, std::size_t n,
                                    const KLNeighborhoodSpec& eps, double neg_log_pi,
                                    double neg_log_mu);

// ---------------------------------------------------------------------------
// Rates

struct SlopeFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_standard_error = 0.0;
  std::vector<double> residuals;
};

/// Least-squares slope of log(risk) on log(n).
SlopeFit rate_slope(std::span<const double> ns, std::span<const double> risks);

} // namespace alphavb

#endif
