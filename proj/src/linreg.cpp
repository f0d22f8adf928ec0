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
#include "alphavb/linreg.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "alphavb/errors.hpp"
#include "alphavb/numeric.hpp"

namespace alphavb {

void RegressionData::validate() const
{
  if (X.rows() != y.size()) throw DimensionMismatch("X rows differ from y length");
  require(X.rows() >= 1 && X.cols() >= 1, "empty design");
  require(sigma > 0.0, "sigma must be positive");
}

Eigen::VectorXd solve_coefficients(const RegressionData& data, const Eigen::VectorXd& phi,
                                   double nu1)
{
  data.validate();
  if (phi.size() != data.d()) throw DimensionMismatch("phi length differs from d");
  require(nu1 > 0.0, "nu1 must be positive");
  Eigen::MatrixXd A = data.X.transpose() * data.X;
  A.diagonal() += phi / nu1;
  const Eigen::VectorXd b = data.X.transpose() * data.y;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw SingularSystem("X'X + Phi/nu1 is not positive definite");
  Eigen::VectorXd mu = llt.solve(b);
  const double scale = std::max(b.norm(), 1.0);
  if (!mu.allFinite() || (A * mu - b).norm() > 1e-8 * scale)
    throw SingularSystem("X'X + Phi/nu1 is numerically singular");
  return mu;
}

void update_local(const RegressionData& data, SpikeSlabState& state, double alpha,
                  double inclusion_prior)
{
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(inclusion_prior > 0.0 && inclusion_prior < 1.0, "inclusion prior must lie in (0, 1)");
  const double s2 = data.sigma * data.sigma / alpha;
  const Eigen::VectorXd diag = data.X.colwise().squaredNorm().transpose();
  const double prior_logit = logit(inclusion_prior);
  state.sigma_sq.resize(data.d());
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    state.sigma_sq(j) = s2 / (diag(j) + state.phi(j) / state.nu1);
    state.phi(j) = logistic(prior_logit + 0.5 * std::log(state.sigma_sq(j) / (state.nu1 * s2)) +
                            state.mu(j) * state.mu(j) / (2.0 * state.sigma_sq(j)));
  }
}

HdrUpdateRule parse_hdr_update_rule(const std::string& name)
{
  if (name == "paper") return HdrUpdateRule::Paper;
  if (name == "derived") return HdrUpdateRule::Derived;
  throw InvalidArgument("unknown hdr_update_rule '" + name + "' (expected paper or derived)");
}

std::string to_string(HdrUpdateRule rule)
{
  return rule == HdrUpdateRule::Paper ? "paper" : "derived";
}

void block_sweep(const RegressionData& data, SpikeSlabState& state, double alpha,
                 double inclusion_prior)
{
  const double s2 = data.sigma * data.sigma / alpha;
  const double prior_logit = logit(inclusion_prior);
  const Eigen::MatrixXd gram = data.X.transpose() * data.X;
  const Eigen::VectorXd xty = data.X.transpose() * data.y;
  const Eigen::VectorXd g = gram.diagonal();
  const Eigen::Index d = data.d();

  // Joint maximizer over mu: with w = Phi^{1/2} mu,
  // (Phi^{1/2} G Phi^{1/2} + D) w = Phi^{1/2} X'y, D = diag(G_jj (1 - phi_j) + 1/nu1).
  const Eigen::VectorXd root = state.phi.cwiseSqrt();
  Eigen::VectorXd diag(d);
  for (Eigen::Index j = 0; j < d; ++j) diag(j) = g(j) * (1.0 - state.phi(j)) + 1.0 / state.nu1;
  Eigen::MatrixXd m = root.asDiagonal() * gram * root.asDiagonal();
  m.diagonal() += diag;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw SingularSystem("mu block system is not positive definite");
  const Eigen::VectorXd w = llt.solve(root.cwiseProduct(xty));
  state.mu = (xty - gram * root.cwiseProduct(w)).cwiseQuotient(diag);

  for (Eigen::Index j = 0; j < d; ++j) state.sigma_sq(j) = s2 / (g(j) + 1.0 / state.nu1);

  // phi_j one at a time against the running fitted mean X bbar.
  Eigen::VectorXd fitted = data.X * state.phi.cwiseProduct(state.mu);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto xj = data.X.col(j);
    const double mu = state.mu(j);
    const double second = mu * mu + state.sigma_sq(j);
    const double cross = xj.dot(data.y - fitted) + g(j) * state.phi(j) * mu;
    const double eta = prior_logit + 0.5 + 0.5 * std::log(state.sigma_sq(j) / (state.nu1 * s2)) -
                       second / (2.0 * state.nu1 * s2) + (mu * cross - 0.5 * g(j) * second) / s2;
    const double next = logistic(eta);
    fitted += xj * ((next - state.phi(j)) * mu);
    state.phi(j) = next;
  }
}

double spike_slab_elbo(const RegressionData& data, const SpikeSlabState& state, double alpha,
                       double inclusion_prior)
{
  const double s2 = data.sigma * data.sigma / alpha;
  const double n = static_cast<double>(data.n());
  const Eigen::VectorXd diag = data.X.colwise().squaredNorm().transpose();
  const Eigen::VectorXd bbar = state.phi.cwiseProduct(state.mu);
  const Eigen::VectorXd second = state.mu.cwiseAbs2() + state.sigma_sq;

  double sq = (data.y - data.X * bbar).squaredNorm();
  for (Eigen::Index j = 0; j < data.d(); ++j)
    sq += diag(j) * (state.phi(j) * second(j) - bbar(j) * bbar(j));
  double elbo = -0.5 * n * (kLog2Pi + std::log(s2)) - sq / (2.0 * s2);

  const double log_rho = std::log(inclusion_prior);
  const double log_1m_rho = std::log1p(-inclusion_prior);
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    const double p = state.phi(j);
    if (p > 0.0)
      elbo += p * (0.5 + 0.5 * std::log(state.sigma_sq(j) / (state.nu1 * s2)) -
                   second(j) / (2.0 * state.nu1 * s2));
    elbo += p * log_rho - xlogx(p) + (1.0 - p) * log_1m_rho - xlogx(1.0 - p);
  }
  return elbo;
}

namespace {

HdrFit run_hdr(const RegressionData& data, const HdrOptions& options, const AlphaConfig& cfg)
{
  const double rho = options.inclusion_prior.value_or(1.0 / static_cast<double>(data.d()));
  HdrFit fit;
  fit.sigma_used = data.sigma;
  auto& s = fit.state;
  s.nu1 = options.nu1;
  s.phi = Eigen::VectorXd::Ones(data.d());
  s.sigma_sq = Eigen::VectorXd::Ones(data.d());
  s.mu = solve_coefficients(data, s.phi, s.nu1);
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (options.rule == HdrUpdateRule::Paper) {
      if (it > 0) s.mu = solve_coefficients(data, s.phi, s.nu1);
      update_local(data, s, cfg.alpha, rho);
    } else {
      block_sweep(data, s, cfg.alpha, rho);
    }
    if (fit.trace.push(spike_slab_elbo(data, s, cfg.alpha, rho), cfg.elbo_tol)) break;
  }
  return fit;
}

} // namespace

HdrFit fit_hdr(const RegressionData& data, const HdrOptions& options, const AlphaConfig& cfg)
{
  cfg.validate();
  data.validate();
  require(data.d() >= 2, "spike-and-slab fit needs d >= 2 (logit(1/d) is undefined at d = 1)");
  require(options.nu1 > 0.0, "nu1 must be positive");
  if (options.inclusion_prior)
    require(*options.inclusion_prior > 0.0 && *options.inclusion_prior < 1.0,
            "inclusion prior must lie in (0, 1)");

  HdrFit fit = run_hdr(data, options, cfg);
  if (!options.plug_in_sigma) return fit;

  // Residual scale of the selected model, then one refit at that scale.
  const Eigen::VectorXd bbar = fit.state.phi.cwiseProduct(fit.state.mu);
  const double dof = std::max(1.0, static_cast<double>(data.n()) - fit.state.phi.sum());
  RegressionData scaled = data;
  scaled.sigma = std::sqrt((data.y - data.X * bbar).squaredNorm() / dof);
  require(scaled.sigma > 0.0, "plug-in sigma is zero");
  HdrFit refit = run_hdr(scaled, options, cfg);
  refit.sigma_used = scaled.sigma;
  return refit;
}

double inverse_gamma_kl(double a, double b, double a0, double b0)
{
  using boost::math::lgamma;
  return (a - a0) * digamma(a) - lgamma(a) + lgamma(a0) + a0 * (std::log(b) - std::log(b0)) +
         a * (b0 - b) / b;
}

namespace {

double gaussian_kl(const Eigen::VectorXd& m, const Eigen::MatrixXd& S, const Eigen::VectorXd& m0,
                   const Eigen::MatrixXd& S0)
{
  Eigen::LLT<Eigen::MatrixXd> l0(S0), l(S);
  if (l0.info() != Eigen::Success || l.info() != Eigen::Success)
    throw NotPositiveDefinite("covariance is not positive definite");
  const Eigen::MatrixXd L0 = l0.matrixL();
  const Eigen::MatrixXd L = l.matrixL();
  const double logdet0 = 2.0 * L0.diagonal().array().log().sum();
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  const double tr = l0.solve(S).trace();
  const Eigen::VectorXd diff = m - m0;
  return 0.5 * (tr + diff.dot(l0.solve(diff)) - static_cast<double>(m.size()) + logdet0 - logdet);
}

} // namespace

double blm_elbo(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const BlmPrior& prior,
                const LowDimState& state, double alpha)
{
  const double n = static_cast<double>(X.rows());
  const double a = state.inv_gamma_shape;
  const double b = state.inv_gamma_rate;
  const double e_prec = a / b;
  const double e_log_var = std::log(b) - digamma(a);
  const double e_sq = (y - X * state.beta_mean).squaredNorm() +
                      (X.transpose() * X * state.beta_cov).trace();
  const double loglik = -0.5 * n * (kLog2Pi + e_log_var) - 0.5 * e_prec * e_sq;
  return alpha * loglik - gaussian_kl(state.beta_mean, state.beta_cov, prior.m0, prior.S0) -
         inverse_gamma_kl(a, b, prior.a0, prior.b0);
}

BlmFit fit_blm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const BlmPrior& prior,
               const AlphaConfig& cfg)
{
  cfg.validate();
  if (X.rows() != y.size()) throw DimensionMismatch("X rows differ from y length");
  const Eigen::Index d = X.cols();
  if (prior.m0.size() != d || prior.S0.rows() != d || prior.S0.cols() != d)
    throw DimensionMismatch("prior dimensions differ from d");
  require(prior.a0 > 0.0 && prior.b0 > 0.0, "inverse-gamma prior needs positive a0, b0");

  Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.S0);
  if (prior_llt.info() != Eigen::Success) throw NotPositiveDefinite("S0 is not positive definite");
  const Eigen::MatrixXd prior_prec = prior_llt.solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::VectorXd prior_shift = prior_prec * prior.m0;
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::VectorXd xty = X.transpose() * y;
  const double n = static_cast<double>(X.rows());

  BlmFit fit;
  auto& s = fit.state;
  s.inv_gamma_shape = prior.a0 + 0.5 * cfg.alpha * n;
  double e_prec = prior.a0 / prior.b0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::MatrixXd prec = prior_prec + cfg.alpha * e_prec * xtx;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("q(beta) precision not SPD");
    s.beta_cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
    s.beta_mean = llt.solve(prior_shift + cfg.alpha * e_prec * xty);

    const double e_sq = (y - X * s.beta_mean).squaredNorm() + (xtx * s.beta_cov).trace();
    s.inv_gamma_rate = prior.b0 + 0.5 * cfg.alpha * e_sq;
    e_prec = s.inv_gamma_shape / s.inv_gamma_rate;
    if (fit.trace.push(blm_elbo(X, y, prior, s, cfg.alpha), cfg.elbo_tol)) break;
  }
  return fit;
}

double expected_squared_error(const LowDimState& state, const Eigen::VectorXd& beta_star)
{
  if (beta_star.size() != state.beta_mean.size()) throw DimensionMismatch("beta* length differs");
  return (state.beta_mean - beta_star).squaredNorm() + state.beta_cov.trace();
}

} // namespace alphavb
