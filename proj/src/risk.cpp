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
#include "alphavb/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "alphavb/errors.hpp"
#include "alphavb/numeric.hpp"
#include "alphavb/parallel.hpp"
#include "alphavb/synth.hpp"

namespace alphavb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> v)
{
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_fraction(double alpha, double zeta)
{
  require(alpha > 0.0 && alpha < 1.0, "the risk bound needs alpha strictly inside (0, 1)");
  require(zeta > 0.0 && zeta < 1.0, "zeta must lie strictly inside (0, 1)");
}

double bound_from_psi(double psi, double alpha, double zeta, std::size_t n)
{
  const double scale = static_cast<double>(n) * (1.0 - alpha);
  return alpha / scale * psi + std::log(1.0 / zeta) / scale;
}

void finish_report(RiskCheckReport& report)
{
  std::size_t violated = 0;
  for (const auto& row : report.rows) {
    violated += row.violated ? 1 : 0;
    report.prior_uniform_violations += row.lhs > row.rhs_prior_uniform ? 1 : 0;
    report.slack.push_back(row.rhs - row.lhs);
  }
  const double r = static_cast<double>(report.rows.size());
  report.violation_rate = static_cast<double>(violated) / r;
  report.binomial_se = std::sqrt(report.violation_rate * (1.0 - report.violation_rate) / r);
}

// All points of the simplex lattice {w : w_g = k_g / m, sum k_g = m}.
void lattice(std::size_t parts, std::size_t m, std::vector<std::size_t>& cur,
             std::vector<std::vector<std::size_t>>& out)
{
  if (cur.size() + 1 == parts) {
    const std::size_t used = std::accumulate(cur.begin(), cur.end(), std::size_t{0});
    cur.push_back(m - used);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  const std::size_t used = std::accumulate(cur.begin(), cur.end(), std::size_t{0});
  for (std::size_t k = 0; k + used <= m; ++k) {
    cur.push_back(k);
    lattice(parts, m, cur, out);
    cur.pop_back();
  }
}

} // namespace

// ---------------------------------------------------------------------------

RiskEstimate estimate_variational_risk(const ParameterDensity& q, const DivergenceAt& divergence_at,
                                       const DivergenceKind& kind, std::size_t n_theta_samples,
                                       std::uint64_t seed)
{
  RiskEstimate est{0.0, 0.0, kind, n_theta_samples, seed};
  const CounterRng root(seed);
  if (q.finitely_supported()) {
    for (std::size_t a = 0; a < q.atoms.size(); ++a) {
      if (q.atom_weights[a] == 0.0) continue;
      CounterRng r = root.substream(a);
      est.value += q.atom_weights[a] * divergence_at(q.atoms[a], r);
    }
    est.n_theta_samples = q.atoms.size();
    return est;
  }
  require(n_theta_samples >= 2, "n_theta_samples must be at least 2");
  require(static_cast<bool>(q.sample), "q has no sampler");
  std::vector<double> vals(n_theta_samples);
  for (std::size_t m = 0; m < n_theta_samples; ++m) {
    CounterRng r = root.substream(m);
    const Theta theta = q.sample(r);
    vals[m] = divergence_at(theta, r);
  }
  est.value = mean_of(vals);
  double ss = 0.0;
  for (double v : vals) ss += (v - est.value) * (v - est.value);
  est.standard_error = std::sqrt(ss / static_cast<double>(n_theta_samples - 1) /
                                 static_cast<double>(n_theta_samples));
  return est;
}

DivergenceAt gaussian_location_divergence(Eigen::VectorXd truth, double variance,
                                          DivergenceKind kind)
{
  require(variance > 0.0, "variance must be positive");
  const GaussianDensity star = GaussianDensity::isotropic(truth, variance);
  return [star, variance, kind](const Theta& theta, CounterRng&) {
    if (theta.size() != star.dim()) throw DimensionMismatch("theta dimension");
    return gaussian_divergence(kind, GaussianDensity::isotropic(theta, variance), star);
  };
}

namespace {

double gmm_log_density(const Eigen::MatrixXd& means, const DiscreteDistribution& pi,
                       const Eigen::VectorXd& y)
{
  std::vector<double> t(static_cast<std::size_t>(means.rows()));
  const double d = static_cast<double>(means.cols());
  for (Eigen::Index k = 0; k < means.rows(); ++k)
    t[k] = std::log(pi[k]) - 0.5 * (d * kLog2Pi + (y - means.row(k).transpose()).squaredNorm());
  return log_sum_exp(t);
}

} // namespace

DivergenceAt gmm_renyi_divergence(Eigen::MatrixXd true_means, DiscreteDistribution pi,
                                  double order, std::size_t n_mc)
{
  require(pi.size() == static_cast<std::size_t>(true_means.rows()),
          "pi and the true means disagree on K");
  (void)DivergenceKind::renyi(order);
  return [true_means, pi, order, n_mc](const Theta& theta, CounterRng& rng) {
    const Eigen::Index k = true_means.rows(), d = true_means.cols();
    if (theta.size() != k * d) throw DimensionMismatch("packed GMM means");
    Eigen::MatrixXd means(k, d);
    for (Eigen::Index r = 0; r < k; ++r) means.row(r) = theta.segment(r * d, d).transpose();
    auto log_p = [&](const Eigen::VectorXd& y) { return gmm_log_density(means, pi, y); };
    auto log_star = [&](const Eigen::VectorXd& y) { return gmm_log_density(true_means, pi, y); };
    auto sample_star = [&](CounterRng& g) {
      const std::size_t c = g.categorical(pi.probs());
      Eigen::VectorXd y = true_means.row(static_cast<Eigen::Index>(c)).transpose();
      for (Eigen::Index j = 0; j < d; ++j) y(j) += g.normal();
      return y;
    };
    return monte_carlo_renyi(log_p, log_star, order, sample_star, n_mc, rng.substream(0x72)).value;
  };
}

ParameterDensity gmm_parameter_density(const GmmVariationalState& state)
{
  ParameterDensity q;
  const Eigen::MatrixXd mu = state.mu_tilde;
  const Eigen::VectorXd var = state.sigma_tilde_sq;
  q.sample = [mu, var](CounterRng& rng) {
    const Eigen::Index k = mu.rows(), d = mu.cols();
    Theta theta(k * d);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index j = 0; j < d; ++j)
        theta(r * d + j) = mu(r, j) + std::sqrt(var(r)) * rng.normal();
    return theta;
  };
  q.log_density = [mu, var](const Theta& theta) {
    const Eigen::Index k = mu.rows(), d = mu.cols();
    if (theta.size() != k * d) throw DimensionMismatch("packed GMM means");
    double acc = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
      const double sq = (theta.segment(r * d, d) - mu.row(r).transpose()).squaredNorm();
      acc -= 0.5 * (static_cast<double>(d) * (kLog2Pi + std::log(var(r))) + sq / var(r));
    }
    return acc;
  };
  return q;
}

// ---------------------------------------------------------------------------

TinyFitTable::TinyFitTable(const TinyDiscreteModel& model, std::span<const int> data)
    : n_(data.size()), k_(model.num_latent())
{
  for (std::size_t g = 0; g < model.grid_size(); ++g) {
    Eigen::MatrixXd t(n_, k_);
    Eigen::VectorXd m(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t s = 0; s < k_; ++s)
        t(i, s) = model.log_emission(g, s, data[i]) + model.log_mixing(g, s);
      m(i) = model.log_marginal(g, data[i]);
    }
    table_.push_back(std::move(t));
    marginal_.push_back(std::move(m));
  }
}

double tiny_psi(const TinyDiscreteModel& model, const TinyFitTable& table, const TinyVariational& q,
                double alpha)
{
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  if (q.q_theta.size() != table.grid_size()) throw DimensionMismatch("q_theta size");
  if (q.q_latent.size() != table.n()) throw DimensionMismatch("q_latent count");
  const std::size_t truth = model.truth_index();
  double psi = 0.0;
  for (std::size_t i = 0; i < table.n(); ++i) psi += table.log_marginal(truth, i);
  double kl = 0.0;
  for (std::size_t g = 0; g < table.grid_size(); ++g) {
    const double w = q.q_theta[g];
    if (w == 0.0) continue;
    if (model.prior()[g] == 0.0) return kInf;
    kl += w * (std::log(w) - std::log(model.prior()[g]));
    double fit = 0.0;
    for (std::size_t i = 0; i < table.n(); ++i)
      for (std::size_t s = 0; s < table.num_latent(); ++s) {
        const double r = q.q_latent[i][s];
        if (r > 0.0) fit += r * (table.log_joint(g, i, s) - std::log(r));
      }
    psi -= w * fit;
  }
  return psi + kl / alpha;
}

double tiny_risk(const TinyDiscreteModel& model, const DiscreteDistribution& q_theta, double alpha)
{
  const DivergenceKind kind = DivergenceKind::renyi(alpha);
  const DiscreteDistribution star = model.marginal(model.truth_index());
  double risk = 0.0;
  for (std::size_t g = 0; g < q_theta.size(); ++g)
    if (q_theta[g] > 0.0 && g != model.truth_index())
      risk += q_theta[g] * discrete_divergence(kind, model.marginal(g), star);
  return risk;
}

std::vector<DiscreteDistribution> tiny_best_latent(const TinyFitTable& table,
                                                   const DiscreteDistribution& q_theta)
{
  std::vector<DiscreteDistribution> out;
  out.reserve(table.n());
  std::vector<double> logits(table.num_latent());
  for (std::size_t i = 0; i < table.n(); ++i) {
    std::fill(logits.begin(), logits.end(), 0.0);
    for (std::size_t g = 0; g < table.grid_size(); ++g)
      if (q_theta[g] > 0.0)
        for (std::size_t s = 0; s < table.num_latent(); ++s)
          logits[s] += q_theta[g] * table.log_joint(g, i, s);
    normalize_log_weights(logits);
    out.push_back(DiscreteDistribution::from_weights(logits));
  }
  return out;
}

std::vector<DiscreteDistribution> tiny_conditional_latent(const TinyDiscreteModel& model,
                                                          const TinyFitTable& table)
{
  return tiny_best_latent(
      table, DiscreteDistribution::point_mass(table.grid_size(), model.truth_index()));
}

TinyCaviFit tiny_cavi(const TinyDiscreteModel& model, const TinyFitTable& table,
                      const AlphaConfig& cfg)
{
  cfg.validate();
  TinyCaviFit fit;
  fit.q.q_theta = model.prior();
  std::vector<double> logw(table.grid_size());
  for (int it = 0; it < cfg.max_iters; ++it) {
    fit.q.q_latent = tiny_best_latent(table, fit.q.q_theta);
    for (std::size_t g = 0; g < table.grid_size(); ++g) {
      if (model.prior()[g] == 0.0) {
        logw[g] = -kInf;
        continue;
      }
      double fitg = 0.0;
      for (std::size_t i = 0; i < table.n(); ++i)
        for (std::size_t s = 0; s < table.num_latent(); ++s)
          fitg += fit.q.q_latent[i][s] * table.log_joint(g, i, s);
      logw[g] = std::log(model.prior()[g]) + cfg.alpha * fitg;
    }
    normalize_log_weights(logw);
    fit.q.q_theta = DiscreteDistribution::from_weights(logw);
    if (fit.trace.push(-tiny_psi(model, table, fit.q, cfg.alpha), cfg.elbo_tol)) break;
  }
  return fit;
}

std::vector<TinyVariational> tiny_family(const TinyDiscreteModel& model, const TinyFitTable& table,
                                         const AlphaConfig& cfg, double step)
{
  require(step > 0.0 && step <= 1.0, "lattice step must lie in (0, 1]");
  const auto m = static_cast<std::size_t>(std::lround(1.0 / step));
  require(std::abs(static_cast<double>(m) * step - 1.0) < 1e-9, "1/step must be an integer");
  std::vector<std::vector<std::size_t>> points;
  std::vector<std::size_t> cur;
  lattice(table.grid_size(), m, cur, points);

  const std::vector<DiscreteDistribution> uniform(
      table.n(), DiscreteDistribution::uniform(table.num_latent()));
  const std::vector<DiscreteDistribution> conditional = tiny_conditional_latent(model, table);

  std::vector<TinyVariational> family;
  family.reserve(3 * points.size() + 2);
  for (const auto& p : points) {
    std::vector<double> w(p.begin(), p.end());
    const DiscreteDistribution qt = DiscreteDistribution::from_weights(w);
    family.push_back({qt, tiny_best_latent(table, qt)});
    family.push_back({qt, uniform});
    family.push_back({qt, conditional});
  }
  family.push_back({model.prior(), uniform});
  family.push_back(tiny_cavi(model, table, cfg).q);
  return family;
}

// ---------------------------------------------------------------------------

void RiskCheckReport::write_csv(std::ostream& out) const
{
  out << "replication,seed,lhs,rhs,q_index,violated\n";
  for (const auto& r : rows)
    out << r.replication << ',' << r.seed << ',' << format_double(r.lhs) << ','
        << format_double(r.rhs) << ',' << r.q_index << ',' << (r.violated ? 1 : 0) << '\n';
}

RiskCheckReport check_risk_inequality(const TinyDiscreteModel& model, std::size_t n, double alpha,
                                      double zeta, std::size_t n_replications, std::uint64_t seed,
                                      const RiskCheckOptions& options)
{
  require_fraction(alpha, zeta);
  require(n >= 1, "n must be positive");
  require(n_replications >= 1, "need at least one replication");

  AlphaConfig cfg;
  cfg.alpha = alpha;
  cfg.max_iters = 500;
  cfg.elbo_tol = 1e-12;

  RiskCheckReport report;
  report.rows.resize(n_replications);
  parallel_for(n_replications, [&](std::size_t r) {
    RiskReplication& row = report.rows[r];
    row.replication = r;
    row.seed = mix_seed(seed, r);
    CounterRng rng(row.seed);
    const std::vector<int> data = model.sample(n, rng);
    const TinyFitTable table(model, data);
    const std::vector<TinyVariational> family = tiny_family(model, table, cfg, options.lattice_step);

    std::vector<double> psi(family.size());
    for (std::size_t j = 0; j < family.size(); ++j) {
      psi[j] = tiny_psi(model, table, family[j], alpha);
      if (options.psi_offset) {
        const double extra = options.psi_offset(family[j]);
        require(extra >= 0.0, "psi_offset must be nonnegative");
        psi[j] += extra;
      }
    }
    const auto best = static_cast<std::size_t>(
        std::min_element(psi.begin(), psi.end()) - psi.begin());
    row.q_index = best;
    row.lhs = tiny_risk(model, family[best].q_theta, alpha);
    row.rhs = bound_from_psi(psi[best], alpha, zeta, n);
    row.violated = row.lhs > row.rhs;
    // The prior with uniform q_S sits just before the CAVI optimum.
    row.rhs_prior_uniform = bound_from_psi(psi[family.size() - 2], alpha, zeta, n);
  });
  finish_report(report);
  return report;
}

double surrogate_psi(const SurrogateRiskProblem& problem, std::span<const double> data,
                     const GaussianComponentSet& q, double alpha)
{
  const double s2 = problem.sigma * problem.sigma;
  const double p2 = problem.prior_sd * problem.prior_sd;
  double neg_fit = 0.0;
  double log_prior = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double w = q.weights[j];
    const double mu = q.components[j].mean()(0);
    const double v = q.components[j].covariance()(0, 0);
    for (double y : data)
      neg_fit += w * ((y - mu) * (y - mu) + v - (y - problem.truth) * (y - problem.truth)) /
                 (2.0 * s2);
    log_prior += w * (-0.5 * (kLog2Pi + std::log(p2)) -
                      ((mu - problem.prior_mean) * (mu - problem.prior_mean) + v) / (2.0 * p2));
  }
  return neg_fit + (-surrogate_entropy(q) - log_prior) / alpha;
}

RiskCheckReport check_surrogate_risk_inequality(const SurrogateRiskProblem& problem, std::size_t n,
                                                double alpha, double zeta,
                                                std::size_t n_replications, std::uint64_t seed)
{
  require_fraction(alpha, zeta);
  require(n >= 1 && n_replications >= 1, "n and the replication count must be positive");
  require(problem.sigma > 0.0 && problem.prior_sd > 0.0, "scales must be positive");
  require(problem.num_components >= 1, "need at least one component");

  const double s2 = problem.sigma * problem.sigma;
  GaussianComponentSet prior_q{DiscreteDistribution::uniform(1),
                               {GaussianDensity::isotropic(
                                   Eigen::VectorXd::Constant(1, problem.prior_mean),
                                   problem.prior_sd * problem.prior_sd)}};

  RiskCheckReport report;
  report.rows.resize(n_replications);
  parallel_for(n_replications, [&](std::size_t r) {
    RiskReplication& row = report.rows[r];
    row.replication = r;
    row.seed = mix_seed(seed, r);
    CounterRng rng(row.seed);
    std::vector<double> data(n);
    for (double& y : data) y = problem.truth + problem.sigma * rng.normal();

    ParametricTarget target;
    target.dim = 1;
    target.log_likelihood = [&data, s2](const Eigen::VectorXd& th) {
      double acc = 0.0;
      for (double y : data) acc -= 0.5 * (kLog2Pi + std::log(s2) + (y - th(0)) * (y - th(0)) / s2);
      return acc;
    };
    target.prior_log_density = [&problem](const Eigen::VectorXd& th) {
      const double z = (th(0) - problem.prior_mean) / problem.prior_sd;
      return -0.5 * (kLog2Pi + 2.0 * std::log(problem.prior_sd) + z * z);
    };
    AlphaConfig cfg;
    cfg.alpha = alpha;
    cfg.seed = row.seed;
    const GviFit fit = fit_gaussian_vi(target, problem.num_components, cfg);

    double lhs = 0.0;
    for (std::size_t j = 0; j < fit.q.size(); ++j) {
      const double mu = fit.q.components[j].mean()(0);
      const double v = fit.q.components[j].covariance()(0, 0);
      lhs += fit.q.weights[j] * alpha * ((mu - problem.truth) * (mu - problem.truth) + v) /
             (2.0 * s2);
    }
    row.lhs = lhs;
    row.rhs = bound_from_psi(surrogate_psi(problem, data, fit.q, alpha), alpha, zeta, n);
    row.q_index = 0;
    row.violated = row.lhs > row.rhs;
    row.rhs_prior_uniform = bound_from_psi(surrogate_psi(problem, data, prior_q, alpha), alpha,
                                           zeta, n);
  });
  finish_report(report);
  return report;
}

// ---------------------------------------------------------------------------

void KLNeighborhoodSpec::validate() const
{
  require(eps_pi > 0.0 && eps_pi < 1.0, "eps_pi must lie in (0, 1)");
  require(eps_mu > 0.0 && eps_mu < 1.0, "eps_mu must lie in (0, 1)");
}

double MassEstimate::neg_log_mass() const
{
  return zero_hits() ? -std::log(ci_high) : -std::log(mass);
}

MassEstimate wilson_interval(std::size_t hits, std::size_t draws, double z)
{
  require(draws >= 1 && hits <= draws, "need hits <= draws and draws >= 1");
  const double nd = static_cast<double>(draws);
  const double p = static_cast<double>(hits) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (p + z2 / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
  return {hits, draws, p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

MembershipDraw kl_ball_membership(std::function<Theta(CounterRng&)> prior_sampler,
                                  std::vector<StateDivergence> states, double eps)
{
  require(eps > 0.0, "radius must be positive");
  const double e2 = eps * eps;
  return [prior_sampler = std::move(prior_sampler), states = std::move(states), e2](CounterRng& rng) {
    const Theta theta = prior_sampler(rng);
    for (const auto& s : states)
      if (s.kl(theta) > e2 || s.v(theta) > e2) return false;
    return true;
  };
}

StateDivergence gaussian_state_divergence(Eigen::VectorXd truth)
{
  StateDivergence sd;
  sd.kl = [truth](const Theta& th) { return 0.5 * (th - truth).squaredNorm(); };
  sd.v = [truth](const Theta& th) {
    const double q = (th - truth).squaredNorm();
    return q + 0.25 * q * q;
  };
  return sd;
}

MassEstimate estimate_prior_mass(const MembershipDraw& draw, std::size_t n_mc, CounterRng rng)
{
  require(n_mc >= 1, "n_mc must be positive");
  std::size_t hits = 0;
  for (std::size_t m = 0; m < n_mc; ++m) hits += draw(rng) ? 1 : 0;
  return wilson_interval(hits, n_mc);
}

PriorMassReport prior_mass_bound(const std::vector<MembershipDraw>& pi_blocks,
                                 const std::vector<MembershipDraw>& mu_blocks, std::size_t n_mc,
                                 std::uint64_t seed)
{
  PriorMassReport rep;
  const CounterRng pi_root(mix_seed(seed, 0)), mu_root(mix_seed(seed, 1));
  for (std::size_t b = 0; b < pi_blocks.size(); ++b) {
    rep.pi_blocks.push_back(estimate_prior_mass(pi_blocks[b], n_mc, pi_root.substream(b)));
    rep.neg_log_pi += rep.pi_blocks.back().neg_log_mass();
    rep.lower_bound_only = rep.lower_bound_only || rep.pi_blocks.back().zero_hits();
  }
  for (std::size_t b = 0; b < mu_blocks.size(); ++b) {
    rep.mu_blocks.push_back(estimate_prior_mass(mu_blocks[b], n_mc, mu_root.substream(b)));
    rep.neg_log_mu += rep.mu_blocks.back().neg_log_mass();
    rep.lower_bound_only = rep.lower_bound_only || rep.mu_blocks.back().zero_hits();
  }
  return rep;
}

MixtureRiskBound mixture_risk_bound(double D, double alpha, std::size_t n,
                                    const KLNeighborhoodSpec& eps, double neg_log_pi,
                                    double neg_log_mu)
{
  require(D > 1.0, "D must exceed 1");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie strictly inside (0, 1)");
  require(n >= 1, "n must be positive");
  require(neg_log_pi >= 0.0 && neg_log_mu >= 0.0, "-log masses must be nonnegative");
  eps.validate();
  const double e2 = eps.eps_pi * eps.eps_pi + eps.eps_mu * eps.eps_mu;
  const double nd = static_cast<double>(n);
  MixtureRiskBound b;
  b.divergence_term = D * alpha / (1.0 - alpha) * e2;
  b.prior_term = (neg_log_pi + neg_log_mu) / (nd * (1.0 - alpha));
  b.total = b.divergence_term + b.prior_term;
  b.probability = std::max(0.0, 1.0 - 5.0 / ((D - 1.0) * (D - 1.0) * nd * e2));
  return b;
}

// ---------------------------------------------------------------------------

SlopeFit rate_slope(std::span<const double> ns, std::span<const double> risks)
{
  if (ns.size() != risks.size()) throw DimensionMismatch("ns and risks differ in length");
  require(ns.size() >= 4, "rate_slope needs at least 4 grid points");
  const std::size_t m = ns.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    require(ns[i] > 0.0, "grid sizes must be positive");
    if (!(risks[i] > 0.0)) throw InvalidArgument("risk values must be positive");
    x[i] = std::log(ns[i]);
    y[i] = std::log(risks[i]);
  }
  const double xm = mean_of(x), ym = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  require(sxx > 0.0, "grid sizes must not all coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.slope_standard_error = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  return fit;
}

} // namespace alphavb
