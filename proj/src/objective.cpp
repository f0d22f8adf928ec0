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
#include "alphavb/objective.hpp"

#include <cmath>
#include <limits>

#include "alphavb/errors.hpp"
#include "alphavb/numeric.hpp"

namespace alphavb {

double ModelSpec::marginal_log_lik(const Observation& y, const Theta& theta) const
{
  if (log_marginal_lik) return log_marginal_lik(y, theta);
  if (latent_free()) return log_lik(y, theta, 0);
  std::vector<double> terms(num_latent);
  for (std::size_t s = 0; s < num_latent; ++s)
    terms[s] = log_lik(y, theta, s) + log_latent_prior(s, theta);
  return log_sum_exp(terms);
}

ParameterDensity ParameterDensity::point_mass(Theta at, std::optional<double> kl_to_prior)
{
  ParameterDensity q;
  q.sample = [at](CounterRng&) { return at; };
  q.kl_to_prior = kl_to_prior;
  q.atoms = {std::move(at)};
  q.atom_weights = {1.0};
  return q;
}

ParameterDensity ParameterDensity::discrete(std::vector<Theta> atoms,
                                            const DiscreteDistribution& weights,
                                            const DiscreteDistribution& prior)
{
  if (atoms.size() != weights.size() || weights.size() != prior.size())
    throw DimensionMismatch("atoms, weights and prior must have equal length");
  ParameterDensity q;
  std::vector<double> w(weights.probs().begin(), weights.probs().end());
  q.sample = [atoms, w](CounterRng& rng) { return atoms[rng.categorical(w)]; };
  q.log_density = [atoms, w](const Theta& th) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i] == th) return std::log(w[i]);
    return -std::numeric_limits<double>::infinity();
  };
  try {
    q.kl_to_prior = discrete_divergence(DivergenceKind::kl(), weights, prior);
  } catch (const AbsoluteContinuityError&) {
    q.kl_to_prior = std::numeric_limits<double>::infinity();
  }
  q.atoms = std::move(atoms);
  q.atom_weights = std::move(w);
  return q;
}

ParameterDensity ParameterDensity::gaussian(const GaussianDensity& qd, const GaussianDensity& prior)
{
  ParameterDensity q;
  q.sample = [qd](CounterRng& rng) { return qd.sample(rng); };
  q.log_density = [qd](const Theta& th) { return qd.log_pdf(th); };
  q.kl_to_prior = gaussian_divergence(DivergenceKind::kl(), qd, prior);
  return q;
}

void AlphaConfig::validate() const
{
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(max_iters > 0, "max_iters must be positive");
  require(elbo_tol > 0.0, "elbo_tol must be positive");
  require(n_theta_samples > 0, "n_theta_samples must be positive");
}

double ElboTrace::max_decrease() const noexcept
{
  double worst = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) worst = std::max(worst, values[i - 1] - values[i]);
  return worst;
}

bool ElboTrace::push(double value, double tol)
{
  values.push_back(value);
  if (values.size() >= 2 && std::abs(values.back() - values[values.size() - 2]) < tol) {
    converged_at = values.size() - 1;
    return true;
  }
  return false;
}

namespace {

void check_latent(const ModelSpec& model, std::span<const Observation> data,
                  const FactorizedVariational& q)
{
  if (model.latent_free()) {
    if (!q.q_latent.empty())
      throw DimensionMismatch("latent-free model given latent variational factors");
    return;
  }
  if (q.q_latent.size() != data.size())
    throw DimensionMismatch("need one latent distribution per observation");
  for (const auto& qs : q.q_latent)
    if (qs.size() != model.num_latent)
      throw DimensionMismatch("latent distribution length differs from K");
}

// sum_i sum_s q(s) log(p(y_i|mu,s) pi_s / q(s)) at a fixed theta.
double latent_fit(const ModelSpec& model, std::span<const Observation> data,
                  const FactorizedVariational& q, const Theta& theta)
{
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (model.latent_free()) {
      acc += model.log_lik(data[i], theta, 0);
      continue;
    }
    const auto& qs = q.q_latent[i];
    for (std::size_t s = 0; s < model.num_latent; ++s) {
      if (qs[s] == 0.0) continue;
      acc += qs[s] * (model.log_lik(data[i], theta, s) + model.log_latent_prior(s, theta) -
                      std::log(qs[s]));
    }
  }
  return acc;
}

template <class F>
Estimate expect_over_theta(const ParameterDensity& qt, std::size_t n_samples, CounterRng& rng, F f)
{
  if (qt.finitely_supported()) {
    double acc = 0.0;
    for (std::size_t a = 0; a < qt.atoms.size(); ++a)
      if (qt.atom_weights[a] > 0.0) acc += qt.atom_weights[a] * f(qt.atoms[a]);
    return {acc, 0.0};
  }
  require(static_cast<bool>(qt.sample), "q_theta has no sampler");
  require(n_samples >= 2, "need at least two theta draws");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t t = 0; t < n_samples; ++t) {
    const double v = f(qt.sample(rng));
    const double delta = v - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(n_samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_samples))};
}

} // namespace

Estimate jensen_gap(const ModelSpec& model, std::span<const Observation> data,
                    const FactorizedVariational& q, std::size_t n_theta_samples, CounterRng rng)
{
  require(model.num_latent >= 1, "jensen_gap needs a latent-variable model");
  check_latent(model, data, q);
  return expect_over_theta(q.q_theta, n_theta_samples, rng, [&](const Theta& theta) {
    double ell = 0.0;
    for (const auto& y : data) ell += model.marginal_log_lik(y, theta);
    return ell - latent_fit(model, data, q, theta);
  });
}

Estimate alpha_objective(const ModelSpec& model, std::span<const Observation> data,
                         const FactorizedVariational& q, const AlphaConfig& cfg,
                         std::size_t n_theta_samples, CounterRng rng)
{
  cfg.validate();
  check_latent(model, data, q);
  if (!q.q_theta.kl_to_prior)
    throw InvalidArgument("q_theta family must supply KL(q_theta || prior) in closed form");
  const double kl = *q.q_theta.kl_to_prior;
  if (!std::isfinite(kl)) throw AbsoluteContinuityError("KL(q_theta || prior) is infinite");

  Estimate fit;
  std::optional<double> closed;
  if (model.expected_fit) closed = model.expected_fit(data, q);
  if (closed) {
    fit = {*closed, 0.0};
  } else {
    fit = expect_over_theta(q.q_theta, n_theta_samples, rng,
                            [&](const Theta& theta) { return latent_fit(model, data, q, theta); });
  }
  return {-fit.value + kl / cfg.alpha, fit.standard_error};
}

double latent_entropy(std::span<const DiscreteDistribution> q_latent)
{
  double h = 0.0;
  for (const auto& q : q_latent)
    for (double p : q.probs()) h -= xlogx(p);
  return h;
}

} // namespace alphavb
