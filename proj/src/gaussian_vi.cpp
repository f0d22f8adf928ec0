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
#include "alphavb/gaussian_vi.hpp"

#include <cmath>
#include <limits>

#include "alphavb/errors.hpp"
#include "alphavb/numeric.hpp"
#include "alphavb/optimize.hpp"

namespace alphavb {

Eigen::Index GaussianComponentSet::dim() const
{
  require(!components.empty(), "mixture has no components");
  return components.front().dim();
}

void GaussianComponentSet::validate() const
{
  require(!components.empty(), "mixture has no components");
  if (weights.size() != components.size())
    throw DimensionMismatch("weights and components differ in length");
  for (const auto& c : components)
    if (c.dim() != components.front().dim()) throw DimensionMismatch("components differ in dimension");
}

double GaussianComponentSet::log_pdf(const Eigen::VectorXd& theta) const
{
  std::vector<double> terms;
  terms.reserve(components.size());
  for (std::size_t j = 0; j < components.size(); ++j)
    if (weights[j] > 0.0) terms.push_back(std::log(weights[j]) + components[j].log_pdf(theta));
  return log_sum_exp(terms);
}

Eigen::VectorXd GaussianComponentSet::sample(CounterRng& rng) const
{
  return components[rng.categorical(weights.probs())].sample(rng);
}

double log_gaussian_cross_density(const GaussianDensity& a, const GaussianDensity& b)
{
  if (a.dim() != b.dim()) throw DimensionMismatch("cross density needs equal dimensions");
  return GaussianDensity(b.mean(), a.covariance() + b.covariance()).log_pdf(a.mean());
}

double gaussian_cross_density(const GaussianDensity& a, const GaussianDensity& b)
{
  return std::exp(log_gaussian_cross_density(a, b));
}

double surrogate_entropy(const GaussianComponentSet& q)
{
  q.validate();
  const std::size_t j_count = q.size();
  double h = 0.0;
  std::vector<double> terms;
  for (std::size_t j = 0; j < j_count; ++j) {
    if (q.weights[j] == 0.0) continue;
    terms.clear();
    for (std::size_t l = 0; l < j_count; ++l)
      if (q.weights[l] > 0.0)
        terms.push_back(std::log(q.weights[l]) +
                        log_gaussian_cross_density(q.components[j], q.components[l]));
    h -= q.weights[j] * log_sum_exp(terms);
  }
  return h;
}

namespace {

// Stratified estimate of sum_j w_j E_{q_j}[f(theta)].
template <class F>
Estimate stratified(const GaussianComponentSet& q, std::size_t n_mc, std::uint64_t seed, F f)
{
  require(n_mc >= 2, "need at least two draws per component");
  double value = 0.0, var = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q.weights[j] == 0.0) continue;
    CounterRng rng(seed, j);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t m = 0; m < n_mc; ++m) {
      const double v = f(j, q.components[j].sample(rng));
      const double delta = v - mean;
      mean += delta / static_cast<double>(m + 1);
      m2 += delta * (v - mean);
    }
    value += q.weights[j] * mean;
    var += q.weights[j] * q.weights[j] * m2 / static_cast<double>(n_mc - 1) / static_cast<double>(n_mc);
  }
  return {value, std::sqrt(var)};
}

} // namespace

Estimate surrogate_elbo(const GaussianComponentSet& q, const ParametricTarget& target,
                        std::size_t n_mc, std::uint64_t seed)
{
  q.validate();
  Estimate e = stratified(q, n_mc, seed,
                          [&](std::size_t, const Eigen::VectorXd& th) { return target.log_joint(th); });
  e.value += surrogate_entropy(q);
  return e;
}

Estimate elbo_monte_carlo(const GaussianComponentSet& q, const ParametricTarget& target,
                          std::size_t n_mc, std::uint64_t seed)
{
  q.validate();
  return stratified(q, n_mc, seed, [&](std::size_t, const Eigen::VectorXd& th) {
    return target.log_joint(th) - q.log_pdf(th);
  });
}

Estimate surrogate_gap(const GaussianComponentSet& q, std::size_t n_mc, std::uint64_t seed)
{
  q.validate();
  Estimate e = stratified(q, n_mc, seed,
                          [&](std::size_t, const Eigen::VectorXd& th) { return -q.log_pdf(th); });
  e.value -= surrogate_entropy(q);
  return e;
}

namespace {

struct Layout
{
  std::size_t j_count;
  Eigen::Index d;
  Eigen::Index tri() const { return d * (d + 1) / 2; }
  Eigen::Index per_component() const { return d + tri(); }
  Eigen::Index size() const
  {
    return static_cast<Eigen::Index>(j_count) * (1 + per_component());
  }
  Eigen::Index offset(std::size_t j) const
  {
    return static_cast<Eigen::Index>(j_count) + static_cast<Eigen::Index>(j) * per_component();
  }
};

struct Unpacked
{
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> factors;
};

Unpacked unpack(const Layout& lay, const Eigen::VectorXd& x)
{
  Unpacked u;
  u.weights.assign(x.data(), x.data() + lay.j_count);
  normalize_log_weights(u.weights);
  for (std::size_t j = 0; j < lay.j_count; ++j) {
    Eigen::Index at = lay.offset(j);
    u.means.push_back(x.segment(at, lay.d));
    at += lay.d;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(lay.d, lay.d);
    for (Eigen::Index r = 0; r < lay.d; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) l(r, c) = r == c ? std::exp(x(at++)) : x(at++);
    u.factors.push_back(std::move(l));
  }
  return u;
}

GaussianComponentSet to_mixture(const Unpacked& u)
{
  GaussianComponentSet q;
  q.weights = DiscreteDistribution::from_weights(u.weights);
  for (std::size_t j = 0; j < u.means.size(); ++j) {
    Eigen::MatrixXd cov = u.factors[j] * u.factors[j].transpose();
    cov = 0.5 * (cov + cov.transpose());
    q.components.emplace_back(u.means[j], cov);
  }
  return q;
}

// n_mc whitened antithetic standard-normal draws: sample mean 0, sample second moment I.
std::vector<Eigen::VectorXd> base_draws(Eigen::Index d, std::size_t n_mc, CounterRng rng)
{
  const std::size_t half = (n_mc + 1) / 2;
  std::vector<Eigen::VectorXd> eps;
  for (std::size_t m = 0; m < half; ++m) {
    Eigen::VectorXd e(d);
    for (Eigen::Index i = 0; i < d; ++i) e(i) = rng.normal();
    eps.push_back(e);
    eps.push_back(-e);
  }
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (const auto& e : eps) second += e * e.transpose();
  second /= static_cast<double>(eps.size());
  Eigen::LLT<Eigen::MatrixXd> llt(second);
  if (llt.info() != Eigen::Success) throw InvalidArgument("too few base draws to whiten");
  const Eigen::MatrixXd l = llt.matrixL();
  for (auto& e : eps) e = l.triangularView<Eigen::Lower>().solve(e);
  return eps;
}

} // namespace

GviFit fit_gaussian_vi(const ParametricTarget& target, std::size_t num_components,
                       const AlphaConfig& cfg, const GviOptions& options)
{
  cfg.validate();
  require(num_components >= 1, "need at least one component");
  require(target.dim >= 1 && target.dim <= 10, "target dimension must lie in [1, 10]");
  require(static_cast<bool>(target.log_likelihood) && static_cast<bool>(target.prior_log_density),
          "target needs a log-likelihood and a prior log-density");
  require(options.n_mc >= 2, "n_mc must be at least 2");
  require(options.init_means.empty() || options.init_means.size() == num_components,
          "init_means must list one mean per component");

  const Layout lay{num_components, target.dim};
  std::vector<std::vector<Eigen::VectorXd>> eps;
  CounterRng root(cfg.seed, 0x677669);
  for (std::size_t j = 0; j < num_components; ++j)
    eps.push_back(base_draws(lay.d, options.n_mc, root.substream(j)));

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(lay.size());
  CounterRng init_rng = root.substream(num_components);
  for (std::size_t j = 0; j < num_components; ++j) {
    const Eigen::Index at = lay.offset(j);
    if (!options.init_means.empty()) {
      if (options.init_means[j].size() != lay.d) throw DimensionMismatch("init mean dimension");
      x0.segment(at, lay.d) = options.init_means[j];
    } else {
      for (Eigen::Index i = 0; i < lay.d; ++i) x0(at + i) = options.init_scale * init_rng.normal();
    }
  }

  const double alpha = cfg.alpha;
  auto negative_objective = [&](const Eigen::VectorXd& x) {
    const Unpacked u = unpack(lay, x);
    double value = 0.0;
    for (std::size_t j = 0; j < num_components; ++j) {
      double acc = 0.0;
      for (const auto& e : eps[j]) {
        const Eigen::VectorXd th = u.means[j] + u.factors[j] * e;
        acc += alpha * target.log_likelihood(th) + target.prior_log_density(th);
      }
      value += u.weights[j] * acc / static_cast<double>(eps[j].size());
    }
    try {
      value += surrogate_entropy(to_mixture(u));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
    return -value;
  };

  const MinimizeResult r =
      minimize_bfgs(negative_objective, x0, options.max_evaluations, options.grad_tol);
  GviFit fit;
  fit.q = to_mixture(unpack(lay, r.x));
  for (double v : r.trace) fit.trace.push_back(-v);
  fit.evaluations = r.evaluations;
  fit.converged = r.converged;
  return fit;
}

} // namespace alphavb
