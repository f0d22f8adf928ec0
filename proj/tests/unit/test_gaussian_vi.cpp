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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "alphavb/errors.hpp"
#include "alphavb/gaussian_vi.hpp"
#include "oracles/conjugate.hpp"
#include "oracles/quadrature.hpp"

using namespace alphavb;

namespace {

Eigen::MatrixXd random_spd(CounterRng& rng, int d)
{
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a * a.transpose() * 0.3 + Eigen::MatrixXd::Identity(d, d) * 0.2;
}

GaussianDensity random_gaussian(CounterRng& rng, int d)
{
  Eigen::VectorXd m(d);
  for (int i = 0; i < d; ++i) m(i) = 2.0 * rng.normal();
  return GaussianDensity(m, random_spd(rng, d));
}

GaussianComponentSet random_mixture(CounterRng& rng, int j, int d)
{
  GaussianComponentSet q;
  std::vector<double> w;
  for (int c = 0; c < j; ++c) {
    q.components.push_back(random_gaussian(rng, d));
    w.push_back(rng.gamma(2.0));
  }
  q.weights = DiscreteDistribution::from_weights(w);
  return q;
}

ParametricTarget location_target(const std::vector<double>& y, double s2, double m0, double v0)
{
  ParametricTarget t;
  t.dim = 1;
  t.log_likelihood = [y, s2](const Eigen::VectorXd& th) {
    double s = 0.0;
    for (double v : y) s += -0.5 * (std::log(2.0 * M_PI * s2) + (v - th(0)) * (v - th(0)) / s2);
    return s;
  };
  t.prior_log_density = [m0, v0](const Eigen::VectorXd& th) {
    return -0.5 * (std::log(2.0 * M_PI * v0) + (th(0) - m0) * (th(0) - m0) / v0);
  };
  return t;
}

} // namespace

TEST_CASE("cross density closed form")
{
  const GaussianDensity s = GaussianDensity::isotropic(Eigen::VectorXd::Zero(1), 1.0);
  CHECK(gaussian_cross_density(s, s) == doctest::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
  CHECK(gaussian_cross_density(s, s) == doctest::Approx(0.28209).epsilon(1e-5));

  CounterRng rng(1);
  for (int t = 0; t < 20; ++t) {
    const GaussianDensity a = random_gaussian(rng, 3), b = random_gaussian(rng, 3);
    const double ab = gaussian_cross_density(a, b);
    CHECK(ab > 0.0);
    CHECK(std::abs(ab - gaussian_cross_density(b, a)) <= 1e-14 * ab);
    CHECK(std::log(ab) == doctest::Approx(log_gaussian_cross_density(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("cross density against quadrature and Monte Carlo")
{
  const GaussianDensity a(Eigen::VectorXd::Constant(1, 0.4), Eigen::MatrixXd::Constant(1, 1, 0.7));
  const GaussianDensity b(Eigen::VectorXd::Constant(1, -1.1), Eigen::MatrixXd::Constant(1, 1, 1.9));
  const double quad = oracle::simpson(
      [&](double x) {
        const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, x);
        return std::exp(a.log_pdf(v) + b.log_pdf(v));
      },
      -30.0, 30.0);
  CHECK(gaussian_cross_density(a, b) == doctest::Approx(quad).epsilon(1e-10));

  CounterRng rng(2);
  const GaussianDensity c = random_gaussian(rng, 2), d = random_gaussian(rng, 2);
  const int n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::exp(d.log_pdf(c.sample(rng)));
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - gaussian_cross_density(c, d)) <= 3.0 * se);
}

TEST_CASE("single-component entropy gap is d/2 log(e/2)")
{
  CounterRng rng(3);
  for (int d : {1, 2, 4}) {
    GaussianComponentSet q;
    q.weights = DiscreteDistribution::uniform(1);
    q.components.push_back(random_gaussian(rng, d));
    const GaussianDensity& g = q.components[0];
    const double entropy = 0.5 * (d * std::log(2.0 * M_PI * M_E) + g.log_det());
    CHECK(entropy - surrogate_entropy(q) == doctest::Approx(0.5 * d * std::log(M_E / 2.0)).epsilon(1e-12));
    const Estimate gap = surrogate_gap(q, 20000, 7);
    CHECK(std::abs(gap.value - 0.5 * d * std::log(M_E / 2.0)) <= 3.0 * gap.standard_error + 1e-12);
  }
}

TEST_CASE("surrogate ELBO never exceeds the ELBO")
{
  CounterRng rng(4);
  const ParametricTarget target = location_target({0.5, 1.2, -0.3}, 1.0, 0.0, 4.0);
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    const GaussianComponentSet q = random_mixture(rng, 1 + t % 4, 1);
    const Estimate lbar = surrogate_elbo(q, target, 4000, 100 + t);
    const Estimate l = elbo_monte_carlo(q, target, 4000, 100 + t);
    const Estimate gap = surrogate_gap(q, 4000, 100 + t);
    CHECK(lbar.value <= l.value + 3.0 * std::hypot(l.standard_error, lbar.standard_error));
    CHECK(gap.value + 3.0 * gap.standard_error >= 0.0);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("prior-only target at the prior leaves the cross-density term")
{
  const double m0 = 0.3, v0 = 2.0;
  const ParametricTarget t = location_target({}, 1.0, m0, v0);
  GaussianComponentSet q;
  q.weights = DiscreteDistribution::uniform(1);
  q.components.push_back(GaussianDensity::isotropic(Eigen::VectorXd::Constant(1, m0), v0));
  const double cross = surrogate_entropy(q);
  const double expect_log_prior = -0.5 * (std::log(2.0 * M_PI * v0) + 1.0);
  const Estimate lbar = surrogate_elbo(q, t, 20000, 3);
  CHECK(std::abs(lbar.value - (expect_log_prior + cross)) <= 3.0 * lbar.standard_error + 1e-12);
  CHECK(cross == doctest::Approx(0.5 * std::log(4.0 * M_PI * v0)).epsilon(1e-12));
}

TEST_CASE("component set validation")
{
  GaussianComponentSet q;
  q.weights = DiscreteDistribution::uniform(2);
  q.components.push_back(GaussianDensity::isotropic(Eigen::VectorXd::Zero(2), 1.0));
  CHECK_THROWS_AS(q.validate(), DimensionMismatch);
  q.components.push_back(GaussianDensity::isotropic(Eigen::VectorXd::Zero(3), 1.0));
  CHECK_THROWS_AS(q.validate(), DimensionMismatch);
  CHECK_THROWS(GaussianDensity(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, -1.0)));
}

TEST_CASE("single Gaussian fit recovers the conjugate fractional posterior")
{
  const std::vector<double> y{1.1, 0.4, 2.3, 1.7, 0.9};
  const ParametricTarget t = location_target(y, 1.5, 0.0, 3.0);
  for (double a : {1.0, 0.5}) {
    AlphaConfig cfg;
    cfg.alpha = a;
    const GviFit fit = fit_gaussian_vi(t, 1, cfg);
    const auto post = oracle::location_posterior(y, 1.5, 0.0, 3.0, a);
    CHECK(fit.q.components[0].mean()(0) == doctest::Approx(post.mean).epsilon(1e-3));
    for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] >= fit.trace[i - 1] - 1e-6);
  }
}

TEST_CASE("two components find both modes of a bimodal target")
{
  ParametricTarget t;
  t.dim = 1;
  t.log_likelihood = [](const Eigen::VectorXd& th) {
    const double a = -0.5 * (th(0) + 3.0) * (th(0) + 3.0) / 0.25;
    const double b = -0.5 * (th(0) - 3.0) * (th(0) - 3.0) / 0.25;
    return std::max(a, b) + std::log(std::exp(a - std::max(a, b)) + std::exp(b - std::max(a, b)));
  };
  t.prior_log_density = [](const Eigen::VectorXd& th) { return -0.5 * th(0) * th(0) / 100.0; };
  AlphaConfig cfg;
  GviOptions opt;
  // One start on each side of the origin; both seeded draws can land in one basin.
  opt.init_means = {Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
  const GviFit fit = fit_gaussian_vi(t, 2, cfg, opt);
  std::vector<double> means{fit.q.components[0].mean()(0), fit.q.components[1].mean()(0)};
  std::sort(means.begin(), means.end());
  CHECK(std::abs(means[0] + 3.0) < 0.2);
  CHECK(std::abs(means[1] - 3.0) < 0.2);
}
