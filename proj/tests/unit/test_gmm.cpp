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

#include "alphavb/gmm.hpp"
#include "alphavb/synth.hpp"
#include "oracles/conjugate.hpp"
#include "oracles/quadrature.hpp"

using namespace alphavb;

namespace {

GmmPrior make_prior(Eigen::Index d, std::size_t k, double s0 = 50.0)
{
  return {Eigen::VectorXd::Zero(d), s0, DiscreteDistribution::uniform(k)};
}

GmmVariationalState make_state(const Eigen::MatrixXd& mu, const Eigen::VectorXd& var, Eigen::Index n)
{
  return {mu, var, Eigen::MatrixXd::Constant(n, mu.rows(), 1.0 / static_cast<double>(mu.rows()))};
}

GmmDataset small_instance(std::uint64_t seed)
{
  GmmParams p;
  p.n = 80;
  return generate_gmm(p, seed);
}

} // namespace

TEST_CASE("responsibility examples")
{
  Eigen::MatrixXd y(1, 2);
  y << 1.0, 0.0;
  Eigen::MatrixXd mu(2, 2);
  mu << 1.0, 0.0, -1.0, 0.0;
  const auto state = make_state(mu, Eigen::VectorXd::Zero(2), 1);
  const Eigen::MatrixXd r = update_responsibilities(y, state, make_prior(2, 2), 1.0);
  CHECK(r(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-14));
  CHECK(r(0, 0) == doctest::Approx(0.88080).epsilon(1e-5));

  Eigen::MatrixXd tied(2, 2);
  tied << 0.3, -0.2, 0.3, -0.2;
  Eigen::MatrixXd many = Eigen::MatrixXd::Random(7, 2) * 4.0;
  const Eigen::MatrixXd sym =
      update_responsibilities(many, make_state(tied, Eigen::VectorXd::Constant(2, 0.4), 7), make_prior(2, 2), 0.6);
  CHECK((sym.array() - 0.5).abs().maxCoeff() < 1e-15);

  const Eigen::MatrixXd one =
      update_responsibilities(many, make_state(tied.topRows(1), Eigen::VectorXd::Ones(1), 7), make_prior(2, 1), 0.6);
  CHECK((one.array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("responsibilities stay finite for distant points")
{
  Eigen::MatrixXd y(1, 1);
  y << 1e4;
  Eigen::MatrixXd mu(2, 1);
  mu << -1e4, 1e4;
  const Eigen::MatrixXd r = update_responsibilities(y, make_state(mu, Eigen::VectorXd::Ones(2), 1), make_prior(1, 2), 1.0);
  CHECK(r.allFinite());
  CHECK(r(0, 1) == 1.0);
}

TEST_CASE("component update examples")
{
  Eigen::MatrixXd y(2, 1);
  y << 0.0, 2.0;
  Eigen::MatrixXd resp(2, 2);
  resp << 1.0, 0.0, 1.0, 0.0;
  GmmPrior prior = make_prior(1, 2);
  prior.mu0 << 0.7;
  for (GmmUpdateRule rule : {GmmUpdateRule::Paper, GmmUpdateRule::Derived}) {
    const auto [mu, var] = update_components(y, resp, prior, 0.6, rule);
    CHECK(mu(1, 0) == 0.7);
    CHECK(var(1) == 50.0);
  }
  prior.mu0 << 0.0;
  const auto [mu, var] = update_components(y, resp, prior, 1.0, GmmUpdateRule::Derived);
  CHECK(var(0) == doctest::Approx(1.0 / 2.02).epsilon(1e-14));
  CHECK(var(0) == doctest::Approx(0.49505).epsilon(1e-5));
  CHECK(mu(0, 0) == doctest::Approx(0.99010).epsilon(1e-5));

  // Flat-prior limit at alpha = 1: weighted sample mean.
  Eigen::MatrixXd w(2, 2);
  w << 0.25, 0.75, 0.5, 0.5;
  const auto flat = update_components(y, w, make_prior(1, 2, 1e12), 1.0, GmmUpdateRule::Paper);
  CHECK(flat.first(0, 0) == doctest::Approx(1.0 / 0.75).epsilon(1e-9));
  CHECK(flat.first(1, 0) == doctest::Approx(1.0 / 1.25).epsilon(1e-9));
}

TEST_CASE("update rules differ away from alpha = 1 and coincide at alpha = 1")
{
  const GmmDataset ds = small_instance(3);
  CounterRng rng(4);
  Eigen::MatrixXd resp(ds.y.rows(), 3);
  for (Eigen::Index i = 0; i < resp.rows(); ++i) {
    const auto p = DiscreteDistribution::from_weights({rng.gamma(1), rng.gamma(1), rng.gamma(1)});
    for (int k = 0; k < 3; ++k) resp(i, k) = p[static_cast<std::size_t>(k)];
  }
  const auto a = update_components(ds.y, resp, ds.prior, 1.0, GmmUpdateRule::Paper);
  const auto b = update_components(ds.y, resp, ds.prior, 1.0, GmmUpdateRule::Derived);
  CHECK((a.first - b.first).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.second - b.second).cwiseAbs().maxCoeff() == 0.0);

  // Derived precision is 1/sigma0^2 + alpha N_k, the printed one 1/sigma0^2 + N_k / alpha.
  const auto p = update_components(ds.y, resp, ds.prior, 0.5, GmmUpdateRule::Paper);
  const auto d = update_components(ds.y, resp, ds.prior, 0.5, GmmUpdateRule::Derived);
  const double nk = resp.col(0).sum();
  CHECK(1.0 / p.second(0) == doctest::Approx(1.0 / 50.0 + 2.0 * nk).epsilon(1e-12));
  CHECK(1.0 / d.second(0) == doctest::Approx(1.0 / 50.0 + 0.5 * nk).epsilon(1e-12));

  AlphaConfig cfg;
  cfg.max_iters = 50;
  GmmOptions opt;
  opt.restarts = 1;
  opt.rule = GmmUpdateRule::Paper;
  const GmmFit fp = fit_gmm(ds.y, ds.prior, cfg, opt);
  opt.rule = GmmUpdateRule::Derived;
  const GmmFit fd = fit_gmm(ds.y, ds.prior, cfg, opt);
  CHECK((fp.state.mu_tilde - fd.state.mu_tilde).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single component matches the conjugate location posterior")
{
  CounterRng rng(5);
  Eigen::MatrixXd y(30, 2);
  for (Eigen::Index i = 0; i < y.rows(); ++i) y.row(i) << 1.5 + rng.normal(), -0.5 + rng.normal();
  GmmPrior prior = make_prior(2, 1, 4.0);
  prior.mu0 << 0.2, 0.1;
  for (double a : {0.5, 0.8, 1.0}) {
    AlphaConfig cfg;
    cfg.alpha = a;
    const GmmFit fit = fit_gmm(y, prior, cfg);
    for (int j = 0; j < 2; ++j) {
      std::vector<double> col(y.col(j).data(), y.col(j).data() + y.rows());
      const auto post = oracle::location_posterior(col, 1.0, prior.mu0(j), 4.0, a);
      CHECK(fit.state.mu_tilde(0, j) == doctest::Approx(post.mean).epsilon(1e-12));
      CHECK(fit.state.sigma_tilde_sq(0) == doctest::Approx(post.var).epsilon(1e-12));
    }
  }
}

TEST_CASE("ELBO is monotone and responsibilities stay on the simplex")
{
  int fits = 0;
  for (std::uint64_t inst = 0; inst < 50; ++inst) {
    const GmmDataset ds = small_instance(100 + inst);
    for (double a : {0.5, 0.7, 0.95, 1.0}) {
      AlphaConfig cfg;
      cfg.alpha = a;
      cfg.max_iters = 200;
      cfg.elbo_tol = 1e-10;
      const auto init = gmm_initial_state(ds.y, ds.prior, inst);
      const GmmFit fit = fit_gmm_from(ds.y, ds.prior, cfg, GmmUpdateRule::Derived, init);
      CHECK(fit.trace.max_decrease() <= 1e-8);
      const Eigen::VectorXd sums = fit.state.resp.rowwise().sum();
      CHECK((sums.array() - 1.0).abs().maxCoeff() <= 1e-10);
      CHECK(fit.state.resp.minCoeff() >= 0.0);
      CHECK(fit.state.sigma_tilde_sq.minCoeff() > 0.0);
      ++fits;
    }
  }
  CHECK(fits == 200);
}

TEST_CASE("permuting the initial labels permutes the fit")
{
  const GmmDataset ds = small_instance(9);
  AlphaConfig cfg;
  cfg.alpha = 0.7;
  cfg.max_iters = 30;
  const auto init = gmm_initial_state(ds.y, ds.prior, 1);
  GmmVariationalState perm = init;
  const std::vector<int> order{2, 0, 1};
  for (int k = 0; k < 3; ++k) {
    perm.mu_tilde.row(k) = init.mu_tilde.row(order[k]);
    perm.sigma_tilde_sq(k) = init.sigma_tilde_sq(order[k]);
    perm.resp.col(k) = init.resp.col(order[k]);
  }
  const GmmFit a = fit_gmm_from(ds.y, ds.prior, cfg, GmmUpdateRule::Derived, init);
  const GmmFit b = fit_gmm_from(ds.y, ds.prior, cfg, GmmUpdateRule::Derived, perm);
  for (int k = 0; k < 3; ++k) {
    CHECK((b.state.mu_tilde.row(k) - a.state.mu_tilde.row(order[k])).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((b.state.resp.col(k) - a.state.resp.col(order[k])).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(a.trace.values.back() == doctest::Approx(b.trace.values.back()).epsilon(1e-12));
}

TEST_CASE("fit is deterministic and recovers well-separated means")
{
  const GmmDataset ds = generate_gmm(GmmParams{}, 17);
  AlphaConfig cfg;
  cfg.alpha = 0.95;
  const GmmFit a = fit_gmm(ds.y, ds.prior, cfg);
  const GmmFit b = fit_gmm(ds.y, ds.prior, cfg);
  CHECK(a.state.mu_tilde == b.state.mu_tilde);
  CHECK(a.trace.converged());
  CHECK(a.trace.sweeps() < 10);
  CHECK(max_matched_error(a.state.mu_tilde, ds.means) < 0.3);
}

TEST_CASE("predictive density")
{
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  CHECK(predictive_density(zero, DiscreteDistribution::uniform(1), Eigen::VectorXd::Zero(1)) ==
        doctest::Approx(0.39894).epsilon(1e-5));

  Eigen::MatrixXd mu(2, 2);
  mu << -1.0, 0.5, 3.0, 2.5;
  const DiscreteDistribution pi = DiscreteDistribution::uniform(2);
  const Eigen::Vector2d mid(1.0, 1.5);
  CounterRng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Vector2d off(4.0 * rng.normal(), 4.0 * rng.normal());
    CHECK(predictive_density(mu, pi, mid + off) ==
          doctest::Approx(predictive_density(mu, pi, mid - off)).epsilon(1e-12));
  }

  const DiscreteDistribution skew({0.3, 0.7});
  const double mass = oracle::simpson2(
      [&](double a, double b) { return predictive_density(mu, skew, Eigen::Vector2d(a, b)); }, -20.0, 20.0, 800);
  CHECK(std::abs(mass - 1.0) < 1e-3);
}

TEST_CASE("minimal-cost assignment")
{
  Eigen::MatrixXd cost(3, 3);
  cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const auto a = min_cost_assignment(cost);
  CHECK(cost(a[0], 0) + cost(a[1], 1) + cost(a[2], 2) == 5.0);

  // Exhaustive check on random 5 x 5 costs.
  CounterRng rng(6);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd c(5, 5);
    for (Eigen::Index i = 0; i < 25; ++i) c.data()[i] = rng.uniform();
    std::vector<std::size_t> p{0, 1, 2, 3, 4};
    double best = 1e300;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < 5; ++i) s += c(static_cast<Eigen::Index>(p[i]), static_cast<Eigen::Index>(i));
      best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    const auto got = min_cost_assignment(c);
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += c(static_cast<Eigen::Index>(got[i]), static_cast<Eigen::Index>(i));
    CHECK(s == doctest::Approx(best).epsilon(1e-14));
  }

  Eigen::MatrixXd truth(3, 2);
  truth << 0, 0, 5, 5, -5, 5;
  Eigen::MatrixXd est(3, 2);
  est << -5.1, 5, 0.1, 0, 5, 5.2;
  CHECK(match_components(est, truth) == std::vector<std::size_t>{1, 2, 0});
  CHECK(max_matched_error(est, truth) == doctest::Approx(0.2).epsilon(1e-12));
}
