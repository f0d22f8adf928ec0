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
#include "alphavb/gmm.hpp"

#include <cmath>
#include <limits>

#include "alphavb/errors.hpp"
#include "alphavb/numeric.hpp"
#include "alphavb/rng.hpp"

namespace alphavb {

void GmmPrior::validate(Eigen::Index dim) const
{
  require(sigma0_sq > 0.0, "sigma0_sq must be positive");
  require(pi.size() >= 1, "need at least one component");
  if (mu0.size() != dim) throw DimensionMismatch("mu0 dimension differs from data dimension");
}

GmmUpdateRule parse_gmm_update_rule(const std::string& name)
{
  if (name == "paper") return GmmUpdateRule::Paper;
  if (name == "derived") return GmmUpdateRule::Derived;
  throw InvalidArgument("unknown gmm_update_rule '" + name + "' (expected paper or derived)");
}

std::string to_string(GmmUpdateRule rule)
{
  return rule == GmmUpdateRule::Paper ? "paper" : "derived";
}

Eigen::MatrixXd update_responsibilities(const Eigen::MatrixXd& data,
                                        const GmmVariationalState& state, const GmmPrior& prior,
                                        double alpha)
{
  const Eigen::Index n = data.rows();
  const Eigen::Index k = state.mu_tilde.rows();
  const double d = static_cast<double>(data.cols());
  if (state.mu_tilde.cols() != data.cols()) throw DimensionMismatch("mean dimension mismatch");
  if (static_cast<std::size_t>(k) != prior.pi.size())
    throw DimensionMismatch("state and prior disagree on K");

  Eigen::VectorXd offset(k);
  for (Eigen::Index j = 0; j < k; ++j)
    offset(j) = std::log(prior.pi[static_cast<std::size_t>(j)]) -
                0.5 * (state.mu_tilde.row(j).squaredNorm() + d * state.sigma_tilde_sq(j));
  Eigen::MatrixXd logits = data * state.mu_tilde.transpose();
  logits.rowwise() += offset.transpose();
  logits *= alpha;

  Eigen::MatrixXd resp(n, k);
  std::vector<double> row(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) row[static_cast<std::size_t>(j)] = logits(i, j);
    normalize_log_weights(row);
    for (Eigen::Index j = 0; j < k; ++j) resp(i, j) = row[static_cast<std::size_t>(j)];
  }
  return resp;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd>
update_components(const Eigen::MatrixXd& data, const Eigen::MatrixXd& resp,
                  const GmmPrior& prior, double alpha, GmmUpdateRule rule)
{
  if (resp.rows() != data.rows()) throw DimensionMismatch("resp rows differ from data rows");
  const Eigen::Index k = resp.cols();
  const double c_count = rule == GmmUpdateRule::Paper ? 1.0 / alpha : alpha;
  const double c_sum = rule == GmmUpdateRule::Paper ? 1.0 : alpha;

  const Eigen::VectorXd counts = resp.colwise().sum().transpose();
  const Eigen::MatrixXd sums = resp.transpose() * data; // K x d
  Eigen::MatrixXd mu(k, data.cols());
  Eigen::VectorXd var(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    var(j) = 1.0 / (1.0 / prior.sigma0_sq + c_count * counts(j));
    mu.row(j) = var(j) * (prior.mu0.transpose() / prior.sigma0_sq + c_sum * sums.row(j));
  }
  return {mu, var};
}

double gmm_elbo(const Eigen::MatrixXd& data, const GmmVariationalState& state,
                const GmmPrior& prior, double alpha)
{
  const Eigen::Index n = data.rows();
  const Eigen::Index k = state.mu_tilde.rows();
  const double d = static_cast<double>(data.cols());
  double fit = 0.0;
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double r = state.resp(i, j);
      if (r == 0.0) continue;
      const double sq = (data.row(i) - state.mu_tilde.row(j)).squaredNorm();
      fit += r * (std::log(prior.pi[static_cast<std::size_t>(j)]) - 0.5 * d * kLog2Pi -
                  0.5 * (sq + d * state.sigma_tilde_sq(j)));
      entropy -= xlogx(r);
    }
  double kl = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double v = state.sigma_tilde_sq(j);
    kl += 0.5 * (d * v / prior.sigma0_sq +
                 (state.mu_tilde.row(j) - prior.mu0.transpose()).squaredNorm() / prior.sigma0_sq -
                 d + d * std::log(prior.sigma0_sq / v));
  }
  return alpha * fit + entropy - kl;
}

namespace {

GmmVariationalState seeded_state(const Eigen::MatrixXd& data, const GmmPrior& prior,
                                 std::uint64_t seed, bool weighted)
{
  const Eigen::Index n = data.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(prior.num_components());
  require(n >= 1, "need at least one observation");

  CounterRng rng(seed, 0x676d6d);
  std::vector<Eigen::Index> centers;
  centers.push_back(static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(n)));
  Eigen::VectorXd nearest = (data.rowwise() - data.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<Eigen::Index>(centers.size()) < k) {
    Eigen::Index next = 0;
    if (weighted && nearest.sum() > 0.0)
      next = static_cast<Eigen::Index>(
          rng.categorical({nearest.data(), static_cast<std::size_t>(nearest.size())}));
    else
      nearest.maxCoeff(&next);
    centers.push_back(next);
    nearest = nearest.cwiseMin((data.rowwise() - data.row(next)).rowwise().squaredNorm());
  }

  GmmVariationalState s;
  s.mu_tilde.resize(k, data.cols());
  for (Eigen::Index j = 0; j < k; ++j)
    s.mu_tilde.row(j) = data.row(centers[static_cast<std::size_t>(j)]);
  s.sigma_tilde_sq = Eigen::VectorXd::Constant(k, prior.sigma0_sq);
  s.resp = Eigen::MatrixXd::Constant(n, k, 1.0 / static_cast<double>(k));
  return s;
}

} // namespace

GmmVariationalState gmm_initial_state(const Eigen::MatrixXd& data, const GmmPrior& prior,
                                      std::uint64_t seed)
{
  return seeded_state(data, prior, seed, false);
}

GmmVariationalState gmm_kmeanspp_state(const Eigen::MatrixXd& data, const GmmPrior& prior,
                                       std::uint64_t seed)
{
  return seeded_state(data, prior, seed, true);
}

GmmFit fit_gmm_from(const Eigen::MatrixXd& data, const GmmPrior& prior, const AlphaConfig& cfg,
                    GmmUpdateRule rule, GmmVariationalState init)
{
  cfg.validate();
  require(data.rows() >= 1, "need at least one observation");
  prior.validate(data.cols());
  const auto k = static_cast<Eigen::Index>(prior.num_components());
  if (init.mu_tilde.rows() != k || init.sigma_tilde_sq.size() != k)
    throw DimensionMismatch("initial state has the wrong number of components");

  GmmFit out;
  out.state = std::move(init);
  for (int it = 0; it < cfg.max_iters; ++it) {
    out.state.resp = update_responsibilities(data, out.state, prior, cfg.alpha);
    std::tie(out.state.mu_tilde, out.state.sigma_tilde_sq) =
        update_components(data, out.state.resp, prior, cfg.alpha, rule);
    if (out.trace.push(gmm_elbo(data, out.state, prior, cfg.alpha), cfg.elbo_tol)) break;
  }
  return out;
}

GmmFit fit_gmm(const Eigen::MatrixXd& data, const GmmPrior& prior, const AlphaConfig& cfg,
               const GmmOptions& options, const std::optional<GmmVariationalState>& init)
{
  if (init) return fit_gmm_from(data, prior, cfg, options.rule, *init);
  require(options.restarts >= 1, "restarts must be at least 1");
  GmmFit best = fit_gmm_from(data, prior, cfg, options.rule, gmm_initial_state(data, prior, cfg.seed));
  for (int r = 1; r < options.restarts; ++r) {
    GmmFit cand = fit_gmm_from(data, prior, cfg, options.rule,
                               gmm_kmeanspp_state(data, prior, mix_seed(cfg.seed, static_cast<std::uint64_t>(r))));
    if (cand.trace.values.back() > best.trace.values.back()) best = std::move(cand);
  }
  return best;
}

double predictive_density(const Eigen::MatrixXd& means, const DiscreteDistribution& pi,
                          const Eigen::VectorXd& y)
{
  if (static_cast<std::size_t>(means.rows()) != pi.size())
    throw DimensionMismatch("means and weights disagree on K");
  const double d = static_cast<double>(y.size());
  double p = 0.0;
  for (Eigen::Index j = 0; j < means.rows(); ++j)
    p += pi[static_cast<std::size_t>(j)] *
         std::exp(-0.5 * d * kLog2Pi - 0.5 * (y.transpose() - means.row(j)).squaredNorm());
  return p;
}

std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost)
{
  if (cost.rows() != cost.cols()) throw DimensionMismatch("cost matrix must be square");
  const std::size_t m = static_cast<std::size_t>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials u (columns of truth), v (estimates); 1-based with a sentinel 0.
  std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  for (std::size_t c = 1; c <= m; ++c) {
    owner[0] = c;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t c0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(c0 - 1)) -
                           u[c0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> perm(m);
  for (std::size_t j = 1; j <= m; ++j) perm[owner[j] - 1] = j - 1;
  return perm;
}

std::vector<std::size_t> match_components(const Eigen::MatrixXd& estimated,
                                          const Eigen::MatrixXd& truth)
{
  if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols())
    throw DimensionMismatch("estimated and true means differ in shape");
  Eigen::MatrixXd cost(estimated.rows(), truth.rows());
  for (Eigen::Index r = 0; r < estimated.rows(); ++r)
    for (Eigen::Index c = 0; c < truth.rows(); ++c)
      cost(r, c) = (estimated.row(r) - truth.row(c)).norm();
  return min_cost_assignment(cost);
}

double max_matched_error(const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& truth)
{
  const auto perm = match_components(estimated, truth);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < truth.rows(); ++c)
    worst = std::max(worst,
                     (estimated.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(c)])) -
                      truth.row(c))
                         .norm());
  return worst;
}

} // namespace alphavb
