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
#include "alphavb/tiny_model.hpp"

#include <cmath>
#include <limits>

#include "alphavb/errors.hpp"
#include "alphavb/numeric.hpp"

namespace alphavb {

TinyDiscreteModel::TinyDiscreteModel(std::vector<TinyParameter> grid, DiscreteDistribution prior,
                                     std::size_t truth_index)
    : grid_(std::move(grid)), prior_(std::move(prior)), truth_(truth_index)
{
  require(!grid_.empty(), "parameter grid is empty");
  if (prior_.size() != grid_.size()) throw DimensionMismatch("prior length differs from grid size");
  require(truth_ < grid_.size(), "truth index outside the grid");
  num_latent_ = grid_.front().mixing.size();
  require(num_latent_ >= 1, "need at least one latent state");
  require(!grid_.front().emission.empty(), "emission table is empty");
  obs_size_ = grid_.front().emission.front().size();
  for (const auto& g : grid_) {
    (void)DiscreteDistribution(g.mixing);
    if (g.mixing.size() != num_latent_ || g.emission.size() != num_latent_)
      throw DimensionMismatch("every grid point needs K emission rows and K mixing weights");
    for (const auto& row : g.emission) {
      if (row.size() != obs_size_) throw DimensionMismatch("emission rows differ in length");
      (void)DiscreteDistribution(row);
    }
  }
}

TinyDiscreteModel TinyDiscreteModel::bernoulli(const std::vector<std::vector<double>>& means,
                                               const std::vector<std::vector<double>>& mixings,
                                               DiscreteDistribution prior, std::size_t truth_index)
{
  if (means.size() != mixings.size()) throw DimensionMismatch("means and mixings differ in length");
  std::vector<TinyParameter> grid;
  for (std::size_t g = 0; g < means.size(); ++g) {
    TinyParameter p;
    for (double m : means[g]) {
      require(m >= 0.0 && m <= 1.0, "Bernoulli mean outside [0, 1]");
      p.emission.push_back({1.0 - m, m});
    }
    p.mixing = mixings[g];
    grid.push_back(std::move(p));
  }
  return TinyDiscreteModel(std::move(grid), std::move(prior), truth_index);
}

double TinyDiscreteModel::log_emission(std::size_t g, std::size_t s, int y) const
{
  return std::log(grid_[g].emission[s][static_cast<std::size_t>(y)]);
}

double TinyDiscreteModel::log_mixing(std::size_t g, std::size_t s) const
{
  return std::log(grid_[g].mixing[s]);
}

double TinyDiscreteModel::log_marginal(std::size_t g, int y) const
{
  std::vector<double> t(num_latent_);
  for (std::size_t s = 0; s < num_latent_; ++s) t[s] = log_emission(g, s, y) + log_mixing(g, s);
  return log_sum_exp(t);
}

DiscreteDistribution TinyDiscreteModel::marginal(std::size_t g) const
{
  std::vector<double> p(obs_size_, 0.0);
  for (std::size_t s = 0; s < num_latent_; ++s)
    for (std::size_t y = 0; y < obs_size_; ++y) p[y] += grid_[g].mixing[s] * grid_[g].emission[s][y];
  return DiscreteDistribution::from_weights(std::move(p));
}

std::vector<int> TinyDiscreteModel::sample(std::size_t n, CounterRng& rng) const
{
  const auto& truth = grid_[truth_];
  std::vector<int> out(n);
  for (auto& y : out) {
    const std::size_t s = rng.categorical(truth.mixing);
    y = static_cast<int>(rng.categorical(truth.emission[s]));
  }
  return out;
}

ModelSpec TinyDiscreteModel::model_spec() const
{
  ModelSpec m;
  m.num_latent = num_latent_;
  auto self = *this;
  auto index = [](const Theta& th) { return static_cast<std::size_t>(std::lround(th(0))); };
  m.log_lik = [self, index](const Observation& y, const Theta& th, std::size_t s) {
    return self.log_emission(index(th), s, static_cast<int>(std::lround(y(0))));
  };
  m.log_latent_prior = [self, index](std::size_t s, const Theta& th) {
    return self.log_mixing(index(th), s);
  };
  m.prior_log_density = [self, index](const Theta& th) {
    return std::log(self.prior_[index(th)]);
  };
  m.prior_sampler = [self](CounterRng& rng) {
    Theta th(1);
    th(0) = static_cast<double>(rng.categorical(self.prior_.probs()));
    return th;
  };
  return m;
}

std::vector<Theta> TinyDiscreteModel::grid_atoms() const
{
  std::vector<Theta> atoms;
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    Theta th(1);
    th(0) = static_cast<double>(g);
    atoms.push_back(th);
  }
  return atoms;
}

std::vector<Observation> TinyDiscreteModel::encode(std::span<const int> data)
{
  std::vector<Observation> out;
  for (int y : data) {
    Observation o(1);
    o(0) = y;
    out.push_back(o);
  }
  return out;
}

void TinyDiscreteModel::check_budget(std::size_t n) const
{
  const double cells = static_cast<double>(grid_.size()) *
                       std::pow(static_cast<double>(num_latent_), static_cast<double>(n));
  if (cells > kEnumerationBudget)
    throw BudgetExceeded("enumeration of grid x K^n exceeds the 1e7-cell budget");
}

std::vector<std::size_t> FractionalPosterior::config(std::size_t c) const
{
  std::vector<std::size_t> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = c % num_latent;
    c /= num_latent;
  }
  return s;
}

DiscreteDistribution FractionalPosterior::theta_marginal() const
{
  std::vector<double> w(static_cast<std::size_t>(prob.rows()));
  for (Eigen::Index g = 0; g < prob.rows(); ++g) w[static_cast<std::size_t>(g)] = prob.row(g).sum();
  return DiscreteDistribution::from_weights(std::move(w));
}

namespace {

std::size_t count_configs(std::size_t k, std::size_t n)
{
  std::size_t c = 1;
  for (std::size_t i = 0; i < n; ++i) c *= k;
  return c;
}

} // namespace

FractionalPosterior fractional_posterior_exact(const TinyDiscreteModel& model,
                                               std::span<const int> data, double alpha)
{
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  model.check_budget(data.size());
  const std::size_t k = model.num_latent();
  const std::size_t n = data.size();
  const std::size_t configs = count_configs(k, n);
  const std::size_t grid = model.grid_size();

  FractionalPosterior post;
  post.num_latent = k;
  post.n = n;
  post.prob.resize(static_cast<Eigen::Index>(grid), static_cast<Eigen::Index>(configs));

  std::vector<double> logw;
  logw.reserve(grid * configs);
  for (std::size_t g = 0; g < grid; ++g) {
    const double log_prior = std::log(model.prior()[g]);
    for (std::size_t c = 0; c < configs; ++c) {
      std::size_t code = c;
      double joint = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = code % k;
        code /= k;
        joint += model.log_emission(g, s, data[i]) + model.log_mixing(g, s);
      }
      logw.push_back(alpha * joint + log_prior);
    }
  }
  post.log_normalizer = log_sum_exp(logw);
  for (std::size_t g = 0; g < grid; ++g)
    for (std::size_t c = 0; c < configs; ++c)
      post.prob(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(c)) =
          std::exp(logw[g * configs + c] - post.log_normalizer);
  return post;
}

double kl_to_fractional_posterior(const FractionalPosterior& post,
                                  const DiscreteDistribution& q_theta,
                                  std::span<const DiscreteDistribution> q_latent)
{
  if (static_cast<Eigen::Index>(q_theta.size()) != post.prob.rows())
    throw DimensionMismatch("q_theta length differs from grid size");
  if (q_latent.size() != post.n) throw DimensionMismatch("need one latent factor per observation");
  double kl = 0.0;
  for (Eigen::Index c = 0; c < post.prob.cols(); ++c) {
    const auto s = post.config(static_cast<std::size_t>(c));
    double qs = 1.0;
    for (std::size_t i = 0; i < post.n; ++i) qs *= q_latent[i][s[i]];
    if (qs == 0.0) continue;
    for (Eigen::Index g = 0; g < post.prob.rows(); ++g) {
      const double qt = q_theta[static_cast<std::size_t>(g)];
      if (qt == 0.0) continue;
      const double p = post.prob(g, c);
      if (p == 0.0) return std::numeric_limits<double>::infinity();
      kl += qt * qs * (std::log(qt * qs) - std::log(p));
    }
  }
  return kl;
}

} // namespace alphavb
