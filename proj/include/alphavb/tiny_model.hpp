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
#ifndef ALPHAVB_TINY_MODEL_HPP
#define ALPHAVB_TINY_MODEL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alphavb/divergence.hpp"
#include "alphavb/objective.hpp"
#include "alphavb/rng.hpp"

namespace alphavb {

/// One grid point theta = (mu, pi): a K x |Y| emission table and mixing weights.
struct TinyParameter
{
  std::vector<std::vector<double>> emission;
  std::vector<double> mixing;
};

/// Fully enumerable latent-variable model: finite parameter grid, K latent
/// states per observation, finite observation alphabet {0, ..., |Y|-1}.
class TinyDiscreteModel
{
public:
  static constexpr double kEnumerationBudget = 1e7;

  TinyDiscreteModel(std::vector<TinyParameter> grid, DiscreteDistribution prior,
                    std::size_t truth_index);

  /// Binary observations with P(y = 1 | s) = means[g][s].
  static TinyDiscreteModel bernoulli(const std::vector<std::vector<double>>& means,
                                     const std::vector<std::vector<double>>& mixings,
                                     DiscreteDistribution prior, std::size_t truth_index);

  std::size_t grid_size() const noexcept { return grid_.size(); }
  std::size_t num_latent() const noexcept { return num_latent_; }
  std::size_t obs_size() const noexcept { return obs_size_; }
  std::size_t truth_index() const noexcept { return truth_; }
  const DiscreteDistribution& prior() const noexcept { return prior_; }
  const TinyParameter& parameter(std::size_t g) const { return grid_.at(g); }

  double log_emission(std::size_t g, std::size_t s, int y) const;
  double log_mixing(std::size_t g, std::size_t s) const;
  double log_marginal(std::size_t g, int y) const;
  /// Per-observation distribution p(. | theta_g) over the alphabet.
  DiscreteDistribution marginal(std::size_t g) const;

  /// n i.i.d. observations from the truth.
  std::vector<int> sample(std::size_t n, CounterRng& rng) const;

  /// Hooks for the generic objective code: theta is a 1-vector holding the
  /// grid index, an observation is a 1-vector holding the symbol.
  ModelSpec model_spec() const;
  std::vector<Theta> grid_atoms() const;
  static std::vector<Observation> encode(std::span<const int> data);

  /// Throws BudgetExceeded when grid_size * K^n exceeds the enumeration budget.
  void check_budget(std::size_t n) const;

private:
  std::vector<TinyParameter> grid_;
  DiscreteDistribution prior_;
  std::size_t truth_;
  std::size_t num_latent_;
  std::size_t obs_size_;
};

/// Joint alpha-fractional posterior over (grid point, latent configuration).
struct FractionalPosterior
{
  std::size_t num_latent = 0;
  std::size_t n = 0;
  /// Rows: grid points; columns: configurations s^n in base-K order (s_1 least significant).
  Eigen::MatrixXd prob;
  /// log of sum over (theta, s^n) of [p(Y|mu,s^n) pi_{s^n}]^alpha p_theta(theta).
  double log_normalizer = 0.0;

  std::vector<std::size_t> config(std::size_t c) const;
  DiscreteDistribution theta_marginal() const;
};

FractionalPosterior fractional_posterior_exact(const TinyDiscreteModel& model,
                                               std::span<const int> data, double alpha);

/// KL(q_theta x prod_i q_{S_i} || fractional posterior), by enumeration.
double kl_to_fractional_posterior(const FractionalPosterior& post,
                                  const DiscreteDistribution& q_theta,
                                  std::span<const DiscreteDistribution> q_latent);

} // namespace alphavb

#endif
