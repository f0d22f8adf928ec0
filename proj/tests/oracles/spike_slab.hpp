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
// Coordinate-at-a-time spike-and-slab mean-field sweep. Each step is the
// exact optimum of one (z_j, beta_j) factor, so any stationary point of the
// block solver must also be fixed under this sweep.
#ifndef ALPHAVB_TESTS_SPIKE_SLAB_HPP
#define ALPHAVB_TESTS_SPIKE_SLAB_HPP

#include <cmath>

#include "alphavb/linreg.hpp"

namespace oracle {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void coordinate_sweep(const alphavb::RegressionData& data, alphavb::SpikeSlabState& state,
                             double alpha, double inclusion_prior)
{
  const double s2 = data.sigma * data.sigma / alpha;
  const double prior_logit = std::log(inclusion_prior / (1.0 - inclusion_prior));
  Eigen::VectorXd resid = data.y - data.X * state.phi.cwiseProduct(state.mu);
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    const auto xj = data.X.col(j);
    resid += xj * (state.phi(j) * state.mu(j));
    state.sigma_sq(j) = s2 / (xj.squaredNorm() + 1.0 / state.nu1);
    state.mu(j) = state.sigma_sq(j) * xj.dot(resid) / s2;
    state.phi(j) = logistic(prior_logit + 0.5 * std::log(state.sigma_sq(j) / (state.nu1 * s2)) +
                            state.mu(j) * state.mu(j) / (2.0 * state.sigma_sq(j)));
    resid -= xj * (state.phi(j) * state.mu(j));
  }
}

} // namespace oracle

#endif
