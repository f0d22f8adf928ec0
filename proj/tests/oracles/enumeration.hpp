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
// Brute-force sums over every latent configuration of a tiny model.
#ifndef ALPHAVB_TESTS_ENUMERATION_HPP
#define ALPHAVB_TESTS_ENUMERATION_HPP

#include <cmath>
#include <vector>

#include "alphavb/divergence.hpp"
#include "alphavb/tiny_model.hpp"

namespace oracle {

/// Calls f(config) for every s^n in {0..K-1}^n.
template <class F>
void for_each_config(std::size_t n, std::size_t K, F f)
{
  std::vector<std::size_t> s(n, 0);
  while (true) {
    f(s);
    std::size_t i = 0;
    while (i < n && ++s[i] == K) s[i++] = 0;
    if (i == n) return;
  }
}

/// log p(y^n, s^n | theta_g).
inline double log_joint(const alphavb::TinyDiscreteModel& m, std::size_t g,
                        const std::vector<int>& y, const std::vector<std::size_t>& s)
{
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    acc += m.log_emission(g, s[i], y[i]) + m.log_mixing(g, s[i]);
  return acc;
}

/// Jensen gap sum_g q(g)[log p(y^n|g) - E_{q_S} log(p(y^n, S^n|g)/q_S(S^n))].
inline double jensen_gap(const alphavb::TinyDiscreteModel& m, const std::vector<int>& y,
                         const alphavb::DiscreteDistribution& q_theta,
                         const std::vector<alphavb::DiscreteDistribution>& q_latent)
{
  double gap = 0.0;
  for (std::size_t g = 0; g < m.grid_size(); ++g) {
    if (q_theta[g] == 0.0) continue;
    double evidence = 0.0;
    double fit = 0.0;
    for_each_config(y.size(), m.num_latent(), [&](const std::vector<std::size_t>& s) {
      const double lj = log_joint(m, g, y, s);
      evidence += std::exp(lj);
      double qs = 1.0;
      for (std::size_t i = 0; i < y.size(); ++i) qs *= q_latent[i][s[i]];
      if (qs > 0.0) fit += qs * (lj - std::log(qs));
    });
    gap += q_theta[g] * (std::log(evidence) - fit);
  }
  return gap;
}

/// KL(q_theta x q_S || fractional posterior) by summing over every (g, s^n).
inline double kl_to_fractional(const alphavb::TinyDiscreteModel& m, const std::vector<int>& y,
                               double alpha, const alphavb::DiscreteDistribution& q_theta,
                               const std::vector<alphavb::DiscreteDistribution>& q_latent)
{
  std::vector<double> logw;
  for (std::size_t g = 0; g < m.grid_size(); ++g)
    for_each_config(y.size(), m.num_latent(), [&](const std::vector<std::size_t>& s) {
      logw.push_back(std::log(m.prior()[g]) + alpha * log_joint(m, g, y, s));
    });
  double mx = logw[0];
  for (double v : logw) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : logw) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);

  double kl = 0.0;
  std::size_t idx = 0;
  for (std::size_t g = 0; g < m.grid_size(); ++g)
    for_each_config(y.size(), m.num_latent(), [&](const std::vector<std::size_t>& s) {
      double q = q_theta[g];
      for (std::size_t i = 0; i < y.size(); ++i) q *= q_latent[i][s[i]];
      if (q > 0.0) kl += q * (std::log(q) - (logw[idx] - log_z));
      ++idx;
    });
  return kl;
}

} // namespace oracle

#endif
