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
// Single-document LDA fixed point solved by damped iteration on gamma.
#ifndef ALPHAVB_TESTS_LDA_FIXED_POINT_HPP
#define ALPHAVB_TESTS_LDA_FIXED_POINT_HPP

#include <cmath>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

namespace oracle {

struct LdaDocFixedPoint
{
  std::vector<std::vector<double>> phi; // word slot x topic
  std::vector<double> gamma;
};

/// words/counts: the document; elog_beta[k][v]; returns the fixed point of
/// phi_nk ~ exp(elog_beta[k][w_n] + alpha (psi(gamma_k) - psi(sum gamma))),
/// gamma_k = eta + sum_n c_n phi_nk.
inline LdaDocFixedPoint lda_doc_fixed_point(const std::vector<int>& words,
                                            const std::vector<int>& counts,
                                            const std::vector<std::vector<double>>& elog_beta,
                                            double eta, double alpha, double damping = 0.5)
{
  const std::size_t K = elog_beta.size();
  LdaDocFixedPoint fp;
  fp.gamma.assign(K, 1.0);
  fp.phi.assign(words.size(), std::vector<double>(K, 1.0 / static_cast<double>(K)));
  for (int it = 0; it < 100000; ++it) {
    double total = 0.0;
    for (double g : fp.gamma) total += g;
    for (std::size_t n = 0; n < words.size(); ++n) {
      double z = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        fp.phi[n][k] = std::exp(elog_beta[k][static_cast<std::size_t>(words[n])] +
                                alpha * (boost::math::digamma(fp.gamma[k]) -
                                         boost::math::digamma(total)));
        z += fp.phi[n][k];
      }
      for (double& p : fp.phi[n]) p /= z;
    }
    double change = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double target = eta;
      for (std::size_t n = 0; n < words.size(); ++n) target += counts[n] * fp.phi[n][k];
      const double next = (1.0 - damping) * fp.gamma[k] + damping * target;
      change = std::max(change, std::abs(next - fp.gamma[k]));
      fp.gamma[k] = next;
    }
    if (change < 1e-14) break;
  }
  return fp;
}

} // namespace oracle

#endif
