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
#ifndef ALPHAVB_NUMERIC_HPP
#define ALPHAVB_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <boost/math/special_functions/digamma.hpp>

namespace alphavb {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

inline double log_sum_exp(std::span<const double> v)
{
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// In-place softmax of log-weights; the max is subtracted first.
inline void normalize_log_weights(std::span<double> v)
{
  const double lse = log_sum_exp(v);
  for (double& x : v) x = std::exp(x - lse);
}

inline double logistic(double x)
{
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double digamma(double x) { return boost::math::digamma(x); }

/// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Binary entropy contribution p log(p/r) + (1-p) log((1-p)/(1-r)).
inline double bernoulli_kl(double p, double r)
{
  return xlogx(p) - p * std::log(r) + xlogx(1.0 - p) - (1.0 - p) * std::log1p(-r);
}

} // namespace alphavb

#endif
