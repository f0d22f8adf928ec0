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
#ifndef ALPHAVB_OPTIMIZE_HPP
#define ALPHAVB_OPTIMIZE_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace alphavb {

struct MinimizeResult
{
  Eigen::VectorXd x;
  double value = 0.0;
  /// Objective at the start and after every accepted step (nonincreasing).
  std::vector<double> trace;
  int evaluations = 0;
  bool converged = false;
};

/// BFGS with central-difference gradients and backtracking. Only strictly
/// improving steps are accepted; non-finite values count as failures.
/// Stops when the gradient sup-norm falls below grad_tol, when no step
/// improves, or when max_evaluations is spent.
MinimizeResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                             Eigen::VectorXd x0, int max_evaluations, double grad_tol);

} // namespace alphavb

#endif
