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
#include <limits>

#include "alphavb/optimize.hpp"

using namespace alphavb;

TEST_CASE("quadratic minimum")
{
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::Vector3d b(1.0, -2.0, 0.5);
  auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(A * x) - b.dot(x); };
  const MinimizeResult r = minimize_bfgs(f, Eigen::VectorXd::Zero(3), 500, 1e-8);
  CHECK(r.converged);
  CHECK((r.x - A.ldlt().solve(b)).norm() < 1e-6);
}

TEST_CASE("Rosenbrock")
{
  auto f = [](const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
  };
  const MinimizeResult r = minimize_bfgs(f, Eigen::Vector2d(-1.2, 1.0), 5000, 1e-7);
  CHECK((r.x - Eigen::Vector2d(1.0, 1.0)).norm() < 1e-4);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] < r.trace[i - 1]);
  CHECK(r.value == r.trace.back());
}

TEST_CASE("non-finite regions are avoided")
{
  auto f = [](const Eigen::VectorXd& x) {
    if (x(0) <= 0.0) return std::numeric_limits<double>::infinity();
    return x(0) - std::log(x(0));
  };
  const MinimizeResult r = minimize_bfgs(f, Eigen::VectorXd::Constant(1, 5.0), 500, 1e-8);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(std::isfinite(r.value));
}

TEST_CASE("budget is respected")
{
  int calls = 0;
  auto f = [&](const Eigen::VectorXd& x) {
    ++calls;
    return std::cosh(x(0)) + std::cosh(x(1) - 3.0);
  };
  const MinimizeResult r = minimize_bfgs(f, Eigen::Vector2d(10.0, -10.0), 40, 1e-12);
  CHECK(r.evaluations <= 40);
  CHECK(calls == r.evaluations);
  CHECK_FALSE(r.converged);
}
