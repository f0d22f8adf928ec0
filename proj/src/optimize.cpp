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
#include "alphavb/optimize.hpp"

#include <cmath>
#include <limits>

namespace alphavb {

namespace {

class Counted
{
public:
  Counted(const std::function<double(const Eigen::VectorXd&)>& f, int budget) : f_(f), budget_(budget) {}

  bool exhausted() const noexcept { return used_ >= budget_; }
  int remaining() const noexcept { return budget_ - used_; }
  int used() const noexcept { return used_; }

  double operator()(const Eigen::VectorXd& x)
  {
    ++used_;
    const double v = f_(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

private:
  const std::function<double(const Eigen::VectorXd&)>& f_;
  int budget_;
  int used_ = 0;
};

Eigen::VectorXd gradient(Counted& f, const Eigen::VectorXd& x)
{
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

} // namespace

MinimizeResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& fn,
                             Eigen::VectorXd x0, int max_evaluations, double grad_tol)
{
  Counted f(fn, max_evaluations);
  MinimizeResult out;
  out.x = std::move(x0);
  out.value = f(out.x);
  out.trace.push_back(out.value);
  const Eigen::Index p = out.x.size();
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(p, p);
  const int gradient_cost = 2 * static_cast<int>(p);
  if (f.remaining() < gradient_cost + 1) {
    out.evaluations = f.used();
    return out;
  }
  Eigen::VectorXd g = gradient(f, out.x);

  while (!f.exhausted()) {
    if (g.cwiseAbs().maxCoeff() < grad_tol) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = -h_inv * g;
    if (dir.dot(g) >= 0.0) {
      h_inv.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    // Keep enough budget for the gradient at an accepted point.
    for (int tries = 0; tries < 40 && f.remaining() > gradient_cost; ++tries) {
      x_new = out.x + step * dir;
      f_new = f(x_new);
      if (f_new < out.value + 1e-4 * step * dir.dot(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!h_inv.isIdentity()) {
        h_inv.setIdentity();
        continue;
      }
      out.converged = f.remaining() > gradient_cost && g.cwiseAbs().maxCoeff() < std::sqrt(grad_tol);
      break;
    }
    const Eigen::VectorXd g_new = gradient(f, x_new);
    const Eigen::VectorXd s = x_new - out.x;
    const Eigen::VectorXd y = g_new - g;
    out.x = x_new;
    out.value = f_new;
    out.trace.push_back(f_new);
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(p, p) - rho * s * y.transpose();
      h_inv = e * h_inv * e.transpose() + rho * s * s.transpose();
    }
  }
  out.evaluations = f.used();
  return out;
}

} // namespace alphavb
