/*
 * Copyright 2026 The spatialbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "spb/kernels.hpp"

#include <cmath>
#include <numbers>

#include "spb/error.hpp"

namespace spb {

void ExponentialCov::validate() const {
  if (!(sigma0_sq > 0.0) || !(theta > 0.0) || !std::isfinite(sigma0_sq) || !std::isfinite(theta)) {
    throw ConfigError("exponential covariance needs sigma0_sq > 0 and theta > 0");
  }
}

double ExponentialCov::operator()(double h) const { return exp_cov(*this, h); }

void MaternCov::validate() const {
  if (!(sigma_nu_sq > 0.0) || !(kappa > 0.0) || !(alpha > 0.0)) {
    throw ConfigError("Matern covariance needs positive sigma_nu_sq, kappa and alpha");
  }
}

double MaternCov::operator()(double h) const { return matern_cov(*this, h); }

double exp_cov(const ExponentialCov& c, double h) {
  if (h < 0.0 || std::isnan(h)) throw ConfigError("covariance lag must be non-negative");
  return c.sigma0_sq * std::exp(-h / c.theta);
}

double bessel_k(double order, double x) {
  if (!(x > 0.0)) throw ConfigError("bessel_k needs x > 0");
  const double nu = std::abs(order);
  const double twice = 2.0 * nu;
  if (std::abs(twice - std::round(twice)) < 1e-14 && std::llround(twice) % 2 == 1) {
    // K_{n+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_k (n+k)! / (k! (n-k)! (2x)^k)
    const auto n = static_cast<int>(std::llround(nu - 0.5));
    double sum = 0.0;
    double term = 1.0;
    for (int k = 0; k <= n; ++k) {
      if (k > 0) {
        term *= static_cast<double>((n + k) * (n - k + 1)) / (static_cast<double>(k) * 2.0 * x);
      }
      sum += term;
    }
    return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
  }
  return std::cyl_bessel_k(nu, x);
}

double matern_cov(const MaternCov& c, double h) {
  if (h < 0.0 || std::isnan(h)) throw ConfigError("covariance lag must be non-negative");
  if (h == 0.0) return c.sigma_nu_sq;
  const double t = c.kappa * h;
  if (t > 700.0) return 0.0;
  const double norm = std::tgamma(c.alpha) * std::pow(2.0, c.alpha - 1.0);
  return c.sigma_nu_sq / norm * std::pow(t, c.alpha) * bessel_k(c.alpha, t);
}

double tps_radial(double d) {
  if (d <= 0.0) return 0.0;
  return d * d * std::log(d);
}

double tps_kernel(const Location& a, const Location& b) { return tps_radial(distance(a, b)); }

}  // namespace spb
