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

#pragma once

#include "spb/data.hpp"

namespace spb {

// C(h) = sigma0_sq * exp(-h / theta)
struct ExponentialCov {
  double sigma0_sq = 1.0;
  double theta = 1.0;

  void validate() const;
  double operator()(double h) const;
};

// Matern with smoothness alpha, scale kappa and variance sigma_nu_sq:
//   sigma_nu_sq / (Gamma(alpha) 2^(alpha-1)) (kappa h)^alpha K_alpha(kappa h)
struct MaternCov {
  double sigma_nu_sq = 1.0;
  double kappa = 1.0;
  double alpha = 1.0;

  void validate() const;
  double operator()(double h) const;
};

// Throws ConfigError on h < 0.
double exp_cov(const ExponentialCov& c, double h);
double matern_cov(const MaternCov& c, double h);

// Modified Bessel function of the second kind. Half-integer orders use the
// terminating closed form; other orders defer to std::cyl_bessel_k.
double bessel_k(double order, double x);

// Thin-plate radial kernel d^2 log d, with the limit value 0 at d = 0.
double tps_kernel(const Location& a, const Location& b);
double tps_radial(double d);

}  // namespace spb
