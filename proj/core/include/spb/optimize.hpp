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

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace spb {

struct NelderMeadOptions {
  double initial_step = 0.5;
  int max_evaluations = 400;
  // Stop when the spread of simplex values falls below
  // ftol * (|f_best| + 1) and the simplex diameter below xtol.
  double ftol = 1e-9;
  double xtol = 1e-6;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double initial_value = 0.0;
  int evaluations = 0;
  bool converged = false;
  // Best value after each iteration.
  std::vector<double> trace;
};

// Derivative-free downhill simplex minimization. The starting point is a
// simplex vertex, so the returned value never exceeds f(x0). Non-finite
// objective values are treated as +infinity.
OptimResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                        const Eigen::VectorXd& x0, const NelderMeadOptions& opt = {});

}  // namespace spb
