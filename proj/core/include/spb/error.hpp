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

#include <stdexcept>
#include <string>

namespace spb {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, invariant violations on datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad configuration values or unknown method tags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Factorization breakdown, singular systems, non-finite likelihoods.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A method refused to run at the requested problem size.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace spb
