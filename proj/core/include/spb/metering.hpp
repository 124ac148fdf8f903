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

#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <thread>

namespace spb {

struct MeterReading {
  double cpu_minutes = 0.0;                // wall-clock duration of the job
  std::optional<double> peak_memory_mb;    // absent when unsupported
  std::string memory_method;               // "vmhwm-reset", "rss-sampling" or "unsupported"
};

// Measures one job: elapsed wall-clock time and the peak resident set size
// reached while it ran.
class Meter {
 public:
  Meter();
  ~Meter();
  Meter(const Meter&) = delete;
  Meter& operator=(const Meter&) = delete;

  MeterReading stop();

 private:
  std::chrono::steady_clock::time_point start_;
  bool hwm_reset_ = false;
  std::atomic<bool> sampling_{false};
  std::atomic<long> sampled_peak_kb_{0};
  std::thread sampler_;
  bool stopped_ = false;
};

MeterReading meter(const std::function<void()>& job);

// Current and peak resident set size from /proc/self/status, in kB.
std::optional<long> current_rss_kb();
std::optional<long> peak_rss_kb();

std::string platform_string();

}  // namespace spb
