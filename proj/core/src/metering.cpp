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

#include "spb/metering.hpp"

#include <fstream>
#include <sstream>

#include <sys/utsname.h>

namespace spb {

namespace {

std::optional<long> status_field(const std::string& key) {
  std::ifstream in("/proc/self/status");
  if (!in) return std::nullopt;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ":", 0) == 0) {
      std::istringstream ss(line.substr(key.size() + 1));
      long kb = 0;
      if (ss >> kb) return kb;
    }
  }
  return std::nullopt;
}

bool reset_high_water_mark() {
  std::ofstream out("/proc/self/clear_refs");
  if (!out) return false;
  out << "5";
  out.flush();
  if (!out) return false;
  // The reset only counts if VmHWM dropped back to the current RSS.
  const auto hwm = status_field("VmHWM");
  const auto rss = status_field("VmRSS");
  return hwm && rss && *hwm <= *rss + 256;
}

}  // namespace

std::optional<long> current_rss_kb() { return status_field("VmRSS"); }
std::optional<long> peak_rss_kb() { return status_field("VmHWM"); }

Meter::Meter() : start_(std::chrono::steady_clock::now()) {
  hwm_reset_ = reset_high_water_mark();
  if (!hwm_reset_ && current_rss_kb()) {
    sampled_peak_kb_ = *current_rss_kb();
    sampling_ = true;
    sampler_ = std::thread([this] {
      while (sampling_) {
        if (const auto rss = current_rss_kb()) {
          long prev = sampled_peak_kb_.load();
          while (*rss > prev && !sampled_peak_kb_.compare_exchange_weak(prev, *rss)) {
          }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
    });
  }
}

Meter::~Meter() {
  if (!stopped_) stop();
}

MeterReading Meter::stop() {
  MeterReading r;
  const auto elapsed = std::chrono::steady_clock::now() - start_;
  r.cpu_minutes = std::chrono::duration<double>(elapsed).count() / 60.0;
  if (hwm_reset_) {
    if (const auto hwm = peak_rss_kb()) {
      r.peak_memory_mb = static_cast<double>(*hwm) / 1024.0;
      r.memory_method = "vmhwm-reset";
    }
  } else if (sampling_) {
    sampling_ = false;
    if (sampler_.joinable()) sampler_.join();
    if (const auto rss = current_rss_kb()) {
      long prev = sampled_peak_kb_.load();
      if (*rss > prev) sampled_peak_kb_ = *rss;
    }
    r.peak_memory_mb = static_cast<double>(sampled_peak_kb_.load()) / 1024.0;
    r.memory_method = "rss-sampling";
  }
  if (!r.peak_memory_mb) r.memory_method = "unsupported";
  stopped_ = true;
  return r;
}

MeterReading meter(const std::function<void()>& job) {
  Meter m;
  job();
  return m.stop();
}

std::string platform_string() {
  utsname u{};
  std::string s;
  if (uname(&u) == 0) s = std::string(u.sysname) + " " + u.release + " " + u.machine;
  else s = "unknown";
#if defined(__clang__)
  s += "; clang " __clang_version__;
#elif defined(__GNUC__)
  s += "; gcc " __VERSION__;
#endif
  return s;
}

}  // namespace spb
