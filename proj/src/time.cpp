// Copyright 2026 the qddkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qdd/time.hpp"

#include <ctime>

#include <chrono>
#include <thread>

namespace qdd {

namespace {
long long steady_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}
}  // namespace

SteadyTimeSource::SteadyTimeSource() : origin_ns_(steady_ns()) {}

double SteadyTimeSource::now() const {
  return static_cast<double>(steady_ns() - origin_ns_) * 1e-9;
}

void SteadyTimeSource::sleep_until(double t) {
  // On Linux, steady_clock is CLOCK_MONOTONIC; an absolute sleep avoids the
  // extra drift of compute-delta-then-relative-nanosleep.
  const long long target_ns = origin_ns_ + static_cast<long long>(t * 1e9);
#if defined(__linux__)
  timespec ts;
  ts.tv_sec = target_ns / 1000000000LL;
  ts.tv_nsec = target_ns % 1000000000LL;
  while (clock_nanosleep(CLOCK_MONOTONIC, TIMER_ABSTIME, &ts, nullptr) == EINTR) {
  }
#else
  const auto deadline = std::chrono::steady_clock::time_point(
      std::chrono::nanoseconds(target_ns));
  std::this_thread::sleep_until(deadline);
#endif
}

void VirtualTimeSource::sleep_until(double t) {
  // Monotone advance; concurrent sleepers race to the max.
  double cur = now_.load(std::memory_order_acquire);
  while (cur < t &&
         !now_.compare_exchange_weak(cur, t, std::memory_order_acq_rel)) {
  }
}

std::shared_ptr<TimeSource> default_time_source() {
  static std::shared_ptr<TimeSource> instance =
      std::make_shared<SteadyTimeSource>();
  return instance;
}

}  // namespace qdd
