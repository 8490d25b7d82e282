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

#pragma once

#include <atomic>
#include <memory>

namespace qdd {

/// Monotonic session clock. Timestamps everywhere in qddkit are seconds since
/// the time source was created (never wall clock, so NTP steps cannot skew
/// control timing). Two implementations exist: a steady-clock backed source
/// for real operation and a manually advanced virtual source that lets every
/// timing-dependent code path run deterministically with zero real sleeping.
class TimeSource {
 public:
  virtual ~TimeSource() = default;

  /// Seconds since session start.
  virtual double now() const = 0;

  /// Blocks (real source) or jumps the clock forward (virtual source) until
  /// `now() >= t`. Returns immediately if `t` is already in the past.
  virtual void sleep_until(double t) = 0;

  virtual bool is_virtual() const = 0;

  void sleep_for(double seconds) { sleep_until(now() + seconds); }
};

/// Steady-clock session timer.
class SteadyTimeSource final : public TimeSource {
 public:
  SteadyTimeSource();
  double now() const override;
  void sleep_until(double t) override;
  bool is_virtual() const override { return false; }

 private:
  long long origin_ns_;
};

/// Test-controlled clock. `sleep_until` advances time instead of blocking;
/// `advance` moves it explicitly.
class VirtualTimeSource final : public TimeSource {
 public:
  explicit VirtualTimeSource(double start = 0.0) : now_(start) {}
  double now() const override { return now_.load(std::memory_order_acquire); }
  void sleep_until(double t) override;
  bool is_virtual() const override { return true; }
  void advance(double seconds) { sleep_until(now() + seconds); }

 private:
  std::atomic<double> now_;
};

/// Process-wide default real-time source (lazily created, shared).
std::shared_ptr<TimeSource> default_time_source();

}  // namespace qdd
