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

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "qdd/bus.hpp"
#include "qdd/protocol.hpp"
#include "qdd/time.hpp"

namespace qdd {

struct TickReport {
  uint64_t loop_index = 0;
  double actual_period = 0.0;  // wake-to-wake, seconds
  double lateness = 0.0;       // wake minus deadline, >= 0
  bool overrun = false;        // the loop body ran past the deadline
};

struct RateStats {
  double mean_period = 0.0;
  double period_stddev = 0.0;
  double max_lateness = 0.0;
  uint64_t overrun_count = 0;
  uint64_t tick_count = 0;
};

/// Fixed-rate loop scheduler on an absolute deadline ladder: every tick the
/// deadline advances by exactly one period no matter when the loop woke, so a
/// long iteration is followed by shortened sleeps and the average period
/// reconverges to the target instead of drifting. Waits are a coarse OS sleep
/// until shortly before the deadline, then a busy spin for the final stretch.
class RateClock {
 public:
  /// target frequency in Hz; throws ConfigError if not positive.
  explicit RateClock(double frequency_hz,
                     std::shared_ptr<TimeSource> ts = nullptr,
                     double spin_threshold_s = 200e-6);

  /// Blocks until the next deadline and returns the timing report for this
  /// tick. Never wakes early under the real-time source. If the loop fell
  /// more than 5 periods behind, the ladder re-anchors and the skipped
  /// deadlines count as overruns.
  TickReport tick();

  /// Aggregate since construction or the last reset; nullopt before any tick.
  std::optional<RateStats> stats() const;
  void reset_stats();

  double target_period() const { return period_; }
  double next_deadline() const { return next_deadline_; }

 private:
  std::shared_ptr<TimeSource> ts_;
  double period_;
  double spin_threshold_;
  // Adaptive allowance for coarse-sleep overshoot: primed pessimistically,
  // then tracks a decaying maximum of what the host actually does.
  double sleep_margin_ = 1e-3;
  double next_deadline_;
  double last_wake_;
  uint64_t index_ = 0;

  double sum_periods_ = 0.0;
  double sumsq_periods_ = 0.0;
  double max_lateness_ = 0.0;
  uint64_t overruns_ = 0;
  uint64_t ticks_ = 0;

  static constexpr double kCatchupPeriods = 5.0;
  static constexpr double kMaxSleepMargin = 0.005;
};

// Maximum-operating-rate benchmark ----------------------------------------

struct MaxRateConfig {
  double lo_hz = 50.0;
  double hi_hz = 9000.0;
  double resolution_hz = 100.0;
  double dwell_s = 2.0;             // per-probe hold time
  double validation_dwell_s = 30.0; // final re-validation hold time
  double settle_s = 0.5;            // idle gap before each probe so the bus
                                    // buffers drain after a failed candidate
  double max_overrun_fraction = 0.01;
  double spin_threshold_s = 200e-6;
};

struct ProbeOutcome {
  double frequency_hz = 0.0;
  bool passed = false;
  bool backpressure = false;
  uint64_t overruns = 0;
  uint64_t ticks = 0;
};

struct MaxRateResult {
  bool below_lo = false;     // even the lower bound failed
  double max_hz = 0.0;       // highest passing frequency
  bool validated = false;
  uint64_t probe_rounds = 0; // binary-search probes (excludes lo/validation)
  std::vector<ProbeOutcome> probes;
};

/// Drives one command frame per actuator per tick at a candidate frequency.
/// A candidate fails on any bus backpressure or when more than
/// max_overrun_fraction of its loops overrun.
ProbeOutcome run_rate_probe(CanBus& bus, const std::vector<CanFrame>& frames_per_tick,
                            double frequency_hz, double dwell_s,
                            const MaxRateConfig& config,
                            const std::shared_ptr<TimeSource>& ts);

/// Binary search driver over an arbitrary pass predicate (exposed so the
/// search logic is testable without timing).
MaxRateResult search_max_rate(const std::function<bool(double)>& probe_passes,
                              const std::function<bool(double)>& validate_passes,
                              const MaxRateConfig& config);

/// Binary search between lo and hi until the bracket is narrower than the
/// resolution, probing each candidate with a command-all-actuators loop, then
/// re-validates the winner for the validation dwell. Returns below_lo when
/// even lo cannot be sustained.
MaxRateResult find_max_rate(CanBus& bus, size_t n_actuators,
                            const MaxRateConfig& config = {},
                            std::shared_ptr<TimeSource> ts = nullptr,
                            const std::string& model_name = "AK80-9");

}  // namespace qdd
