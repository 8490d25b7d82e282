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

#include "qdd/clocking.hpp"

#include <algorithm>
#include <cmath>

namespace qdd {

namespace {
inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#elif defined(__aarch64__)
  asm volatile("yield");
#endif
}
}  // namespace

RateClock::RateClock(double frequency_hz, std::shared_ptr<TimeSource> ts,
                     double spin_threshold_s)
    : ts_(ts ? std::move(ts) : default_time_source()),
      period_(frequency_hz > 0 ? 1.0 / frequency_hz : 0.0),
      spin_threshold_(spin_threshold_s) {
  if (!(frequency_hz > 0) || !std::isfinite(frequency_hz))
    throw ConfigError("loop frequency must be positive, got " +
                      std::to_string(frequency_hz));
  last_wake_ = ts_->now();
  next_deadline_ = last_wake_ + period_;
}

TickReport RateClock::tick() {
  const double deadline = next_deadline_;
  double now = ts_->now();
  const bool overrun = now > deadline;
  if (!overrun) {
    if (ts_->is_virtual()) {
      ts_->sleep_until(deadline);
    } else {
      // The OS sleep can overshoot by far more than its nominal resolution on
      // loaded or virtualized hosts; back the coarse sleep off by a decaying
      // maximum of the overshoot actually observed and spin the rest.
      const double coarse = deadline - spin_threshold_ - sleep_margin_;
      if (now < coarse) {
        ts_->sleep_until(coarse);
        const double overshoot = ts_->now() - coarse;
        sleep_margin_ =
            std::min(std::max(overshoot, sleep_margin_ * 0.9), kMaxSleepMargin);
      }
      while (ts_->now() < deadline) cpu_relax();
    }
    now = ts_->now();
  }

  TickReport report;
  report.loop_index = index_++;
  report.actual_period = now - last_wake_;
  report.lateness = std::max(0.0, now - deadline);
  report.overrun = overrun;

  next_deadline_ += period_;
  uint64_t skipped = 0;
  if (report.lateness > kCatchupPeriods * period_) {
    // Way behind: skip the missed deadlines instead of bursting zero-sleep
    // loops to catch up.
    while (next_deadline_ <= now) {
      next_deadline_ += period_;
      ++skipped;
    }
  }

  ++ticks_;
  sum_periods_ += report.actual_period;
  sumsq_periods_ += report.actual_period * report.actual_period;
  max_lateness_ = std::max(max_lateness_, report.lateness);
  overruns_ += (overrun ? 1 : 0) + skipped;
  last_wake_ = now;
  return report;
}

std::optional<RateStats> RateClock::stats() const {
  if (ticks_ == 0) return std::nullopt;
  RateStats s;
  s.tick_count = ticks_;
  s.overrun_count = overruns_;
  s.max_lateness = max_lateness_;
  s.mean_period = sum_periods_ / static_cast<double>(ticks_);
  const double var =
      sumsq_periods_ / static_cast<double>(ticks_) - s.mean_period * s.mean_period;
  s.period_stddev = std::sqrt(std::max(0.0, var));
  return s;
}

void RateClock::reset_stats() {
  sum_periods_ = sumsq_periods_ = max_lateness_ = 0.0;
  overruns_ = ticks_ = 0;
}

ProbeOutcome run_rate_probe(CanBus& bus, const std::vector<CanFrame>& frames_per_tick,
                            double frequency_hz, double dwell_s,
                            const MaxRateConfig& config,
                            const std::shared_ptr<TimeSource>& ts) {
  ProbeOutcome outcome;
  outcome.frequency_hz = frequency_hz;
  RateClock clock(frequency_hz, ts, config.spin_threshold_s);
  const auto total =
      std::max<uint64_t>(1, static_cast<uint64_t>(std::llround(dwell_s * frequency_hz)));
  for (uint64_t i = 0; i < total; ++i) {
    for (const CanFrame& f : frames_per_tick) {
      if (bus.send(f) == SendResult::Backpressure) {
        outcome.backpressure = true;
        outcome.ticks = i + 1;
        outcome.passed = false;
        return outcome;
      }
    }
    const TickReport report = clock.tick();
    if (report.overrun) ++outcome.overruns;
  }
  outcome.ticks = total;
  outcome.passed = outcome.overruns <=
                   static_cast<uint64_t>(config.max_overrun_fraction *
                                         static_cast<double>(total));
  return outcome;
}

MaxRateResult search_max_rate(const std::function<bool(double)>& probe_passes,
                              const std::function<bool(double)>& validate_passes,
                              const MaxRateConfig& config) {
  if (!(config.lo_hz > 0) || config.lo_hz >= config.hi_hz)
    throw ConfigError("max-rate search needs 0 < lo < hi");
  if (!(config.resolution_hz > 0))
    throw ConfigError("search resolution must be positive");

  MaxRateResult result;
  if (!probe_passes(config.lo_hz)) {
    result.below_lo = true;
    return result;
  }
  double lo = config.lo_hz;
  double hi = config.hi_hz;
  if (probe_passes(hi)) {
    lo = hi;
  } else {
    while (hi - lo > config.resolution_hz) {
      const double mid = 0.5 * (lo + hi);
      ++result.probe_rounds;
      if (probe_passes(mid))
        lo = mid;
      else
        hi = mid;
    }
  }
  // Re-validate the winner for the long dwell, stepping down a notch when the
  // longer hold exposes a marginal rate.
  double candidate = lo;
  while (candidate >= config.lo_hz) {
    if (validate_passes(candidate)) {
      result.max_hz = candidate;
      result.validated = true;
      return result;
    }
    candidate -= config.resolution_hz;
  }
  result.below_lo = true;
  return result;
}

MaxRateResult find_max_rate(CanBus& bus, size_t n_actuators,
                            const MaxRateConfig& config,
                            std::shared_ptr<TimeSource> ts,
                            const std::string& model_name) {
  if (n_actuators < 1) throw ConfigError("need at least one actuator");
  if (!ts) ts = default_time_source();

  const ActuatorModelSpec& model = lookup_model(model_name);
  const FamilyLayout& layout = family_layout(model.family);
  std::vector<CanFrame> frames;
  frames.reserve(n_actuators);
  for (size_t i = 0; i < n_actuators; ++i) {
    const auto id = static_cast<uint8_t>(1 + (i % 255));
    frames.push_back(make_frame(layout.command_arb_id(id),
                                encode_mit_command(MitCommand{}, model),
                                layout.extended_id));
  }

  std::vector<ProbeOutcome> probes;
  const auto probe = [&](double hz) {
    ts->sleep_for(config.settle_s);
    ProbeOutcome o = run_rate_probe(bus, frames, hz, config.dwell_s, config, ts);
    probes.push_back(o);
    return o.passed;
  };
  const auto validate = [&](double hz) {
    ts->sleep_for(config.settle_s);
    ProbeOutcome o =
        run_rate_probe(bus, frames, hz, config.validation_dwell_s, config, ts);
    probes.push_back(o);
    return o.passed;
  };

  MaxRateResult result = search_max_rate(probe, validate, config);
  result.probes = std::move(probes);
  return result;
}

}  // namespace qdd
