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

// Independent reference implementations used as test oracles. These must stay
// decoupled from the library code paths they check: the quantizer scans codes
// brute-force, the dynamics oracle integrates with RK4 instead of the
// simulator's semi-implicit Euler, and the RMS oracle uses trapezoids.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qdd/protocol.hpp"

namespace oracle {

/// Nearest code to `value` by exhaustive scan over all 2^bits codes, with the
/// round-half-away-from-zero tie rule applied to the exact midpoints.
inline uint32_t quantize_brute_force(double value, const qdd::QuantizationSpec& spec) {
  const double clamped = std::clamp(value, spec.min, spec.max);
  const uint32_t n = spec.code_max();
  const double step = (spec.max - spec.min) / static_cast<double>(n);
  uint32_t best = 0;
  double best_dist = std::abs(clamped - spec.min);
  for (uint32_t c = 1; c <= n; ++c) {
    const double x = spec.min + step * static_cast<double>(c);
    const double dist = std::abs(clamped - x);
    // Strictly closer wins; an exact tie goes to the larger code because the
    // scaled coordinate is non-negative (ties away from zero).
    if (dist < best_dist - 1e-18 ||
        (std::abs(dist - best_dist) <= 1e-18 && c > best)) {
      best = c;
      best_dist = dist;
    }
  }
  return best;
}

/// Impedance-law rotor dynamics integrated with classic RK4.
struct PdOracle {
  double inertia = 0.01;
  double damping = 0.05;
  double peak_torque = 18.0;
  double position = 0.0;
  double velocity = 0.0;

  double torque(double pos_d, double vel_d, double kp, double kd,
                double tau_ff, double pos, double vel) const {
    const double tau = tau_ff + kp * (pos_d - pos) + kd * (vel_d - vel);
    return std::clamp(tau, -peak_torque, peak_torque);
  }

  void step(double pos_d, double vel_d, double kp, double kd, double tau_ff,
            double h) {
    const auto accel = [&](double pos, double vel) {
      return (torque(pos_d, vel_d, kp, kd, tau_ff, pos, vel) -
              damping * vel) / inertia;
    };
    const double k1v = accel(position, velocity);
    const double k1x = velocity;
    const double k2v = accel(position + 0.5 * h * k1x, velocity + 0.5 * h * k1v);
    const double k2x = velocity + 0.5 * h * k1v;
    const double k3v = accel(position + 0.5 * h * k2x, velocity + 0.5 * h * k2v);
    const double k3x = velocity + 0.5 * h * k2v;
    const double k4v = accel(position + h * k3x, velocity + h * k3v);
    const double k4x = velocity + h * k3v;
    position += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    velocity += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
};

/// Trapezoidal RMS over (t, torque) samples within the trailing window.
inline double rms_trapezoid(const std::vector<std::pair<double, double>>& samples,
                            double now, double window) {
  if (samples.empty()) return 0.0;
  const double start = std::max(samples.front().first, now - window);
  if (now <= start) return std::abs(samples.back().second);
  double integral = 0.0;
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    double t0 = samples[i].first;
    double t1 = samples[i + 1].first;
    double y0 = samples[i].second * samples[i].second;
    double y1 = samples[i + 1].second * samples[i + 1].second;
    if (t1 <= start) continue;
    if (t0 < start) {
      y0 = y0 + (y1 - y0) * (start - t0) / (t1 - t0);
      t0 = start;
    }
    integral += 0.5 * (y0 + y1) * (t1 - t0);
  }
  const double t_last = samples.back().first;
  if (now > t_last)
    integral += samples.back().second * samples.back().second * (now - t_last);
  return std::sqrt(integral / (now - std::min(start, now)));
}

}  // namespace oracle
