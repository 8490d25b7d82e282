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

#include <string>
#include <vector>

#include "qdd/actuation.hpp"
#include "qdd/bus.hpp"
#include "qdd/recorder.hpp"

namespace qdd::cli {

// Exit codes: 0 success, 2 configuration error, 3 runtime failure,
// 4 safety-abort (the shutdown disable sequence could not be confirmed).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitSafetyAbort = 4;

enum class ControllerKind { SinePosition, TorqueStep, ImpedanceHold, VelocityRamp };

std::string controller_name(ControllerKind kind);
ControllerKind controller_from_name(const std::string& name);  // throws ConfigError
std::vector<std::string> controller_names();

struct ControllerParams {
  double amplitude = 0.5;    // rad, sine-position
  double wave_hz = 0.5;      // Hz, sine-position
  double setpoint = 0.0;     // rad (impedance-hold) or rad/s (velocity-ramp)
  double kp = 25.0;
  double kd = 1.0;
  double torque = 1.0;       // Nm, torque-step / impedance feedforward
  double step_time_s = 0.0;  // torque-step onset
  double ramp_rate = 1.0;    // rad/s^2, velocity-ramp
};

struct RunConfig {
  BusConfig bus;
  std::vector<std::pair<std::string, uint8_t>> roster;
  ControllerKind controller = ControllerKind::SinePosition;
  ControllerParams params;
  double frequency_hz = 200.0;
  double duration_s = 10.0;
  std::string telemetry_destination;  // empty: telemetry off
  std::string record_path;            // empty: recording off
  RecorderOptions record_options;
  SafetyConfig safety;
  bool spawn_sim = false;  // attach virtual actuators matching the roster
};

/// JSON round-trip for config files (flags override file values).
std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);  // throws ConfigError

/// "virtual:NAME" or "can:IFACE" -> BusConfig (backend + interface only).
BusConfig parse_bus_spec(const std::string& spec);

/// Entry point behind the qddkit binary; callable in-process for tests.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace qdd::cli
