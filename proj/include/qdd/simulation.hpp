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
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qdd/bus.hpp"
#include "qdd/protocol.hpp"
#include "qdd/time.hpp"

namespace qdd {

struct ThermalParams {
  double ambient_c = 25.0;
  double heating = 0.02;  // degC/s per Nm^2
  double cooling = 0.1;   // 1/s toward ambient
};

struct VirtualActuatorParams {
  std::string model = "AK80-9";
  uint8_t can_id = 1;
  double inertia = 0.01;  // kg*m^2
  double damping = 0.05;  // Nm*s/rad
  double initial_position = 0.0;
  double initial_velocity = 0.0;
  ThermalParams thermal;
  double max_step_s = 0.001;
  /// Echo-reply is the default (one feedback per received frame); broadcast
  /// adds a periodic feedback thread for stress tests.
  bool broadcast = false;
  double broadcast_period_s = 0.005;
};

/// Defaults from data/sim_defaults.csv (inertia, damping, thermal, step).
VirtualActuatorParams sim_defaults();

/// A rotor with inertia and viscous damping, driven by the on-board impedance
/// law tau = clamp(tau_ff + kp*(pos_d - pos) + kd*(vel_d - vel), +/-peak),
/// integrated with semi-implicit Euler. Attach one to a bus channel and it
/// behaves like a real actuator: consumes command/special frames addressed to
/// its id, answers each with a feedback frame, ignores everything else.
class VirtualActuator {
 public:
  VirtualActuator(VirtualActuatorParams params, std::shared_ptr<TimeSource> ts);
  ~VirtualActuator();

  VirtualActuator(const VirtualActuator&) = delete;
  VirtualActuator& operator=(const VirtualActuator&) = delete;

  /// Advances the dynamics by dt (split into max_step_s sub-steps by callers
  /// that pass large dt).
  void step(double dt);

  /// Integrates up to session time t.
  void advance_to(double t);

  /// Applies one frame (command or special) if it is addressed to this
  /// actuator; replies on the attached bus when one is present.
  void handle_frame(const CanFrame& frame);

  /// Joins the channel. Throws UsageError if the id is already claimed by
  /// another responder on that virtual channel.
  void attach(const BusConfig& bus_config);
  void detach();

  CanFrame feedback_frame() const;

  uint8_t can_id() const { return params_.can_id; }
  const ActuatorModelSpec& model() const { return model_; }
  double position() const;
  double velocity() const;
  double applied_torque() const;
  double temperature() const;
  bool is_enabled() const;
  MitCommand last_command() const;

 private:
  void reply();
  void integrate_substeps(double dt);

  VirtualActuatorParams params_;
  ActuatorModelSpec model_;
  std::shared_ptr<TimeSource> ts_;
  std::unique_ptr<CanBus> bus_;

  mutable std::mutex m_;
  double position_ = 0.0;
  double velocity_ = 0.0;
  double temperature_ = 0.0;
  double applied_torque_ = 0.0;
  double last_update_ = 0.0;
  bool enabled_ = false;
  MitCommand command_{};

  std::atomic<bool> run_threads_{false};
  std::thread rx_thread_;
  std::thread broadcast_thread_;
  std::shared_ptr<VirtualDomain> claimed_domain_;
  uint64_t claim_key_ = 0;
};

/// A set of virtual actuators attached to one channel.
class SimFleet {
 public:
  SimFleet(const std::vector<VirtualActuatorParams>& actuators,
           const BusConfig& bus_config, std::shared_ptr<TimeSource> ts = nullptr);

  VirtualActuator& actuator(uint8_t can_id);
  void detach(uint8_t can_id);
  size_t size() const { return actuators_.size(); }
  std::vector<VirtualActuator*> all();

 private:
  std::vector<std::unique_ptr<VirtualActuator>> actuators_;
};

// Scripted scenarios -------------------------------------------------------

struct ScenarioCommand {
  enum class Kind { Enable, Disable, ZeroPosition, Impedance };
  double t = 0.0;
  uint8_t can_id = 0;
  Kind kind = Kind::Impedance;
  MitCommand command{};
};

struct ScenarioConfig {
  double duration_s = 1.0;
  double step_s = 0.001;
  std::vector<VirtualActuatorParams> actuators;
};

struct TrajectoryPoint {
  double t = 0.0;
  uint8_t can_id = 0;
  double position = 0.0;
  double velocity = 0.0;
  double applied_torque = 0.0;
  double temperature = 0.0;
};

/// Runs a command script against a fleet under virtual time. Fully
/// deterministic: identical (config, script) pairs produce identical logs.
/// Script times must be non-decreasing.
std::vector<TrajectoryPoint> run_scenario(const ScenarioConfig& config,
                                          const std::vector<ScenarioCommand>& script);

/// Script file format: '#' comments plus lines of
///   t can_id enable|disable|zero
///   t can_id cmd <pos> <vel> <kp> <kd> <tau_ff>
std::vector<ScenarioCommand> parse_scenario_script(std::string_view text);

/// Writes a trajectory log with the recorder's delimiter conventions
/// (header row, one point per line).
void write_trajectory_csv(const std::vector<TrajectoryPoint>& log,
                          const std::string& path);

}  // namespace qdd
