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
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdd/bus.hpp"
#include "qdd/protocol.hpp"
#include "qdd/time.hpp"

namespace qdd {

struct SafetyConfig {
  bool saturate_to_rated = false;
  bool thermal_autolimit = false;
  double rms_window_s = 20.0;
  bool warn_on_rated_exceeded = true;
  /// Feedback older than this is flagged stale; also the reply timeout for
  /// enable / connectivity checks. Default: 5 periods of a 200 Hz loop.
  double staleness_window_s = 0.025;
  /// Thermal limit releases when RMS falls below threshold * this factor.
  double thermal_release_factor = 0.95;
  /// RMS level that engages the thermal limit; defaults to rated torque.
  std::optional<double> thermal_threshold_nm;
  /// Mirror safety events to rate-limited stderr lines (<= 1/s per actuator
  /// and kind).
  bool log_warnings = true;
};

enum class SafetyEventKind {
  RatedExceededWarning,
  ThermalLimitEngaged,
  ThermalLimitReleased,
  StaleFeedback,
};

std::string_view safety_event_name(SafetyEventKind kind);

struct SafetyEvent {
  SafetyEventKind kind;
  uint8_t can_id;
  double value;  // Nm for torque events, seconds (age) for staleness
  double timestamp;
};

struct ActuatorState {
  double position = 0.0;
  double velocity = 0.0;
  double torque = 0.0;
  double temperature = 0.0;
  double timestamp = 0.0;
  bool stale = true;
  bool has_feedback = false;
};

/// Trailing time-weighted RMS of commanded torque, the thermal proxy.
/// Samples are held zero-order between command instants, so irregular command
/// rates do not bias the estimate; before the window first fills the RMS is
/// taken over elapsed time.
class RmsMonitor {
 public:
  explicit RmsMonitor(double window_s) : window_(window_s) {}

  void add_sample(double t, double torque);
  double rms(double now) const;
  void clear() { samples_.clear(); }

 private:
  double window_;
  std::deque<std::pair<double, double>> samples_;  // (t, torque^2)
};

struct CommandEcho {
  double applied_torque = 0.0;
  std::vector<SafetyEvent> events;
};

struct ActuatorResult {
  uint8_t can_id = 0;
  bool ok = false;
  std::string detail;
};

/// Registry and command surface for a set of actuators on one bus: command
/// dispatch in physical units, state cache, connectivity checks, and the
/// safety layer (hard peak clamp, optional rated saturation, rated-exceeded
/// warnings, RMS thermal auto-limiting, zero-torque-before-disable).
///
/// Owned by a single control-loop context; the safety event stream may be
/// drained from another context.
class ActuatorGroup {
 public:
  ActuatorGroup(const std::vector<std::pair<std::string, uint8_t>>& roster,
                const BusConfig& bus_config, SafetyConfig safety = {},
                std::shared_ptr<TimeSource> ts = nullptr);
  ActuatorGroup(const std::vector<std::pair<std::string, uint8_t>>& roster,
                std::unique_ptr<CanBus> bus, SafetyConfig safety = {},
                std::shared_ptr<TimeSource> ts = nullptr);
  ~ActuatorGroup();

  ActuatorGroup(const ActuatorGroup&) = delete;
  ActuatorGroup& operator=(const ActuatorGroup&) = delete;

  size_t size() const { return entries_.size(); }
  std::vector<uint8_t> can_ids() const;
  const ActuatorModelSpec& model(uint8_t can_id) const;
  bool enabled(uint8_t can_id) const;

  /// Sends Enable to every actuator; an actuator counts as enabled only once
  /// a feedback frame lands within the staleness window.
  std::vector<ActuatorResult> enable_all();

  /// For each enabled actuator: zero-torque command, then Disable, in that
  /// bus order. Per-actuator failures do not stop the sweep.
  std::vector<ActuatorResult> disable_all();

  /// Pings every actuator; true means feedback arrived within the staleness
  /// window. Command gating (the enabled flags) is left untouched.
  std::vector<std::pair<uint8_t, bool>> check_connection();

  CommandEcho command_torque(uint8_t can_id, double torque_nm);
  CommandEcho command_position(uint8_t can_id, double position_rad, double kp,
                               double kd);
  CommandEcho command_velocity(uint8_t can_id, double velocity_rad_s, double kd);
  CommandEcho command_impedance(uint8_t can_id, const MitCommand& cmd);

  /// Latest cached feedback; flips the stale flag (with a StaleFeedback event
  /// on the fresh-to-stale transition) when feedback is older than the
  /// staleness window.
  ActuatorState query_state(uint8_t can_id);

  double rms_torque(uint8_t can_id);

  /// The safety pipeline: hard clamp to +/-peak, optional rated saturation,
  /// RMS thermal auto-limit with release hysteresis, rated-exceeded warning.
  /// The returned torque is what a command would put on the wire; each call
  /// records one monitor sample.
  CommandEcho apply_safety(uint8_t can_id, double torque_nm);

  /// Drains pending feedback frames into the state cache. Commands do not
  /// drain implicitly; call this once per control tick (query_state also
  /// drains).
  void poll_feedback();

  std::vector<SafetyEvent> drain_events();
  uint64_t unmatched_frames() const { return unmatched_frames_; }

  CanBus& bus() { return *bus_; }
  const SafetyConfig& safety() const { return safety_; }

 private:
  struct Entry {
    ActuatorModelSpec model;
    uint8_t can_id = 0;
    bool enabled = false;
    ActuatorState state;
    RmsMonitor monitor;
    bool thermal_engaged = false;
    bool was_stale = true;

    explicit Entry(double window) : monitor(window) {}
  };

  Entry& entry(uint8_t can_id);
  const Entry& entry(uint8_t can_id) const;
  void init_roster(const std::vector<std::pair<std::string, uint8_t>>& roster);
  CommandEcho send_command(Entry& e, MitCommand cmd, bool apply_torque_safety);
  SendResult send_special(const Entry& e, SpecialFrameKind kind);
  /// Waits until every listed actuator has feedback newer than `since`, up to
  /// the staleness window. Returns per-actuator success.
  std::vector<bool> await_feedback(const std::vector<uint8_t>& ids, double since);
  void push_events(const std::vector<SafetyEvent>& events);

  std::shared_ptr<TimeSource> ts_;
  std::unique_ptr<CanBus> bus_;
  SafetyConfig safety_;
  std::vector<Entry> entries_;

  mutable std::mutex events_mutex_;
  std::deque<SafetyEvent> events_;
  std::vector<std::pair<uint64_t, double>> last_warn_;  // (id<<8|kind, t)
  uint64_t unmatched_frames_ = 0;
};

}  // namespace qdd
