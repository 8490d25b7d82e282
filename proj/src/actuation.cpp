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

#include "qdd/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qdd {

std::string_view safety_event_name(SafetyEventKind kind) {
  switch (kind) {
    case SafetyEventKind::RatedExceededWarning: return "RatedExceededWarning";
    case SafetyEventKind::ThermalLimitEngaged: return "ThermalLimitEngaged";
    case SafetyEventKind::ThermalLimitReleased: return "ThermalLimitReleased";
    case SafetyEventKind::StaleFeedback: return "StaleFeedback";
  }
  return "?";
}

void RmsMonitor::add_sample(double t, double torque) {
  if (!samples_.empty() && t < samples_.back().first) t = samples_.back().first;
  samples_.emplace_back(t, torque * torque);
  // Keep one sample left of the window edge so the zero-order hold across the
  // boundary stays integrable.
  const double edge = t - window_;
  while (samples_.size() >= 2 && samples_[1].first <= edge) samples_.pop_front();
}

double RmsMonitor::rms(double now) const {
  if (samples_.empty()) return 0.0;
  const double start = std::max(samples_.front().first, now - window_);
  if (now <= start) return std::sqrt(samples_.back().second);
  double integral = 0.0;
  for (size_t i = 0; i < samples_.size(); ++i) {
    const double t0 = std::max(samples_[i].first, start);
    const double t1 =
        i + 1 < samples_.size() ? std::max(samples_[i + 1].first, start) : now;
    if (t1 > t0) integral += samples_[i].second * (t1 - t0);
  }
  return std::sqrt(integral / (now - start));
}

ActuatorGroup::ActuatorGroup(const std::vector<std::pair<std::string, uint8_t>>& roster,
                             const BusConfig& bus_config, SafetyConfig safety,
                             std::shared_ptr<TimeSource> ts)
    : ts_(ts ? std::move(ts) : default_time_source()),
      bus_(open_bus(bus_config, ts_)),
      safety_(safety) {
  init_roster(roster);
}

ActuatorGroup::ActuatorGroup(const std::vector<std::pair<std::string, uint8_t>>& roster,
                             std::unique_ptr<CanBus> bus, SafetyConfig safety,
                             std::shared_ptr<TimeSource> ts)
    : ts_(ts ? std::move(ts) : default_time_source()),
      bus_(std::move(bus)),
      safety_(safety) {
  if (!bus_) throw UsageError("ActuatorGroup needs an open bus");
  init_roster(roster);
}

ActuatorGroup::~ActuatorGroup() = default;

void ActuatorGroup::init_roster(
    const std::vector<std::pair<std::string, uint8_t>>& roster) {
  if (safety_.rms_window_s <= 0) throw ConfigError("rms_window must be positive");
  if (safety_.staleness_window_s <= 0)
    throw ConfigError("staleness_window must be positive");
  for (const auto& [name, id] : roster) {
    for (const auto& e : entries_)
      if (e.can_id == id)
        throw ConfigError("duplicate CAN id " + std::to_string(int(id)) +
                          " in actuator roster");
    if (id == 0)
      throw ConfigError("CAN id 0 is reserved for feedback routing");
    Entry e(safety_.rms_window_s);
    e.model = lookup_model(name);
    e.can_id = id;
    entries_.push_back(std::move(e));
  }
}

std::vector<uint8_t> ActuatorGroup::can_ids() const {
  std::vector<uint8_t> ids;
  ids.reserve(entries_.size());
  for (const auto& e : entries_) ids.push_back(e.can_id);
  return ids;
}

ActuatorGroup::Entry& ActuatorGroup::entry(uint8_t can_id) {
  for (auto& e : entries_)
    if (e.can_id == can_id) return e;
  throw UsageError("unknown actuator id " + std::to_string(int(can_id)));
}

const ActuatorGroup::Entry& ActuatorGroup::entry(uint8_t can_id) const {
  return const_cast<ActuatorGroup*>(this)->entry(can_id);
}

const ActuatorModelSpec& ActuatorGroup::model(uint8_t can_id) const {
  return entry(can_id).model;
}

bool ActuatorGroup::enabled(uint8_t can_id) const { return entry(can_id).enabled; }

SendResult ActuatorGroup::send_special(const Entry& e, SpecialFrameKind kind) {
  const FamilyLayout& layout = family_layout(e.model.family);
  const Payload payload = encode_special(kind, e.model.family);
  return bus_->send(make_frame(layout.command_arb_id(e.can_id), payload,
                               layout.extended_id));
}

std::vector<bool> ActuatorGroup::await_feedback(const std::vector<uint8_t>& ids,
                                                double since) {
  const double deadline = ts_->now() + safety_.staleness_window_s;
  const auto pending = [&] {
    for (uint8_t id : ids) {
      const Entry& e = entry(id);
      if (!e.state.has_feedback || e.state.timestamp < since) return true;
    }
    return false;
  };
  poll_feedback();
  while (pending() && ts_->now() < deadline) {
    ts_->sleep_for(std::min(0.0005, safety_.staleness_window_s / 4));
    poll_feedback();
  }
  std::vector<bool> ok;
  ok.reserve(ids.size());
  for (uint8_t id : ids) {
    const Entry& e = entry(id);
    ok.push_back(e.state.has_feedback && e.state.timestamp >= since);
  }
  return ok;
}

std::vector<ActuatorResult> ActuatorGroup::enable_all() {
  std::vector<ActuatorResult> results;
  std::vector<uint8_t> sent;
  const double since = ts_->now();
  for (auto& e : entries_) {
    if (send_special(e, SpecialFrameKind::Enable) == SendResult::Ok) {
      sent.push_back(e.can_id);
    } else {
      results.push_back({e.can_id, false, "bus backpressure on enable"});
    }
  }
  const std::vector<bool> ok = await_feedback(sent, since);
  for (size_t i = 0; i < sent.size(); ++i) {
    Entry& e = entry(sent[i]);
    e.enabled = ok[i];
    results.push_back({sent[i], ok[i], ok[i] ? "" : "no feedback: not connected"});
  }
  std::sort(results.begin(), results.end(),
            [](const auto& a, const auto& b) { return a.can_id < b.can_id; });
  return results;
}

std::vector<ActuatorResult> ActuatorGroup::disable_all() {
  std::vector<ActuatorResult> results;
  for (auto& e : entries_) {
    if (!e.enabled) continue;
    ActuatorResult r{e.can_id, true, ""};
    try {
      // Zero torque must hit the wire before the Disable frame.
      const MitCommand zero{};
      const FamilyLayout& layout = family_layout(e.model.family);
      if (bus_->send(make_frame(layout.command_arb_id(e.can_id),
                                encode_mit_command(zero, e.model),
                                layout.extended_id)) != SendResult::Ok) {
        r = {e.can_id, false, "backpressure on zero-torque command"};
      } else if (send_special(e, SpecialFrameKind::Disable) != SendResult::Ok) {
        r = {e.can_id, false, "backpressure on disable frame"};
      }
      e.monitor.add_sample(ts_->now(), 0.0);
    } catch (const Error& err) {
      r = {e.can_id, false, err.what()};
    }
    e.enabled = false;
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<std::pair<uint8_t, bool>> ActuatorGroup::check_connection() {
  std::vector<std::pair<uint8_t, bool>> out;
  std::vector<uint8_t> pinged;
  const double since = ts_->now();
  for (auto& e : entries_) {
    if (send_special(e, SpecialFrameKind::Enable) == SendResult::Ok)
      pinged.push_back(e.can_id);
    else
      out.emplace_back(e.can_id, false);
  }
  const std::vector<bool> ok = await_feedback(pinged, since);
  for (size_t i = 0; i < pinged.size(); ++i) {
    Entry& e = entry(pinged[i]);
    // The ping enabled the device; restore anything the group considers
    // disabled, zero torque first as always.
    if (!e.enabled) {
      const FamilyLayout& layout = family_layout(e.model.family);
      bus_->send(make_frame(layout.command_arb_id(e.can_id),
                            encode_mit_command(MitCommand{}, e.model),
                            layout.extended_id));
      send_special(e, SpecialFrameKind::Disable);
    }
    out.emplace_back(pinged[i], ok[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CommandEcho ActuatorGroup::apply_safety(uint8_t can_id, double torque_nm) {
  Entry& e = entry(can_id);
  if (!std::isfinite(torque_nm))
    throw ValidationError("non-finite torque command");
  const double now = ts_->now();
  CommandEcho echo;
  const double requested = torque_nm;
  double applied = std::clamp(requested, -e.model.peak_torque, e.model.peak_torque);
  if (safety_.saturate_to_rated)
    applied = std::clamp(applied, -e.model.rated_torque, e.model.rated_torque);
  if (safety_.thermal_autolimit) {
    const double threshold =
        safety_.thermal_threshold_nm.value_or(e.model.rated_torque);
    const double level = e.monitor.rms(now);
    if (!e.thermal_engaged && level >= threshold) {
      e.thermal_engaged = true;
      echo.events.push_back(
          {SafetyEventKind::ThermalLimitEngaged, can_id, level, now});
    } else if (e.thermal_engaged &&
               level < threshold * safety_.thermal_release_factor) {
      e.thermal_engaged = false;
      echo.events.push_back(
          {SafetyEventKind::ThermalLimitReleased, can_id, level, now});
    }
    if (e.thermal_engaged)
      applied = std::clamp(applied, -e.model.rated_torque, e.model.rated_torque);
  }
  if (safety_.warn_on_rated_exceeded && std::abs(requested) > e.model.rated_torque)
    echo.events.push_back(
        {SafetyEventKind::RatedExceededWarning, can_id, requested, now});
  // What heats the motor is the torque that actually goes out.
  e.monitor.add_sample(now, applied);
  echo.applied_torque = applied;
  push_events(echo.events);
  return echo;
}

CommandEcho ActuatorGroup::send_command(Entry& e, MitCommand cmd,
                                        bool apply_torque_safety) {
  if (!e.enabled)
    throw UsageError("actuator " + std::to_string(int(e.can_id)) +
                     " is disabled; enable_all() first");
  CommandEcho echo;
  if (apply_torque_safety) {
    echo = apply_safety(e.can_id, cmd.torque_ff);
    cmd.torque_ff = echo.applied_torque;
  }
  const FamilyLayout& layout = family_layout(e.model.family);
  const SendResult sr = bus_->send(make_frame(
      layout.command_arb_id(e.can_id), encode_mit_command(cmd, e.model),
      layout.extended_id));
  if (sr != SendResult::Ok)
    throw BusError("bus backpressure commanding actuator " +
                   std::to_string(int(e.can_id)));
  return echo;
}

CommandEcho ActuatorGroup::command_torque(uint8_t can_id, double torque_nm) {
  MitCommand cmd;
  cmd.torque_ff = torque_nm;
  return send_command(entry(can_id), cmd, true);
}

CommandEcho ActuatorGroup::command_position(uint8_t can_id, double position_rad,
                                            double kp, double kd) {
  Entry& e = entry(can_id);
  // Gains are controller intent: out-of-range gains are bugs, not values to
  // clamp silently.
  if (!(kp >= e.model.kp.min && kp <= e.model.kp.max))
    throw ValidationError("kp " + std::to_string(kp) + " outside [" +
                          std::to_string(e.model.kp.min) + ", " +
                          std::to_string(e.model.kp.max) + "]");
  if (!(kd >= e.model.kd.min && kd <= e.model.kd.max))
    throw ValidationError("kd " + std::to_string(kd) + " outside [" +
                          std::to_string(e.model.kd.min) + ", " +
                          std::to_string(e.model.kd.max) + "]");
  MitCommand cmd;
  cmd.position = position_rad;
  cmd.kp = kp;
  cmd.kd = kd;
  return send_command(e, cmd, true);
}

CommandEcho ActuatorGroup::command_velocity(uint8_t can_id, double velocity_rad_s,
                                            double kd) {
  Entry& e = entry(can_id);
  if (!(kd >= e.model.kd.min && kd <= e.model.kd.max))
    throw ValidationError("kd " + std::to_string(kd) + " outside [" +
                          std::to_string(e.model.kd.min) + ", " +
                          std::to_string(e.model.kd.max) + "]");
  MitCommand cmd;
  cmd.velocity = velocity_rad_s;
  cmd.kd = kd;
  return send_command(e, cmd, true);
}

CommandEcho ActuatorGroup::command_impedance(uint8_t can_id, const MitCommand& cmd) {
  Entry& e = entry(can_id);
  if (!(cmd.kp >= e.model.kp.min && cmd.kp <= e.model.kp.max))
    throw ValidationError("kp outside model range");
  if (!(cmd.kd >= e.model.kd.min && cmd.kd <= e.model.kd.max))
    throw ValidationError("kd outside model range");
  return send_command(e, cmd, true);
}

ActuatorState ActuatorGroup::query_state(uint8_t can_id) {
  poll_feedback();
  Entry& e = entry(can_id);
  const double now = ts_->now();
  const double age = now - e.state.timestamp;
  e.state.stale = !e.state.has_feedback || age > safety_.staleness_window_s;
  if (e.state.stale && !e.was_stale) {
    const SafetyEvent ev{SafetyEventKind::StaleFeedback, can_id, age, now};
    push_events({ev});
  }
  e.was_stale = e.state.stale;
  return e.state;
}

double ActuatorGroup::rms_torque(uint8_t can_id) {
  return entry(can_id).monitor.rms(ts_->now());
}

void ActuatorGroup::poll_feedback() {
  while (auto frame = bus_->recv(0)) {
    bool matched = false;
    for (auto& e : entries_) {
      const FamilyLayout& layout = family_layout(e.model.family);
      if (frame->is_extended != layout.extended_id) continue;
      if (frame->arbitration_id != layout.feedback_arb_id(e.can_id)) continue;
      MitFeedback fb;
      try {
        fb = decode_feedback(frame->payload(), e.model);
      } catch (const CodecError&) {
        continue;
      }
      if (layout.feedback_id_in_payload && fb.can_id != e.can_id) continue;
      if (frame->timestamp < e.state.timestamp) continue;  // keep timestamps monotone
      e.state.position = fb.position;
      e.state.velocity = fb.velocity;
      e.state.torque = fb.torque;
      e.state.temperature = fb.temperature;
      e.state.timestamp = frame->timestamp;
      e.state.has_feedback = true;
      e.was_stale = false;
      matched = true;
      break;
    }
    if (!matched) ++unmatched_frames_;
  }
}

void ActuatorGroup::push_events(const std::vector<SafetyEvent>& events) {
  if (events.empty()) return;
  {
    std::lock_guard lock(events_mutex_);
    for (const auto& ev : events) events_.push_back(ev);
  }
  if (!safety_.log_warnings) return;
  for (const auto& ev : events) {
    const uint64_t key =
        (static_cast<uint64_t>(ev.can_id) << 8) | static_cast<uint64_t>(ev.kind);
    auto it = std::find_if(last_warn_.begin(), last_warn_.end(),
                           [&](const auto& p) { return p.first == key; });
    if (it != last_warn_.end() && ev.timestamp - it->second < 1.0) continue;
    if (it == last_warn_.end())
      last_warn_.emplace_back(key, ev.timestamp);
    else
      it->second = ev.timestamp;
    std::fprintf(stderr, "[qddkit] %s: actuator %u value %.3f t=%.3f\n",
                 std::string(safety_event_name(ev.kind)).c_str(), ev.can_id,
                 ev.value, ev.timestamp);
  }
}

std::vector<SafetyEvent> ActuatorGroup::drain_events() {
  std::lock_guard lock(events_mutex_);
  std::vector<SafetyEvent> out(events_.begin(), events_.end());
  events_.clear();
  return out;
}

}  // namespace qdd
