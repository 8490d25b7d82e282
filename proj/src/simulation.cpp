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

#include "qdd/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qdd/detail/embedded_fixtures.hpp"
#include "qdd/detail/format.hpp"

namespace qdd {

VirtualActuatorParams sim_defaults() {
  static const VirtualActuatorParams defaults = [] {
    VirtualActuatorParams p;
    std::stringstream ss(detail::kSimDefaultsCsv);
    std::string line;
    while (std::getline(ss, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::stringstream row(line);
      std::string cell;
      double v[6];
      for (double& x : v) {
        if (!std::getline(row, cell, ',')) throw ValidationError("bad sim defaults fixture");
        x = std::stod(cell);
      }
      p.inertia = v[0];
      p.damping = v[1];
      p.thermal.ambient_c = v[2];
      p.thermal.heating = v[3];
      p.thermal.cooling = v[4];
      p.max_step_s = v[5];
      return p;
    }
    throw ValidationError("empty sim defaults fixture");
  }();
  return defaults;
}

VirtualActuator::VirtualActuator(VirtualActuatorParams params,
                                 std::shared_ptr<TimeSource> ts)
    : params_(std::move(params)),
      model_(lookup_model(params_.model)),
      ts_(ts ? std::move(ts) : default_time_source()) {
  if (params_.inertia <= 0) throw ConfigError("inertia must be positive");
  if (params_.damping < 0) throw ConfigError("damping must be non-negative");
  if (params_.max_step_s <= 0 || params_.max_step_s > 0.01)
    throw ConfigError("max_step must be in (0, 10 ms]");
  if (params_.can_id == 0) throw ConfigError("CAN id 0 is reserved");
  position_ = params_.initial_position;
  velocity_ = params_.initial_velocity;
  temperature_ = params_.thermal.ambient_c;
  last_update_ = ts_->now();
}

VirtualActuator::~VirtualActuator() { detach(); }

void VirtualActuator::step(double dt) {
  std::lock_guard lock(m_);
  integrate_substeps(dt);
}

void VirtualActuator::integrate_substeps(double dt) {
  if (dt <= 0) return;
  const int n = std::max(1, static_cast<int>(std::ceil(dt / params_.max_step_s)));
  const double h = dt / n;
  for (int i = 0; i < n; ++i) {
    double tau = 0.0;
    if (enabled_) {
      tau = command_.torque_ff + command_.kp * (command_.position - position_) +
            command_.kd * (command_.velocity - velocity_);
      tau = std::clamp(tau, -model_.peak_torque, model_.peak_torque);
    }
    applied_torque_ = tau;
    // Semi-implicit Euler: velocity first, position with the new velocity.
    velocity_ += h * (tau - params_.damping * velocity_) / params_.inertia;
    position_ += h * velocity_;
    temperature_ += h * (params_.thermal.heating * tau * tau -
                         params_.thermal.cooling *
                             (temperature_ - params_.thermal.ambient_c));
  }
}

void VirtualActuator::advance_to(double t) {
  std::lock_guard lock(m_);
  double dt = t - last_update_;
  if (dt <= 0) return;
  last_update_ = t;
  // A long idle gap integrates as a bounded settle; the transient is gone
  // long before 300 s of damping.
  dt = std::min(dt, 300.0);
  integrate_substeps(dt);
}

CanFrame VirtualActuator::feedback_frame() const {
  std::lock_guard lock(m_);
  MitFeedback fb;
  fb.can_id = params_.can_id;
  fb.position = position_;
  fb.velocity = velocity_;
  fb.torque = applied_torque_;
  fb.temperature = temperature_;
  const FamilyLayout& layout = family_layout(model_.family);
  return make_frame(layout.feedback_arb_id(params_.can_id),
                    encode_feedback(fb, model_), layout.extended_id);
}

void VirtualActuator::reply() {
  if (bus_ && bus_->is_open()) bus_->send(feedback_frame());
}

void VirtualActuator::handle_frame(const CanFrame& frame) {
  const FamilyLayout& layout = family_layout(model_.family);
  if (frame.is_extended != layout.extended_id) return;
  if (frame.arbitration_id != layout.command_arb_id(params_.can_id)) return;

  bool do_reply = false;
  {
    std::lock_guard lock(m_);
    const double now = ts_->now();
    if (now > last_update_) {
      const double dt = std::min(now - last_update_, 300.0);
      last_update_ = now;
      integrate_substeps(dt);
    }
    if (const auto special = match_special(frame.payload(), model_.family)) {
      switch (*special) {
        case SpecialFrameKind::Enable:
          enabled_ = true;
          do_reply = true;
          break;
        case SpecialFrameKind::Disable:
          do_reply = enabled_;
          enabled_ = false;
          command_ = MitCommand{};
          applied_torque_ = 0.0;
          break;
        case SpecialFrameKind::ZeroPosition:
          do_reply = enabled_;
          position_ = 0.0;
          break;
      }
    } else if (enabled_) {
      try {
        command_ = decode_mit_command(frame.payload(), model_);
        do_reply = true;
      } catch (const CodecError&) {
        // Not a well-formed command; stay on the previous one.
      }
    }
  }
  if (do_reply) reply();
}

void VirtualActuator::attach(const BusConfig& bus_config) {
  if (bus_) throw UsageError("virtual actuator already attached");
  auto bus = open_bus(bus_config, ts_);
  const FamilyLayout& layout = family_layout(model_.family);
  const uint64_t key = layout.command_arb_id(params_.can_id);
  if (bus_config.backend == BusBackend::Virtual) {
    auto domain = find_virtual_domain(bus_config.interface_name);
    if (domain && !domain->claim(key))
      throw UsageError("CAN id " + std::to_string(int(params_.can_id)) +
                       " already has a virtual actuator on channel '" +
                       bus_config.interface_name + "'");
    claimed_domain_ = domain;
    claim_key_ = key;
  }
  bus_ = std::move(bus);
  if (!bus_->set_responder([this](const CanFrame& f) { handle_frame(f); })) {
    run_threads_ = true;
    rx_thread_ = std::thread([this] {
      while (run_threads_) {
        if (auto f = bus_->recv(0.01)) handle_frame(*f);
      }
    });
  }
  if (params_.broadcast) {
    run_threads_ = true;
    broadcast_thread_ = std::thread([this] {
      while (run_threads_) {
        std::this_thread::sleep_for(std::chrono::duration<double>(
            std::max(1e-4, params_.broadcast_period_s)));
        if (!run_threads_) break;
        advance_to(ts_->now());
        if (is_enabled()) reply();
      }
    });
  }
}

void VirtualActuator::detach() {
  run_threads_ = false;
  if (rx_thread_.joinable()) rx_thread_.join();
  if (broadcast_thread_.joinable()) broadcast_thread_.join();
  if (bus_) {
    bus_->close();
    bus_.reset();
  }
  if (claimed_domain_) {
    claimed_domain_->release(claim_key_);
    claimed_domain_.reset();
  }
}

double VirtualActuator::position() const {
  std::lock_guard lock(m_);
  return position_;
}
double VirtualActuator::velocity() const {
  std::lock_guard lock(m_);
  return velocity_;
}
double VirtualActuator::applied_torque() const {
  std::lock_guard lock(m_);
  return applied_torque_;
}
double VirtualActuator::temperature() const {
  std::lock_guard lock(m_);
  return temperature_;
}
bool VirtualActuator::is_enabled() const {
  std::lock_guard lock(m_);
  return enabled_;
}
MitCommand VirtualActuator::last_command() const {
  std::lock_guard lock(m_);
  return command_;
}

SimFleet::SimFleet(const std::vector<VirtualActuatorParams>& actuators,
                   const BusConfig& bus_config, std::shared_ptr<TimeSource> ts) {
  if (!ts) ts = default_time_source();
  for (const auto& params : actuators) {
    auto act = std::make_unique<VirtualActuator>(params, ts);
    act->attach(bus_config);
    actuators_.push_back(std::move(act));
  }
}

VirtualActuator& SimFleet::actuator(uint8_t can_id) {
  for (auto& a : actuators_)
    if (a->can_id() == can_id) return *a;
  throw UsageError("no virtual actuator with id " + std::to_string(int(can_id)));
}

void SimFleet::detach(uint8_t can_id) { actuator(can_id).detach(); }

std::vector<VirtualActuator*> SimFleet::all() {
  std::vector<VirtualActuator*> out;
  out.reserve(actuators_.size());
  for (auto& a : actuators_) out.push_back(a.get());
  return out;
}

std::vector<TrajectoryPoint> run_scenario(const ScenarioConfig& config,
                                          const std::vector<ScenarioCommand>& script) {
  if (config.step_s <= 0) throw ValidationError("scenario step must be positive");
  if (config.duration_s < 0) throw ValidationError("scenario duration must be >= 0");
  for (size_t i = 1; i < script.size(); ++i)
    if (script[i].t < script[i - 1].t)
      throw ValidationError("script times must be non-decreasing (command " +
                            std::to_string(i) + ")");
  for (const auto& cmd : script) {
    const bool known = std::any_of(
        config.actuators.begin(), config.actuators.end(),
        [&](const auto& p) { return p.can_id == cmd.can_id; });
    if (!known)
      throw ValidationError("script addresses unknown actuator id " +
                            std::to_string(int(cmd.can_id)));
  }

  static std::atomic<uint64_t> scenario_counter{0};
  auto vts = std::make_shared<VirtualTimeSource>();
  BusConfig bus_config;
  bus_config.backend = BusBackend::Virtual;
  bus_config.interface_name =
      "scenario-" + std::to_string(scenario_counter.fetch_add(1));

  SimFleet fleet(config.actuators, bus_config, vts);
  auto injector = open_bus(bus_config, vts);

  const auto send_scripted = [&](const ScenarioCommand& cmd) {
    const ActuatorModelSpec& model = fleet.actuator(cmd.can_id).model();
    const FamilyLayout& layout = family_layout(model.family);
    Payload payload{};
    switch (cmd.kind) {
      case ScenarioCommand::Kind::Enable:
        payload = encode_special(SpecialFrameKind::Enable, model.family);
        break;
      case ScenarioCommand::Kind::Disable:
        payload = encode_special(SpecialFrameKind::Disable, model.family);
        break;
      case ScenarioCommand::Kind::ZeroPosition:
        payload = encode_special(SpecialFrameKind::ZeroPosition, model.family);
        break;
      case ScenarioCommand::Kind::Impedance:
        payload = encode_mit_command(cmd.command, model);
        break;
    }
    injector->send(make_frame(layout.command_arb_id(cmd.can_id), payload,
                              layout.extended_id));
    while (injector->recv(0)) {
    }
  };

  std::vector<TrajectoryPoint> log;
  const auto steps = static_cast<uint64_t>(std::llround(config.duration_s / config.step_s));
  log.reserve((steps + 1) * config.actuators.size());
  size_t next_cmd = 0;
  for (uint64_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * config.step_s;
    vts->sleep_until(t);
    while (next_cmd < script.size() && script[next_cmd].t <= t + 1e-12)
      send_scripted(script[next_cmd++]);
    for (VirtualActuator* a : fleet.all()) {
      a->advance_to(t);
      log.push_back({t, a->can_id(), a->position(), a->velocity(),
                     a->applied_torque(), a->temperature()});
    }
  }
  return log;
}

std::vector<ScenarioCommand> parse_scenario_script(std::string_view text) {
  std::vector<ScenarioCommand> script;
  std::stringstream ss{std::string(text)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::stringstream row(line);
    ScenarioCommand cmd;
    int id = 0;
    std::string kind;
    if (!(row >> cmd.t >> id >> kind) || id <= 0 || id > 255)
      throw ValidationError("scenario line " + std::to_string(line_no) +
                            ": expected 't can_id kind ...'");
    cmd.can_id = static_cast<uint8_t>(id);
    if (kind == "enable") {
      cmd.kind = ScenarioCommand::Kind::Enable;
    } else if (kind == "disable") {
      cmd.kind = ScenarioCommand::Kind::Disable;
    } else if (kind == "zero") {
      cmd.kind = ScenarioCommand::Kind::ZeroPosition;
    } else if (kind == "cmd") {
      cmd.kind = ScenarioCommand::Kind::Impedance;
      if (!(row >> cmd.command.position >> cmd.command.velocity >>
            cmd.command.kp >> cmd.command.kd >> cmd.command.torque_ff))
        throw ValidationError("scenario line " + std::to_string(line_no) +
                              ": cmd needs pos vel kp kd tau");
    } else {
      throw ValidationError("scenario line " + std::to_string(line_no) +
                            ": unknown kind '" + kind + "'");
    }
    script.push_back(cmd);
  }
  return script;
}

void write_trajectory_csv(const std::vector<TrajectoryPoint>& log,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trajectory to '" + path + "'");
  out << "t,can_id,position,velocity,applied_torque,temperature\n";
  for (const auto& p : log) {
    out << detail::format_double(p.t) << ',' << int(p.can_id) << ','
        << detail::format_double(p.position) << ','
        << detail::format_double(p.velocity) << ','
        << detail::format_double(p.applied_torque) << ','
        << detail::format_double(p.temperature) << '\n';
  }
}

}  // namespace qdd
