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

#include "qdd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdd/clocking.hpp"
#include "qdd/simulation.hpp"
#include "qdd/telemetry.hpp"

namespace qdd::cli {

using nlohmann::json;

namespace {

std::atomic<int> g_interrupts{0};

void sigint_handler(int) {
  // Third strike: the operator wants out now.
  if (g_interrupts.fetch_add(1) + 1 >= 3) ::_exit(130);
}

struct SignalGuard {
  struct sigaction old_int {};
  SignalGuard() {
    g_interrupts = 0;
    struct sigaction sa {};
    sa.sa_handler = sigint_handler;
    sigemptyset(&sa.sa_mask);
    ::sigaction(SIGINT, &sa, &old_int);
  }
  ~SignalGuard() { ::sigaction(SIGINT, &old_int, nullptr); }
};

std::string backend_name(BusBackend b) {
  return b == BusBackend::Virtual ? "virtual" : "can";
}

std::string bus_spec_string(const BusConfig& bus) {
  return backend_name(bus.backend) + ":" + bus.interface_name;
}

std::vector<std::pair<std::string, uint8_t>> parse_roster(const std::string& text) {
  std::vector<std::pair<std::string, uint8_t>> roster;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos)
      throw ConfigError("actuator entry '" + item + "' must be MODEL:CAN_ID");
    std::string model = item.substr(0, colon);
    const auto strip = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    strip(model);
    int id = 0;
    try {
      id = std::stoi(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad CAN id in actuator entry '" + item + "'");
    }
    if (id < 1 || id > 255)
      throw ConfigError("CAN id must be in [1, 255], got " + std::to_string(id));
    roster.emplace_back(std::move(model), static_cast<uint8_t>(id));
  }
  if (roster.empty()) throw ConfigError("actuator roster is empty");
  return roster;
}

json bus_to_json(const BusConfig& bus) {
  return json{{"backend", backend_name(bus.backend)},
              {"interface", bus.interface_name},
              {"receive_timeout_s", bus.receive_timeout_s},
              {"virtual",
               {{"capacity_fps", bus.virtual_opts.capacity_fps},
                {"burst_frames", bus.virtual_opts.burst_frames},
                {"queue_depth", bus.virtual_opts.queue_depth},
                {"record_traffic", bus.virtual_opts.record_traffic},
                {"exclusive", bus.virtual_opts.exclusive}}}};
}

BusConfig bus_from_json(const json& j) {
  BusConfig bus;
  const std::string backend = j.value("backend", "virtual");
  if (backend == "virtual")
    bus.backend = BusBackend::Virtual;
  else if (backend == "can")
    bus.backend = BusBackend::SocketCan;
  else
    throw ConfigError("unknown bus backend '" + backend + "'");
  bus.interface_name = j.value("interface", "vbus0");
  bus.receive_timeout_s = j.value("receive_timeout_s", 1.0);
  if (j.contains("virtual")) {
    const json& v = j["virtual"];
    bus.virtual_opts.capacity_fps = v.value("capacity_fps", 0.0);
    bus.virtual_opts.burst_frames = v.value("burst_frames", 64.0);
    bus.virtual_opts.queue_depth = v.value("queue_depth", size_t{8192});
    bus.virtual_opts.record_traffic = v.value("record_traffic", false);
    bus.virtual_opts.exclusive = v.value("exclusive", false);
  }
  return bus;
}

}  // namespace

std::string controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::SinePosition: return "sine-position";
    case ControllerKind::TorqueStep: return "torque-step";
    case ControllerKind::ImpedanceHold: return "impedance-hold";
    case ControllerKind::VelocityRamp: return "velocity-ramp";
  }
  return "?";
}

std::vector<std::string> controller_names() {
  return {"sine-position", "torque-step", "impedance-hold", "velocity-ramp"};
}

ControllerKind controller_from_name(const std::string& name) {
  if (name == "sine-position") return ControllerKind::SinePosition;
  if (name == "torque-step") return ControllerKind::TorqueStep;
  if (name == "impedance-hold") return ControllerKind::ImpedanceHold;
  if (name == "velocity-ramp") return ControllerKind::VelocityRamp;
  std::string msg = "unknown controller '" + name + "'; available:";
  for (const auto& n : controller_names()) msg += " " + n;
  throw ConfigError(msg);
}

BusConfig parse_bus_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("bus spec '" + spec + "' must be virtual:NAME or can:IFACE");
  const std::string kind = spec.substr(0, colon);
  const std::string name = spec.substr(colon + 1);
  if (name.empty()) throw ConfigError("bus spec '" + spec + "' has no interface name");
  BusConfig bus;
  bus.interface_name = name;
  if (kind == "virtual")
    bus.backend = BusBackend::Virtual;
  else if (kind == "can")
    bus.backend = BusBackend::SocketCan;
  else
    throw ConfigError("unknown bus kind '" + kind + "' (use virtual: or can:)");
  return bus;
}

std::string run_config_to_json(const RunConfig& config) {
  json roster = json::array();
  for (const auto& [model, id] : config.roster)
    roster.push_back(json::array({model, int(id)}));
  json j{
      {"bus", bus_to_json(config.bus)},
      {"actuators", roster},
      {"controller", controller_name(config.controller)},
      {"params",
       {{"amplitude", config.params.amplitude},
        {"wave_hz", config.params.wave_hz},
        {"setpoint", config.params.setpoint},
        {"kp", config.params.kp},
        {"kd", config.params.kd},
        {"torque", config.params.torque},
        {"step_time_s", config.params.step_time_s},
        {"ramp_rate", config.params.ramp_rate}}},
      {"frequency_hz", config.frequency_hz},
      {"duration_s", config.duration_s},
      {"telemetry", config.telemetry_destination},
      {"record",
       {{"path", config.record_path},
        {"delimiter", std::string(1, config.record_options.delimiter)},
        {"buffer_capacity", config.record_options.buffer_capacity},
        {"overwrite", config.record_options.overwrite}}},
      {"safety",
       {{"saturate_to_rated", config.safety.saturate_to_rated},
        {"thermal_autolimit", config.safety.thermal_autolimit},
        {"rms_window_s", config.safety.rms_window_s},
        {"warn_on_rated_exceeded", config.safety.warn_on_rated_exceeded},
        {"staleness_window_s", config.safety.staleness_window_s},
        {"thermal_release_factor", config.safety.thermal_release_factor},
        {"thermal_threshold_nm", config.safety.thermal_threshold_nm
                                     ? json(*config.safety.thermal_threshold_nm)
                                     : json(nullptr)},
        {"log_warnings", config.safety.log_warnings}}},
      {"sim", config.spawn_sim}};
  return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    RunConfig config;
    if (j.contains("bus")) config.bus = bus_from_json(j["bus"]);
    if (j.contains("actuators")) {
      config.roster.clear();
      for (const auto& entry : j["actuators"]) {
        const int id = entry.at(1).get<int>();
        if (id < 1 || id > 255)
          throw ConfigError("CAN id must be in [1, 255], got " + std::to_string(id));
        config.roster.emplace_back(entry.at(0).get<std::string>(),
                                   static_cast<uint8_t>(id));
      }
    }
    if (j.contains("controller"))
      config.controller = controller_from_name(j["controller"].get<std::string>());
    if (j.contains("params")) {
      const json& p = j["params"];
      config.params.amplitude = p.value("amplitude", config.params.amplitude);
      config.params.wave_hz = p.value("wave_hz", config.params.wave_hz);
      config.params.setpoint = p.value("setpoint", config.params.setpoint);
      config.params.kp = p.value("kp", config.params.kp);
      config.params.kd = p.value("kd", config.params.kd);
      config.params.torque = p.value("torque", config.params.torque);
      config.params.step_time_s = p.value("step_time_s", config.params.step_time_s);
      config.params.ramp_rate = p.value("ramp_rate", config.params.ramp_rate);
    }
    config.frequency_hz = j.value("frequency_hz", config.frequency_hz);
    config.duration_s = j.value("duration_s", config.duration_s);
    config.telemetry_destination = j.value("telemetry", config.telemetry_destination);
    if (j.contains("record")) {
      const json& r = j["record"];
      config.record_path = r.value("path", config.record_path);
      const std::string d = r.value("delimiter", std::string(","));
      if (d.size() != 1) throw ConfigError("record delimiter must be one character");
      config.record_options.delimiter = d[0];
      config.record_options.buffer_capacity =
          r.value("buffer_capacity", config.record_options.buffer_capacity);
      config.record_options.overwrite =
          r.value("overwrite", config.record_options.overwrite);
    }
    if (j.contains("safety")) {
      const json& s = j["safety"];
      config.safety.saturate_to_rated =
          s.value("saturate_to_rated", config.safety.saturate_to_rated);
      config.safety.thermal_autolimit =
          s.value("thermal_autolimit", config.safety.thermal_autolimit);
      config.safety.rms_window_s = s.value("rms_window_s", config.safety.rms_window_s);
      config.safety.warn_on_rated_exceeded =
          s.value("warn_on_rated_exceeded", config.safety.warn_on_rated_exceeded);
      config.safety.staleness_window_s =
          s.value("staleness_window_s", config.safety.staleness_window_s);
      config.safety.thermal_release_factor =
          s.value("thermal_release_factor", config.safety.thermal_release_factor);
      if (s.contains("thermal_threshold_nm") && !s["thermal_threshold_nm"].is_null())
        config.safety.thermal_threshold_nm = s["thermal_threshold_nm"].get<double>();
      config.safety.log_warnings = s.value("log_warnings", config.safety.log_warnings);
    }
    config.spawn_sim = j.value("sim", config.spawn_sim);
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

namespace {

void validate_run_config(const RunConfig& config) {
  if (config.roster.empty())
    throw ConfigError("controller runs need a non-empty actuator roster");
  if (!(config.frequency_hz > 0)) throw ConfigError("frequency must be positive");
  if (config.duration_s < 0) throw ConfigError("duration must be >= 0");
  std::vector<uint8_t> seen;
  for (const auto& [model_name, id] : config.roster) {
    if (std::find(seen.begin(), seen.end(), id) != seen.end())
      throw ConfigError("duplicate CAN id " + std::to_string(int(id)) +
                        " in actuator roster");
    seen.push_back(id);
    const ActuatorModelSpec& model = lookup_model(model_name);
    // Gains are checked here, at config time, not clamped in flight.
    const bool uses_gains = config.controller == ControllerKind::SinePosition ||
                            config.controller == ControllerKind::ImpedanceHold;
    if (uses_gains) {
      if (config.params.kp < model.kp.min || config.params.kp > model.kp.max)
        throw ConfigError("kp " + std::to_string(config.params.kp) +
                          " outside range of model '" + model.name + "'");
    }
    if (uses_gains || config.controller == ControllerKind::VelocityRamp) {
      if (config.params.kd < model.kd.min || config.params.kd > model.kd.max)
        throw ConfigError("kd " + std::to_string(config.params.kd) +
                          " outside range of model '" + model.name + "'");
    }
  }
}

struct DisableGuard {
  ActuatorGroup& group;
  bool armed = true;
  bool clean = true;

  explicit DisableGuard(ActuatorGroup& g) : group(g) {}
  ~DisableGuard() { run(); }

  void run() {
    if (!armed) return;
    armed = false;
    for (const auto& r : group.disable_all()) {
      if (!r.ok) {
        clean = false;
        std::fprintf(stderr, "disable failed for actuator %u: %s\n", r.can_id,
                     r.detail.c_str());
      }
    }
  }
};

int cmd_run(RunConfig config) {
  validate_run_config(config);
  auto ts = default_time_source();

  std::optional<SimFleet> fleet;
  if (config.spawn_sim) {
    if (config.bus.backend != BusBackend::Virtual)
      throw ConfigError("--sim needs a virtual bus");
    std::vector<VirtualActuatorParams> sim_params;
    for (const auto& [model, id] : config.roster) {
      VirtualActuatorParams p = sim_defaults();
      p.model = model;
      p.can_id = id;
      sim_params.push_back(std::move(p));
    }
    fleet.emplace(sim_params, config.bus, ts);
  }

  ActuatorGroup group(config.roster, config.bus, config.safety, ts);

  std::optional<TelemetryPublisher> telemetry;
  if (!config.telemetry_destination.empty())
    telemetry.emplace(config.telemetry_destination);

  std::optional<Recorder> recorder;
  if (!config.record_path.empty()) {
    std::vector<std::string> fields{"t"};
    for (const auto& [model, id] : config.roster) {
      const std::string suffix = "_" + std::to_string(int(id));
      fields.push_back("cmd" + suffix);
      fields.push_back("pos" + suffix);
      fields.push_back("vel" + suffix);
      fields.push_back("tq" + suffix);
      fields.push_back("temp" + suffix);
    }
    recorder.emplace(config.record_path, fields, config.record_options);
  }

  const auto enable_results = group.enable_all();
  bool all_enabled = true;
  for (const auto& r : enable_results) {
    if (!r.ok) {
      all_enabled = false;
      std::fprintf(stderr, "actuator %u not enabled: %s\n", r.can_id,
                   r.detail.c_str());
    }
  }
  if (!all_enabled) {
    group.disable_all();
    std::fprintf(stderr, "aborting before control start\n");
    return kExitRuntime;
  }

  SignalGuard signals;
  DisableGuard disable_guard(group);
  RateClock clock(config.frequency_hz, ts);
  const auto ticks = static_cast<uint64_t>(
      std::llround(config.frequency_hz * config.duration_s));
  std::map<SafetyEventKind, uint64_t> event_counts;
  uint64_t completed = 0;
  bool interrupted = false;

  try {
    for (uint64_t i = 0; i < ticks; ++i) {
      if (g_interrupts.load() > 0) {
        interrupted = true;
        break;
      }
      const double t = static_cast<double>(i) / config.frequency_hz;
      group.poll_feedback();
      for (const auto& [model, id] : config.roster) {
        double cmd_value = 0.0;
        switch (config.controller) {
          case ControllerKind::SinePosition: {
            cmd_value = config.params.amplitude *
                        std::sin(2.0 * M_PI * config.params.wave_hz * t);
            group.command_position(id, cmd_value, config.params.kp,
                                   config.params.kd);
            break;
          }
          case ControllerKind::TorqueStep: {
            const double torque =
                t >= config.params.step_time_s ? config.params.torque : 0.0;
            cmd_value = group.command_torque(id, torque).applied_torque;
            break;
          }
          case ControllerKind::ImpedanceHold: {
            MitCommand cmd;
            cmd.position = config.params.setpoint;
            cmd.kp = config.params.kp;
            cmd.kd = config.params.kd;
            cmd.torque_ff = config.params.torque;
            cmd_value = config.params.setpoint;
            group.command_impedance(id, cmd);
            break;
          }
          case ControllerKind::VelocityRamp: {
            const double target = config.params.setpoint;
            const double ramped = config.params.ramp_rate * t;
            cmd_value = target >= 0 ? std::min(target, ramped)
                                    : std::max(target, -ramped);
            group.command_velocity(id, cmd_value, config.params.kd);
            break;
          }
        }
        // Replies from virtual actuators land synchronously; refresh so the
        // recorded state reflects this tick's command.
        group.poll_feedback();
        const ActuatorState state = group.query_state(id);
        if (telemetry) {
          TelemetryRecord rec(t);
          const std::string base = "actuators." + std::to_string(int(id));
          rec.set(base + ".command", cmd_value);
          rec.set(base + ".position", state.position);
          rec.set(base + ".velocity", state.velocity);
          rec.set(base + ".torque", state.torque);
          rec.set(base + ".temperature", state.temperature);
          telemetry->publish(rec);
        }
        (void)model;
      }
      if (recorder) {
        LogRow row;
        row.reserve(1 + 5 * config.roster.size());
        row.emplace_back(t);
        for (const auto& [model, id] : config.roster) {
          const ActuatorState state = group.query_state(id);
          double cmd_value = 0.0;
          switch (config.controller) {
            case ControllerKind::SinePosition:
              cmd_value = config.params.amplitude *
                          std::sin(2.0 * M_PI * config.params.wave_hz * t);
              break;
            case ControllerKind::TorqueStep:
              cmd_value = t >= config.params.step_time_s ? config.params.torque : 0.0;
              break;
            case ControllerKind::ImpedanceHold:
              cmd_value = config.params.setpoint;
              break;
            case ControllerKind::VelocityRamp: {
              const double ramped = config.params.ramp_rate * t;
              cmd_value = config.params.setpoint >= 0
                              ? std::min(config.params.setpoint, ramped)
                              : std::max(config.params.setpoint, -ramped);
              break;
            }
          }
          row.emplace_back(cmd_value);
          row.emplace_back(state.position);
          row.emplace_back(state.velocity);
          row.emplace_back(state.torque);
          row.emplace_back(state.temperature);
          (void)model;
        }
        recorder->log(std::move(row));
      }
      for (const auto& ev : group.drain_events()) ++event_counts[ev.kind];
      clock.tick();
      ++completed;
    }
  } catch (const Error& e) {
    disable_guard.run();
    if (recorder) {
      try {
        recorder->close();
      } catch (const Error&) {
      }
    }
    std::fprintf(stderr, "controller stopped: %s\n", e.what());
    return kExitRuntime;
  }

  disable_guard.run();
  if (recorder) recorder->close();

  if (const auto stats = clock.stats()) {
    std::printf("loop: %llu ticks, mean period %.6f ms (target %.6f ms), "
                "stddev %.6f ms, max lateness %.3f ms, overruns %llu\n",
                static_cast<unsigned long long>(stats->tick_count),
                stats->mean_period * 1e3, clock.target_period() * 1e3,
                stats->period_stddev * 1e3, stats->max_lateness * 1e3,
                static_cast<unsigned long long>(stats->overrun_count));
  }
  std::printf("completed %llu/%llu ticks%s\n",
              static_cast<unsigned long long>(completed),
              static_cast<unsigned long long>(ticks),
              interrupted ? " (interrupted)" : "");
  if (event_counts.empty()) {
    std::printf("safety: no events\n");
  } else {
    for (const auto& [kind, count] : event_counts)
      std::printf("safety: %s x%llu\n", std::string(safety_event_name(kind)).c_str(),
                  static_cast<unsigned long long>(count));
  }
  if (telemetry) {
    const TelemetryStats ts_stats = telemetry->stats();
    std::printf("telemetry: sent %llu dropped %llu rejected %llu\n",
                static_cast<unsigned long long>(ts_stats.sent),
                static_cast<unsigned long long>(ts_stats.dropped),
                static_cast<unsigned long long>(ts_stats.rejected));
  }
  return disable_guard.clean ? kExitOk : kExitSafetyAbort;
}

int cmd_sim(const BusConfig& bus, const std::vector<std::pair<std::string, uint8_t>>& roster,
            double duration_s) {
  if (roster.empty()) throw ConfigError("sim needs a non-empty actuator list");
  std::vector<uint8_t> seen;
  for (const auto& [model, id] : roster) {
    if (std::find(seen.begin(), seen.end(), id) != seen.end())
      throw ConfigError("duplicate CAN id " + std::to_string(int(id)) +
                        " in sim actuator list");
    seen.push_back(id);
    lookup_model(model);
  }
  auto ts = default_time_source();
  std::vector<VirtualActuatorParams> params;
  for (const auto& [model, id] : roster) {
    VirtualActuatorParams p = sim_defaults();
    p.model = model;
    p.can_id = id;
    params.push_back(std::move(p));
  }
  SimFleet fleet(params, bus, ts);
  for (const auto& [model, id] : roster)
    std::printf("attached %s id=%u on %s\n", model.c_str(), id,
                bus_spec_string(bus).c_str());
  std::fflush(stdout);

  SignalGuard signals;
  const double deadline = duration_s > 0 ? ts->now() + duration_s : 0.0;
  while (g_interrupts.load() == 0) {
    if (duration_s > 0 && ts->now() >= deadline) break;
    ts->sleep_for(0.05);
  }
  std::printf("sim fleet stopped\n");
  return kExitOk;
}

int cmd_bench(const BusConfig& bus_template, std::vector<int> counts,
              MaxRateConfig rate_config, double capacity, double burst,
              const std::string& report_path, const std::string& model_name) {
  if (counts.empty()) throw ConfigError("bench needs at least one actuator count");
  for (const int n : counts)
    if (n < 1) throw ConfigError("actuator counts must be >= 1");

  auto ts = default_time_source();
  struct Row {
    int actuators;
    MaxRateResult result;
  };
  std::vector<Row> rows;

  std::printf("%-10s %-12s %-10s %s\n", "actuators", "max_hz", "validated", "probes");
  for (const int n : counts) {
    BusConfig bus = bus_template;
    if (bus.backend == BusBackend::Virtual) {
      // One fresh domain per count so token-bucket state never leaks across
      // measurements.
      bus.interface_name = bus_template.interface_name + "-n" + std::to_string(n);
      bus.virtual_opts.capacity_fps = capacity;
      bus.virtual_opts.burst_frames = std::max(burst, 16.0 * n);
    }
    auto handle = open_bus(bus, ts);
    MaxRateResult result = find_max_rate(*handle, static_cast<size_t>(n),
                                         rate_config, ts, model_name);
    if (result.below_lo)
      std::printf("%-10d %-12s %-10s %zu\n", n,
                  ("<" + std::to_string(rate_config.lo_hz)).c_str(), "no",
                  result.probes.size());
    else
      std::printf("%-10d %-12.1f %-10s %zu\n", n, result.max_hz,
                  result.validated ? "yes" : "no", result.probes.size());
    std::fflush(stdout);
    rows.push_back({n, std::move(result)});
  }

  if (!report_path.empty()) {
    RecorderOptions opts;
    opts.overwrite = true;
    opts.buffer_capacity = 16;
    Recorder report(report_path, {"actuators", "max_hz", "validated", "probes"}, opts);
    for (const auto& row : rows) {
      report.log({double(row.actuators),
                  row.result.below_lo ? 0.0 : row.result.max_hz,
                  std::string(row.result.validated ? "yes" : "no"),
                  double(row.result.probes.size())});
    }
    report.close();
    std::printf("report written to %s\n", report_path.c_str());
  }
  return kExitOk;
}

int cmd_record_inspect(const std::string& path, char delimiter) {
  const auto [fields, rows] = inspect_recording(path, delimiter);
  std::printf("fields (%zu):", fields.size());
  for (const auto& f : fields) std::printf(" %s", f.c_str());
  std::printf("\nrows: %llu\n", static_cast<unsigned long long>(rows));
  return kExitOk;
}

std::string default_bus_spec() {
  if (const char* env = std::getenv("QDDKIT_BUS"); env && *env) return env;
  return "virtual:vbus0";
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"qddkit - QDD actuator control runtime"};
  app.require_subcommand(1);

  // sim ---------------------------------------------------------------
  auto* sim = app.add_subcommand("sim", "run a virtual actuator fleet");
  std::string sim_bus_spec;
  std::string sim_actuators;
  std::string sim_config_path;
  double sim_duration = 0.0;
  sim->add_option("--bus", sim_bus_spec, "virtual:NAME or can:IFACE");
  sim->add_option("--actuators", sim_actuators, "MODEL:ID[,MODEL:ID...]");
  sim->add_option("--config", sim_config_path, "JSON config file");
  sim->add_option("--duration", sim_duration, "seconds to run (0 = until interrupt)");

  // run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run an example controller");
  std::string run_bus_spec, run_actuators, run_config_path, run_controller_name;
  std::string run_telemetry, run_record, run_record_delim = ",";
  double run_freq = 0, run_duration = 0, run_amplitude = 0, run_wave_hz = 0;
  double run_setpoint = 0, run_kp = 0, run_kd = 0, run_torque = 0;
  double run_step_time = 0, run_ramp_rate = 0;
  size_t run_record_buffer = 0;
  bool run_saturate = false, run_thermal = false, run_sim_flag = false;
  bool run_record_overwrite = false;
  auto* o_bus = run->add_option("--bus", run_bus_spec, "virtual:NAME or can:IFACE");
  auto* o_act = run->add_option("--actuators", run_actuators, "MODEL:ID[,...]");
  run->add_option("--config", run_config_path, "JSON config file (flags override)");
  auto* o_ctl = run->add_option("--controller", run_controller_name,
                                "sine-position | torque-step | impedance-hold | velocity-ramp");
  auto* o_freq = run->add_option("--freq", run_freq, "loop frequency, Hz");
  auto* o_dur = run->add_option("--duration", run_duration, "seconds");
  auto* o_amp = run->add_option("--amplitude", run_amplitude, "rad");
  auto* o_whz = run->add_option("--wave-hz", run_wave_hz, "sine frequency, Hz");
  auto* o_set = run->add_option("--setpoint", run_setpoint, "rad or rad/s");
  auto* o_kp = run->add_option("--kp", run_kp, "stiffness gain");
  auto* o_kd = run->add_option("--kd", run_kd, "damping gain");
  auto* o_tq = run->add_option("--torque", run_torque, "Nm");
  auto* o_stt = run->add_option("--step-time", run_step_time, "torque-step onset, s");
  auto* o_rmp = run->add_option("--ramp-rate", run_ramp_rate, "rad/s^2");
  auto* o_tel = run->add_option("--telemetry", run_telemetry, "HOST:PORT");
  auto* o_rec = run->add_option("--record", run_record, "recording path");
  auto* o_rdl = run->add_option("--record-delimiter", run_record_delim, "one character");
  auto* o_rbf = run->add_option("--record-buffer", run_record_buffer, "rows per flush");
  auto* o_rov = run->add_flag("--record-overwrite", run_record_overwrite,
                              "replace an existing recording");
  auto* o_sat = run->add_flag("--saturate-rated", run_saturate,
                              "clamp torque to rated limits");
  auto* o_thl = run->add_flag("--thermal-autolimit", run_thermal,
                              "RMS thermal torque limiting");
  auto* o_simf = run->add_flag("--sim", run_sim_flag,
                               "attach virtual actuators matching the roster");

  // bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "binary-search the max loop rate");
  std::string bench_bus_spec, bench_counts = "1,2,4,8", bench_report;
  std::string bench_model = "AK80-9";
  MaxRateConfig bench_cfg;
  double bench_capacity = 1000.0, bench_burst = 64.0;
  bench->add_option("--bus", bench_bus_spec, "virtual:NAME or can:IFACE");
  bench->add_option("--counts", bench_counts, "comma list of actuator counts");
  bench->add_option("--lo", bench_cfg.lo_hz, "search lower bound, Hz");
  bench->add_option("--hi", bench_cfg.hi_hz, "search upper bound, Hz");
  bench->add_option("--resolution", bench_cfg.resolution_hz, "stop width, Hz");
  bench->add_option("--dwell", bench_cfg.dwell_s, "seconds per probe");
  bench->add_option("--validation-dwell", bench_cfg.validation_dwell_s,
                    "seconds for the final validation");
  bench->add_option("--settle", bench_cfg.settle_s,
                    "idle seconds before each probe");
  bench->add_option("--capacity", bench_capacity, "virtual bus frames/second");
  bench->add_option("--burst", bench_burst, "virtual bus burst depth, frames");
  bench->add_option("--report", bench_report, "CSV report path");
  bench->add_option("--model", bench_model, "actuator model for probe frames");

  // record-inspect ------------------------------------------------------
  auto* inspect = app.add_subcommand("record-inspect",
                                     "print a recording's header and row count");
  std::string inspect_path, inspect_delim = ",";
  inspect->add_option("path", inspect_path, "recording file")->required();
  inspect->add_option("--delimiter", inspect_delim, "one character");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim->parsed()) {
      RunConfig config;
      config.bus = parse_bus_spec(default_bus_spec());
      if (!sim_config_path.empty()) {
        std::ifstream in(sim_config_path);
        if (!in) throw ConfigError("cannot open config '" + sim_config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        config = run_config_from_json(ss.str());
      }
      if (!sim_bus_spec.empty()) config.bus = parse_bus_spec(sim_bus_spec);
      if (!sim_actuators.empty()) config.roster = parse_roster(sim_actuators);
      return cmd_sim(config.bus, config.roster, sim_duration);
    }

    if (run->parsed()) {
      RunConfig config;
      config.bus = parse_bus_spec(default_bus_spec());
      if (!run_config_path.empty()) {
        std::ifstream in(run_config_path);
        if (!in) throw ConfigError("cannot open config '" + run_config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        config = run_config_from_json(ss.str());
      }
      if (o_bus->count()) config.bus = parse_bus_spec(run_bus_spec);
      if (o_act->count()) config.roster = parse_roster(run_actuators);
      if (o_ctl->count()) config.controller = controller_from_name(run_controller_name);
      if (o_freq->count()) config.frequency_hz = run_freq;
      if (o_dur->count()) config.duration_s = run_duration;
      if (o_amp->count()) config.params.amplitude = run_amplitude;
      if (o_whz->count()) config.params.wave_hz = run_wave_hz;
      if (o_set->count()) config.params.setpoint = run_setpoint;
      if (o_kp->count()) config.params.kp = run_kp;
      if (o_kd->count()) config.params.kd = run_kd;
      if (o_tq->count()) config.params.torque = run_torque;
      if (o_stt->count()) config.params.step_time_s = run_step_time;
      if (o_rmp->count()) config.params.ramp_rate = run_ramp_rate;
      if (o_tel->count()) config.telemetry_destination = run_telemetry;
      if (o_rec->count()) config.record_path = run_record;
      if (o_rdl->count()) {
        if (run_record_delim.size() != 1)
          throw ConfigError("record delimiter must be one character");
        config.record_options.delimiter = run_record_delim[0];
      }
      if (o_rbf->count()) config.record_options.buffer_capacity = run_record_buffer;
      if (o_rov->count()) config.record_options.overwrite = run_record_overwrite;
      if (o_sat->count()) config.safety.saturate_to_rated = run_saturate;
      if (o_thl->count()) config.safety.thermal_autolimit = run_thermal;
      if (o_simf->count()) config.spawn_sim = run_sim_flag;
      return cmd_run(std::move(config));
    }

    if (bench->parsed()) {
      BusConfig bus = parse_bus_spec(
          bench_bus_spec.empty() ? "virtual:bench" : bench_bus_spec);
      std::vector<int> counts;
      std::stringstream ss(bench_counts);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          counts.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw ConfigError("bad actuator count '" + item + "'");
        }
      }
      return cmd_bench(bus, counts, bench_cfg, bench_capacity, bench_burst,
                       bench_report, bench_model);
    }

    if (inspect->parsed()) {
      if (inspect_delim.size() != 1)
        throw ConfigError("delimiter must be one character");
      return cmd_record_inspect(inspect_path, inspect_delim[0]);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const UnknownModelError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("qddkit");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qdd::cli
