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

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qdd/actuation.hpp"
#include "qdd/bus.hpp"
#include "qdd/clocking.hpp"
#include "qdd/protocol.hpp"
#include "qdd/recorder.hpp"
#include "qdd/sensing.hpp"
#include "qdd/simulation.hpp"
#include "qdd/telemetry.hpp"
#include "qdd/time.hpp"

namespace py = pybind11;
using namespace qdd;

namespace {

py::bytes payload_bytes(const Payload& payload) {
  return py::bytes(reinterpret_cast<const char*>(payload.data()), payload.size());
}

std::vector<uint8_t> to_byte_vector(const py::bytes& data) {
  const std::string raw = data;
  return std::vector<uint8_t>(raw.begin(), raw.end());
}

LogRow to_log_row(const py::sequence& cells) {
  LogRow row;
  row.reserve(py::len(cells));
  for (const auto& cell : cells) {
    if (py::isinstance<py::str>(cell))
      row.emplace_back(cell.cast<std::string>());
    else
      row.emplace_back(cell.cast<double>());
  }
  return row;
}

void fill_record(TelemetryRecord& record, const std::string& prefix,
                 const py::dict& values) {
  for (const auto& [key, value] : values) {
    const std::string name = py::str(key);
    const std::string path = prefix.empty() ? name : prefix + "." + name;
    if (py::isinstance<py::dict>(value))
      fill_record(record, path, value.cast<py::dict>());
    else
      record.set(path, value.cast<double>());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "QDD actuator control runtime: CAN codecs, actuator groups, "
            "virtual bus and actuators, fixed-rate clocking, telemetry, "
            "and buffered recording";

  // Exceptions (base first so the derived translators take precedence).
  auto err = py::register_exception<Error>(m, "QddkitError");
  py::register_exception<CodecError>(m, "CodecError", err);
  py::register_exception<BusError>(m, "BusError", err);
  py::register_exception<UsageError>(m, "UsageError", err);
  py::register_exception<ConfigError>(m, "ConfigError", err);
  py::register_exception<ValidationError>(m, "ValidationError", err);
  py::register_exception<IoError>(m, "IoError", err);

  // Time sources --------------------------------------------------------
  py::class_<TimeSource, std::shared_ptr<TimeSource>>(m, "TimeSource")
      .def("now", &TimeSource::now)
      .def("sleep_for", &TimeSource::sleep_for,
           py::call_guard<py::gil_scoped_release>())
      .def_property_readonly("is_virtual", &TimeSource::is_virtual);
  py::class_<SteadyTimeSource, TimeSource, std::shared_ptr<SteadyTimeSource>>(
      m, "SteadyTimeSource")
      .def(py::init<>());
  py::class_<VirtualTimeSource, TimeSource, std::shared_ptr<VirtualTimeSource>>(
      m, "VirtualTimeSource")
      .def(py::init<double>(), py::arg("start") = 0.0)
      .def("advance", &VirtualTimeSource::advance);
  m.def("default_time_source", &default_time_source);

  // Protocol ------------------------------------------------------------
  py::class_<QuantizationSpec>(m, "QuantizationSpec")
      .def(py::init([](double min, double max, unsigned bits) {
             return QuantizationSpec{min, max, bits};
           }),
           py::arg("min"), py::arg("max"), py::arg("bits"))
      .def_readonly("min", &QuantizationSpec::min)
      .def_readonly("max", &QuantizationSpec::max)
      .def_readonly("bits", &QuantizationSpec::bits)
      .def_property_readonly("code_max", &QuantizationSpec::code_max);

  py::enum_<Family>(m, "Family")
      .value("CubeMars", Family::CubeMars)
      .value("RobStride", Family::RobStride)
      .value("CyberGear", Family::CyberGear);

  py::class_<ActuatorModelSpec>(m, "ActuatorModelSpec")
      .def_readonly("name", &ActuatorModelSpec::name)
      .def_readonly("family", &ActuatorModelSpec::family)
      .def_readonly("position", &ActuatorModelSpec::position)
      .def_readonly("velocity", &ActuatorModelSpec::velocity)
      .def_readonly("torque", &ActuatorModelSpec::torque)
      .def_readonly("kp", &ActuatorModelSpec::kp)
      .def_readonly("kd", &ActuatorModelSpec::kd)
      .def_readonly("rated_torque", &ActuatorModelSpec::rated_torque)
      .def_readonly("peak_torque", &ActuatorModelSpec::peak_torque)
      .def_readonly("max_temperature", &ActuatorModelSpec::max_temperature);

  py::class_<MitCommand>(m, "MitCommand")
      .def(py::init([](double position, double velocity, double kp, double kd,
                       double torque_ff) {
             return MitCommand{position, velocity, kp, kd, torque_ff};
           }),
           py::arg("position") = 0.0, py::arg("velocity") = 0.0,
           py::arg("kp") = 0.0, py::arg("kd") = 0.0, py::arg("torque_ff") = 0.0)
      .def_readwrite("position", &MitCommand::position)
      .def_readwrite("velocity", &MitCommand::velocity)
      .def_readwrite("kp", &MitCommand::kp)
      .def_readwrite("kd", &MitCommand::kd)
      .def_readwrite("torque_ff", &MitCommand::torque_ff);

  py::class_<MitFeedback>(m, "MitFeedback")
      .def_readonly("can_id", &MitFeedback::can_id)
      .def_readonly("position", &MitFeedback::position)
      .def_readonly("velocity", &MitFeedback::velocity)
      .def_readonly("torque", &MitFeedback::torque)
      .def_readonly("temperature", &MitFeedback::temperature)
      .def_readonly("fault_code", &MitFeedback::fault_code);

  py::enum_<SpecialFrameKind>(m, "SpecialFrameKind")
      .value("Enable", SpecialFrameKind::Enable)
      .value("Disable", SpecialFrameKind::Disable)
      .value("ZeroPosition", SpecialFrameKind::ZeroPosition);

  m.def("float_to_uint", &float_to_uint, py::arg("value"), py::arg("spec"));
  m.def("uint_to_float", &uint_to_float, py::arg("code"), py::arg("spec"));
  m.def("lookup_model", &lookup_model, py::return_value_policy::reference,
        py::arg("name"));
  m.def("model_names", &model_names);
  m.def(
      "encode_mit_command",
      [](const MitCommand& cmd, const ActuatorModelSpec& model) {
        return payload_bytes(encode_mit_command(cmd, model));
      },
      py::arg("command"), py::arg("model"));
  m.def(
      "decode_mit_command",
      [](const py::bytes& payload, const ActuatorModelSpec& model) {
        return decode_mit_command(to_byte_vector(payload), model);
      },
      py::arg("payload"), py::arg("model"));
  m.def(
      "encode_feedback",
      [](const MitFeedback& fb, const ActuatorModelSpec& model) {
        return payload_bytes(encode_feedback(fb, model));
      },
      py::arg("feedback"), py::arg("model"));
  m.def(
      "decode_feedback",
      [](const py::bytes& payload, const ActuatorModelSpec& model) {
        return decode_feedback(to_byte_vector(payload), model);
      },
      py::arg("payload"), py::arg("model"));
  m.def(
      "encode_special",
      [](SpecialFrameKind kind, Family family) {
        return payload_bytes(encode_special(kind, family));
      },
      py::arg("kind"), py::arg("family"));

  // Bus -------------------------------------------------------------------
  py::enum_<BusBackend>(m, "BusBackend")
      .value("Virtual", BusBackend::Virtual)
      .value("SocketCan", BusBackend::SocketCan);

  py::class_<VirtualBusOptions>(m, "VirtualBusOptions")
      .def(py::init<>())
      .def_readwrite("capacity_fps", &VirtualBusOptions::capacity_fps)
      .def_readwrite("burst_frames", &VirtualBusOptions::burst_frames)
      .def_readwrite("queue_depth", &VirtualBusOptions::queue_depth)
      .def_readwrite("record_traffic", &VirtualBusOptions::record_traffic)
      .def_readwrite("exclusive", &VirtualBusOptions::exclusive);

  py::class_<BusConfig>(m, "BusConfig")
      .def(py::init<>())
      .def_readwrite("backend", &BusConfig::backend)
      .def_readwrite("interface_name", &BusConfig::interface_name)
      .def_readwrite("receive_timeout_s", &BusConfig::receive_timeout_s)
      .def_readwrite("virtual_opts", &BusConfig::virtual_opts);

  py::enum_<SendResult>(m, "SendResult")
      .value("Ok", SendResult::Ok)
      .value("Backpressure", SendResult::Backpressure);

  py::class_<CanFrame>(m, "CanFrame")
      .def_readonly("arbitration_id", &CanFrame::arbitration_id)
      .def_readonly("is_extended", &CanFrame::is_extended)
      .def_readonly("timestamp", &CanFrame::timestamp)
      .def_property_readonly("payload", [](const CanFrame& f) {
        return py::bytes(reinterpret_cast<const char*>(f.data.data()), f.dlc);
      });
  m.def(
      "make_frame",
      [](uint32_t arbitration_id, const py::bytes& payload, bool is_extended) {
        return make_frame(arbitration_id, to_byte_vector(payload), is_extended);
      },
      py::arg("arbitration_id"), py::arg("payload"), py::arg("is_extended") = false);

  py::class_<CanBus>(m, "Bus")
      .def("send", &CanBus::send, py::arg("frame"),
           py::call_guard<py::gil_scoped_release>())
      .def("recv", &CanBus::recv, py::arg("timeout_s"),
           py::call_guard<py::gil_scoped_release>())
      .def("close", &CanBus::close)
      .def_property_readonly("is_open", &CanBus::is_open);
  m.def("open_bus", &open_bus, py::arg("config"), py::arg("time_source") = nullptr);

  py::class_<VirtualDomain, std::shared_ptr<VirtualDomain>>(m, "VirtualDomain")
      .def("traffic_log", &VirtualDomain::traffic_log)
      .def("clear_traffic_log", &VirtualDomain::clear_traffic_log)
      .def_property_readonly("handle_count", &VirtualDomain::handle_count)
      .def_property_readonly("frames_sent", &VirtualDomain::frames_sent)
      .def_property_readonly("backpressure_count", &VirtualDomain::backpressure_count);
  m.def("find_virtual_domain", &find_virtual_domain, py::arg("name"));

  // Actuation ---------------------------------------------------------------
  py::class_<SafetyConfig>(m, "SafetyConfig")
      .def(py::init<>())
      .def_readwrite("saturate_to_rated", &SafetyConfig::saturate_to_rated)
      .def_readwrite("thermal_autolimit", &SafetyConfig::thermal_autolimit)
      .def_readwrite("rms_window_s", &SafetyConfig::rms_window_s)
      .def_readwrite("warn_on_rated_exceeded", &SafetyConfig::warn_on_rated_exceeded)
      .def_readwrite("staleness_window_s", &SafetyConfig::staleness_window_s)
      .def_readwrite("thermal_release_factor", &SafetyConfig::thermal_release_factor)
      .def_readwrite("thermal_threshold_nm", &SafetyConfig::thermal_threshold_nm)
      .def_readwrite("log_warnings", &SafetyConfig::log_warnings);

  py::enum_<SafetyEventKind>(m, "SafetyEventKind")
      .value("RatedExceededWarning", SafetyEventKind::RatedExceededWarning)
      .value("ThermalLimitEngaged", SafetyEventKind::ThermalLimitEngaged)
      .value("ThermalLimitReleased", SafetyEventKind::ThermalLimitReleased)
      .value("StaleFeedback", SafetyEventKind::StaleFeedback);

  py::class_<SafetyEvent>(m, "SafetyEvent")
      .def_readonly("kind", &SafetyEvent::kind)
      .def_readonly("can_id", &SafetyEvent::can_id)
      .def_readonly("value", &SafetyEvent::value)
      .def_readonly("timestamp", &SafetyEvent::timestamp);

  py::class_<ActuatorState>(m, "ActuatorState")
      .def_readonly("position", &ActuatorState::position)
      .def_readonly("velocity", &ActuatorState::velocity)
      .def_readonly("torque", &ActuatorState::torque)
      .def_readonly("temperature", &ActuatorState::temperature)
      .def_readonly("timestamp", &ActuatorState::timestamp)
      .def_readonly("stale", &ActuatorState::stale)
      .def_readonly("has_feedback", &ActuatorState::has_feedback);

  py::class_<CommandEcho>(m, "CommandEcho")
      .def_readonly("applied_torque", &CommandEcho::applied_torque)
      .def_readonly("events", &CommandEcho::events);

  py::class_<ActuatorResult>(m, "ActuatorResult")
      .def_readonly("can_id", &ActuatorResult::can_id)
      .def_readonly("ok", &ActuatorResult::ok)
      .def_readonly("detail", &ActuatorResult::detail);

  py::class_<ActuatorGroup>(m, "ActuatorGroup")
      .def(py::init<const std::vector<std::pair<std::string, uint8_t>>&,
                    const BusConfig&, SafetyConfig, std::shared_ptr<TimeSource>>(),
           py::arg("roster"), py::arg("bus"), py::arg("safety") = SafetyConfig{},
           py::arg("time_source") = nullptr)
      .def_property_readonly("size", &ActuatorGroup::size)
      .def_property_readonly("can_ids", &ActuatorGroup::can_ids)
      .def("model", &ActuatorGroup::model, py::return_value_policy::reference,
           py::arg("can_id"))
      .def("enabled", &ActuatorGroup::enabled, py::arg("can_id"))
      .def("enable_all", &ActuatorGroup::enable_all,
           py::call_guard<py::gil_scoped_release>())
      .def("disable_all", &ActuatorGroup::disable_all,
           py::call_guard<py::gil_scoped_release>())
      .def("check_connection", &ActuatorGroup::check_connection,
           py::call_guard<py::gil_scoped_release>())
      .def("command_torque", &ActuatorGroup::command_torque, py::arg("can_id"),
           py::arg("torque_nm"), py::call_guard<py::gil_scoped_release>())
      .def("command_position", &ActuatorGroup::command_position, py::arg("can_id"),
           py::arg("position_rad"), py::arg("kp"), py::arg("kd"),
           py::call_guard<py::gil_scoped_release>())
      .def("command_velocity", &ActuatorGroup::command_velocity, py::arg("can_id"),
           py::arg("velocity_rad_s"), py::arg("kd"),
           py::call_guard<py::gil_scoped_release>())
      .def("command_impedance", &ActuatorGroup::command_impedance,
           py::arg("can_id"), py::arg("command"),
           py::call_guard<py::gil_scoped_release>())
      .def("query_state", &ActuatorGroup::query_state, py::arg("can_id"),
           py::call_guard<py::gil_scoped_release>())
      .def("rms_torque", &ActuatorGroup::rms_torque, py::arg("can_id"))
      .def("apply_safety", &ActuatorGroup::apply_safety, py::arg("can_id"),
           py::arg("torque_nm"))
      .def("poll_feedback", &ActuatorGroup::poll_feedback,
           py::call_guard<py::gil_scoped_release>())
      .def("drain_events", &ActuatorGroup::drain_events);

  // Simulation ---------------------------------------------------------------
  py::class_<ThermalParams>(m, "ThermalParams")
      .def(py::init<>())
      .def_readwrite("ambient_c", &ThermalParams::ambient_c)
      .def_readwrite("heating", &ThermalParams::heating)
      .def_readwrite("cooling", &ThermalParams::cooling);

  py::class_<VirtualActuatorParams>(m, "VirtualActuatorParams")
      .def(py::init<>())
      .def_readwrite("model", &VirtualActuatorParams::model)
      .def_readwrite("can_id", &VirtualActuatorParams::can_id)
      .def_readwrite("inertia", &VirtualActuatorParams::inertia)
      .def_readwrite("damping", &VirtualActuatorParams::damping)
      .def_readwrite("initial_position", &VirtualActuatorParams::initial_position)
      .def_readwrite("initial_velocity", &VirtualActuatorParams::initial_velocity)
      .def_readwrite("thermal", &VirtualActuatorParams::thermal)
      .def_readwrite("max_step_s", &VirtualActuatorParams::max_step_s)
      .def_readwrite("broadcast", &VirtualActuatorParams::broadcast)
      .def_readwrite("broadcast_period_s", &VirtualActuatorParams::broadcast_period_s);
  m.def("sim_defaults", &sim_defaults);

  py::class_<VirtualActuator>(m, "VirtualActuator")
      .def_property_readonly("can_id", &VirtualActuator::can_id)
      .def_property_readonly("position", &VirtualActuator::position)
      .def_property_readonly("velocity", &VirtualActuator::velocity)
      .def_property_readonly("applied_torque", &VirtualActuator::applied_torque)
      .def_property_readonly("temperature", &VirtualActuator::temperature)
      .def_property_readonly("enabled", &VirtualActuator::is_enabled)
      .def("step", &VirtualActuator::step, py::arg("dt"));

  py::class_<SimFleet>(m, "SimFleet")
      .def(py::init<const std::vector<VirtualActuatorParams>&, const BusConfig&,
                    std::shared_ptr<TimeSource>>(),
           py::arg("actuators"), py::arg("bus"), py::arg("time_source") = nullptr)
      .def_property_readonly("size", &SimFleet::size)
      .def("actuator", &SimFleet::actuator, py::return_value_policy::reference,
           py::arg("can_id"))
      .def("detach", &SimFleet::detach, py::arg("can_id"));

  // Clocking -----------------------------------------------------------------
  py::class_<TickReport>(m, "TickReport")
      .def_readonly("loop_index", &TickReport::loop_index)
      .def_readonly("actual_period", &TickReport::actual_period)
      .def_readonly("lateness", &TickReport::lateness)
      .def_readonly("overrun", &TickReport::overrun);

  py::class_<RateStats>(m, "RateStats")
      .def_readonly("mean_period", &RateStats::mean_period)
      .def_readonly("period_stddev", &RateStats::period_stddev)
      .def_readonly("max_lateness", &RateStats::max_lateness)
      .def_readonly("overrun_count", &RateStats::overrun_count)
      .def_readonly("tick_count", &RateStats::tick_count);

  py::class_<RateClock>(m, "RateClock")
      .def(py::init<double, std::shared_ptr<TimeSource>, double>(),
           py::arg("frequency_hz"), py::arg("time_source") = nullptr,
           py::arg("spin_threshold_s") = 200e-6)
      .def("tick", &RateClock::tick, py::call_guard<py::gil_scoped_release>())
      .def("stats", &RateClock::stats)
      .def("reset_stats", &RateClock::reset_stats)
      .def_property_readonly("target_period", &RateClock::target_period);

  py::class_<MaxRateConfig>(m, "MaxRateConfig")
      .def(py::init<>())
      .def_readwrite("lo_hz", &MaxRateConfig::lo_hz)
      .def_readwrite("hi_hz", &MaxRateConfig::hi_hz)
      .def_readwrite("resolution_hz", &MaxRateConfig::resolution_hz)
      .def_readwrite("dwell_s", &MaxRateConfig::dwell_s)
      .def_readwrite("validation_dwell_s", &MaxRateConfig::validation_dwell_s)
      .def_readwrite("settle_s", &MaxRateConfig::settle_s)
      .def_readwrite("max_overrun_fraction", &MaxRateConfig::max_overrun_fraction);

  py::class_<ProbeOutcome>(m, "ProbeOutcome")
      .def_readonly("frequency_hz", &ProbeOutcome::frequency_hz)
      .def_readonly("passed", &ProbeOutcome::passed)
      .def_readonly("backpressure", &ProbeOutcome::backpressure)
      .def_readonly("overruns", &ProbeOutcome::overruns)
      .def_readonly("ticks", &ProbeOutcome::ticks);

  py::class_<MaxRateResult>(m, "MaxRateResult")
      .def_readonly("below_lo", &MaxRateResult::below_lo)
      .def_readonly("max_hz", &MaxRateResult::max_hz)
      .def_readonly("validated", &MaxRateResult::validated)
      .def_readonly("probe_rounds", &MaxRateResult::probe_rounds)
      .def_readonly("probes", &MaxRateResult::probes);

  m.def("find_max_rate", &find_max_rate, py::arg("bus"), py::arg("n_actuators"),
        py::arg("config") = MaxRateConfig{}, py::arg("time_source") = nullptr,
        py::arg("model_name") = "AK80-9",
        py::call_guard<py::gil_scoped_release>());

  // Sensing --------------------------------------------------------------
  py::class_<Vec3>(m, "Vec3")
      .def(py::init([](double x, double y, double z) { return Vec3{x, y, z}; }),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z);

  py::class_<Quaternion>(m, "Quaternion")
      .def_readonly("w", &Quaternion::w)
      .def_readonly("x", &Quaternion::x)
      .def_readonly("y", &Quaternion::y)
      .def_readonly("z", &Quaternion::z)
      .def("norm", &Quaternion::norm);

  py::class_<ImuSample>(m, "ImuSample")
      .def_readonly("linear_acceleration", &ImuSample::linear_acceleration)
      .def_readonly("angular_velocity", &ImuSample::angular_velocity)
      .def_readonly("magnetic_field", &ImuSample::magnetic_field)
      .def_readonly("temperature_c", &ImuSample::temperature_c)
      .def_readonly("orientation", &ImuSample::orientation)
      .def_readonly("timestamp", &ImuSample::timestamp);

  py::class_<ImuTrajectorySegment>(m, "ImuTrajectorySegment")
      .def(py::init([](double duration_s, Vec3 angular_velocity,
                       Vec3 world_acceleration) {
             return ImuTrajectorySegment{duration_s, angular_velocity,
                                         world_acceleration};
           }),
           py::arg("duration_s"), py::arg("angular_velocity") = Vec3{},
           py::arg("world_acceleration") = Vec3{})
      .def_readwrite("duration_s", &ImuTrajectorySegment::duration_s)
      .def_readwrite("angular_velocity", &ImuTrajectorySegment::angular_velocity)
      .def_readwrite("world_acceleration", &ImuTrajectorySegment::world_acceleration);

  py::class_<ImuTrajectorySpec>(m, "ImuTrajectorySpec")
      .def(py::init<>())
      .def_readwrite("segments", &ImuTrajectorySpec::segments)
      .def_readwrite("capabilities", &ImuTrajectorySpec::capabilities)
      .def_readwrite("temperature_c", &ImuTrajectorySpec::temperature_c)
      .def_readwrite("sample_rate_hint_hz", &ImuTrajectorySpec::sample_rate_hint_hz);

  py::class_<SimulatedImu>(m, "SimulatedImu")
      .def("query", &SimulatedImu::query)
      .def("close", &SimulatedImu::close)
      .def("sample_at", &SimulatedImu::sample_at, py::arg("t"));
  m.def("open_simulated_imu", &open_simulated, py::arg("spec"),
        py::arg("time_source") = nullptr);

  // Telemetry --------------------------------------------------------------
  py::class_<TelemetryRecord>(m, "TelemetryRecord")
      .def(py::init<double>(), py::arg("timestamp"))
      .def("set", &TelemetryRecord::set, py::arg("path"), py::arg("value"))
      .def_readwrite("timestamp", &TelemetryRecord::timestamp);
  m.def(
      "record_from_dict",
      [](double timestamp, const py::dict& values) {
        TelemetryRecord record(timestamp);
        fill_record(record, "", values);
        return record;
      },
      py::arg("timestamp"), py::arg("values"));
  m.def(
      "serialize_telemetry",
      [](const TelemetryRecord& record, bool flatten) {
        TelemetrySerializeOptions opts;
        opts.flatten = flatten;
        return serialize_telemetry(record, opts);
      },
      py::arg("record"), py::arg("flatten") = false);

  py::enum_<PublishStatus>(m, "PublishStatus")
      .value("Sent", PublishStatus::Sent)
      .value("DroppedSendFailed", PublishStatus::DroppedSendFailed)
      .value("RejectedOversize", PublishStatus::RejectedOversize)
      .value("RejectedNonFinite", PublishStatus::RejectedNonFinite);

  py::class_<PublishOutcome>(m, "PublishOutcome")
      .def_readonly("status", &PublishOutcome::status)
      .def_readonly("payload_bytes", &PublishOutcome::payload_bytes);

  py::class_<TelemetryStats>(m, "TelemetryStats")
      .def_readonly("sent", &TelemetryStats::sent)
      .def_readonly("dropped", &TelemetryStats::dropped)
      .def_readonly("rejected", &TelemetryStats::rejected);

  py::class_<TelemetryPublisher>(m, "TelemetryPublisher")
      .def(py::init<const std::string&>(), py::arg("destination"))
      .def("publish", &TelemetryPublisher::publish, py::arg("record"),
           py::call_guard<py::gil_scoped_release>())
      .def("stats", &TelemetryPublisher::stats);

  // Recorder --------------------------------------------------------------
  py::class_<RecorderOptions>(m, "RecorderOptions")
      .def(py::init<>())
      .def_property(
          "delimiter",
          [](const RecorderOptions& o) { return std::string(1, o.delimiter); },
          [](RecorderOptions& o, const std::string& d) {
            if (d.size() != 1) throw ConfigError("delimiter must be one character");
            o.delimiter = d[0];
          })
      .def_readwrite("buffer_capacity", &RecorderOptions::buffer_capacity)
      .def_readwrite("overwrite", &RecorderOptions::overwrite)
      .def_readwrite("overflow_factor", &RecorderOptions::overflow_factor);

  py::enum_<LogStatus>(m, "LogStatus")
      .value("Accepted", LogStatus::Accepted)
      .value("AcceptedDegraded", LogStatus::AcceptedDegraded)
      .value("DroppedOverflow", LogStatus::DroppedOverflow);

  py::class_<RecorderStats>(m, "RecorderStats")
      .def_readonly("rows_logged", &RecorderStats::rows_logged)
      .def_readonly("rows_written", &RecorderStats::rows_written)
      .def_readonly("rows_dropped", &RecorderStats::rows_dropped)
      .def_readonly("flush_boundaries", &RecorderStats::flush_boundaries)
      .def_readonly("writer_failed", &RecorderStats::writer_failed);

  py::class_<Recorder>(m, "Recorder")
      .def(py::init<const std::string&, std::vector<std::string>, RecorderOptions>(),
           py::arg("path"), py::arg("field_names"),
           py::arg("options") = RecorderOptions{})
      .def(
          "log",
          [](Recorder& rec, const py::sequence& cells) {
            return rec.log(to_log_row(cells));
          },
          py::arg("row"))
      .def("flush", &Recorder::flush, py::call_guard<py::gil_scoped_release>())
      .def("close", &Recorder::close, py::call_guard<py::gil_scoped_release>())
      .def("stats", &Recorder::stats)
      .def_property_readonly("field_names", &Recorder::field_names);
  m.def("inspect_recording", &inspect_recording, py::arg("path"),
        py::arg("delimiter") = ',');
}
