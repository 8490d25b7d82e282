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

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdd/errors.hpp"
#include "qdd/time.hpp"

namespace qdd {

constexpr uint32_t kStandardIdMask = 0x7FFu;
constexpr uint32_t kExtendedIdMask = 0x1FFFFFFFu;

struct CanFrame {
  uint32_t arbitration_id = 0;
  bool is_extended = false;
  uint8_t dlc = 0;  // payload length, 0..8
  std::array<uint8_t, 8> data{};
  double timestamp = 0.0;  // stamped by the bus, session seconds

  std::span<const uint8_t> payload() const { return {data.data(), dlc}; }
};

CanFrame make_frame(uint32_t arbitration_id, std::span<const uint8_t> payload,
                    bool is_extended = false);

enum class BusBackend { Virtual, SocketCan };

/// Shaping of an in-memory bus domain. Only the options of the first opener
/// of a named domain take effect.
struct VirtualBusOptions {
  double capacity_fps = 0.0;   // sustained frames/second; 0 = unmetered
  double burst_frames = 64.0;  // token-bucket depth
  size_t queue_depth = 8192;   // per-receiver pending frames
  bool record_traffic = false; // keep a frame log for inspection
  bool exclusive = false;      // refuse a second handle on this domain
};

struct BusConfig {
  BusBackend backend = BusBackend::Virtual;
  std::string interface_name = "vbus0";  // "can0" / virtual channel name
  double receive_timeout_s = 1.0;
  // Informational only; CAN bitrate is configured when the OS interface is
  // brought up, not through the socket.
  std::optional<uint32_t> bitrate;
  VirtualBusOptions virtual_opts;
};

enum class SendResult { Ok, Backpressure };

/// One bus handle: a socket on an OS CAN interface or an endpoint on an
/// in-memory virtual domain. A handle may be used by one sender and one
/// receiver concurrently; sharing one direction needs external serialization.
class CanBus {
 public:
  virtual ~CanBus() = default;

  /// Enqueues/writes a frame. Backpressure means the bus refused the frame
  /// (full buffer or rate cap). Throws UsageError on a closed handle.
  virtual SendResult send(const CanFrame& frame) = 0;

  /// Oldest pending frame, or nullopt after `timeout_s` (wall time) with
  /// nothing received. timeout 0 polls. Throws UsageError on a closed handle.
  virtual std::optional<CanFrame> recv(double timeout_s) = 0;

  virtual void close() = 0;
  virtual bool is_open() const = 0;

  /// Switches the handle to responder mode: `fn` runs synchronously for every
  /// frame that would have been queued, and recv becomes unavailable. Returns
  /// false for backends without synchronous delivery (use a receive thread).
  virtual bool set_responder(std::function<void(const CanFrame&)> fn) {
    (void)fn;
    return false;
  }
};

/// Opens a bus handle. Virtual channels with the same name share one
/// broadcast domain within the process; a frame sent on one handle is
/// received by every other handle on the domain (never by the sender).
/// Throws BusError when an OS interface is missing.
std::unique_ptr<CanBus> open_bus(const BusConfig& config,
                                 std::shared_ptr<TimeSource> ts = nullptr);

/// Inspection surface for virtual domains (test instrumentation).
class VirtualDomain {
 public:
  virtual ~VirtualDomain() = default;
  virtual std::vector<CanFrame> traffic_log() const = 0;
  virtual void clear_traffic_log() = 0;
  virtual size_t handle_count() const = 0;
  virtual uint64_t frames_sent() const = 0;
  virtual uint64_t backpressure_count() const = 0;
  /// Cooperative id reservation, used by responder endpoints so two virtual
  /// actuators cannot claim one command id on the same channel.
  virtual bool claim(uint64_t key) = 0;
  virtual void release(uint64_t key) = 0;
};

/// The named domain, or nullptr if no handle ever opened it.
std::shared_ptr<VirtualDomain> find_virtual_domain(const std::string& name);

}  // namespace qdd
