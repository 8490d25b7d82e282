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
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "qdd/errors.hpp"

namespace qdd {

/// One loop's worth of controller data: a timestamp plus a nested map of
/// names to finite numbers.
class TelemetryRecord {
 public:
  struct Value;
  using Map = std::map<std::string, Value>;
  struct Value {
    std::variant<double, Map> v;
    Value() : v(0.0) {}
    Value(double d) : v(d) {}          // NOLINT(google-explicit-constructor)
    Value(Map m) : v(std::move(m)) {}  // NOLINT(google-explicit-constructor)
    bool is_number() const { return std::holds_alternative<double>(v); }
    bool operator==(const Value&) const = default;
  };

  TelemetryRecord() = default;
  explicit TelemetryRecord(double timestamp) : timestamp(timestamp) {}

  /// Inserts a leaf at a dotted path ("actuators.1.torque" nests two maps
  /// deep). Throws ValidationError when the path collides with an existing
  /// leaf/map or names the reserved timestamp key at top level.
  void set(std::string_view dotted_path, double value);

  double timestamp = 0.0;
  Map values;

  bool operator==(const TelemetryRecord&) const = default;
};

/// Key under which the timestamp is emitted (and reserved in `values`).
inline constexpr std::string_view kTelemetryTimestampKey = "timestamp";

struct TelemetrySerializeOptions {
  /// Emit nested maps as dotted flat keys instead of JSON objects.
  bool flatten = false;
};

/// Renders one record as a single JSON object: keys in lexicographic order,
/// numbers in shortest round-trip decimal form, no trailing newline.
/// Deterministic: equal records serialize byte-identically. Throws
/// ValidationError on a non-finite leaf.
std::string serialize_telemetry(const TelemetryRecord& record,
                                const TelemetrySerializeOptions& opts = {});

enum class PublishStatus {
  Sent,
  DroppedSendFailed,   // transient socket failure; counted, never thrown
  RejectedOversize,    // payload larger than max_payload_bytes
  RejectedNonFinite,   // record contains a NaN/inf leaf
};

struct PublishOutcome {
  PublishStatus status = PublishStatus::Sent;
  size_t payload_bytes = 0;
};

struct TelemetryStats {
  uint64_t sent = 0;
  uint64_t dropped = 0;
  uint64_t rejected = 0;
};

struct TelemetryOptions {
  TelemetrySerializeOptions serialize;
  /// Hard datagram cap; keep payloads <= 1400 bytes when crossing networks.
  size_t max_payload_bytes = 60 * 1024;
};

/// Fire-and-forget UDP JSON publisher: one datagram per publish, non-blocking,
/// no handshake, so a control loop can stream to a plotting tool (PlotJuggler
/// ingests this shape directly) without ever stalling on the listener.
class TelemetryPublisher {
 public:
  /// destination is "host:port". Throws ConfigError when unparseable or
  /// unresolvable.
  explicit TelemetryPublisher(const std::string& destination,
                              TelemetryOptions options = {});
  ~TelemetryPublisher();

  TelemetryPublisher(const TelemetryPublisher&) = delete;
  TelemetryPublisher& operator=(const TelemetryPublisher&) = delete;

  /// Serializes and sends. Never throws for send failures; the outcome (and
  /// stats) say what happened.
  PublishOutcome publish(const TelemetryRecord& record);

  TelemetryStats stats() const;

 private:
  TelemetryOptions options_;
  int fd_ = -1;
  std::atomic<uint64_t> sent_{0};
  std::atomic<uint64_t> dropped_{0};
  std::atomic<uint64_t> rejected_{0};
};

}  // namespace qdd
