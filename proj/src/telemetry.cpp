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

#include "qdd/telemetry.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "qdd/detail/format.hpp"

namespace qdd {

void TelemetryRecord::set(std::string_view dotted_path, double value) {
  if (dotted_path.empty()) throw ValidationError("empty telemetry key");
  Map* node = &values;
  std::string_view rest = dotted_path;
  bool top = true;
  while (true) {
    const size_t dot = rest.find('.');
    const std::string_view part = rest.substr(0, dot);
    if (part.empty()) throw ValidationError("empty telemetry path segment");
    if (top && part == kTelemetryTimestampKey)
      throw ValidationError("'timestamp' is reserved at the top level");
    top = false;
    if (dot == std::string_view::npos) {
      auto it = node->find(std::string(part));
      if (it != node->end() && !it->second.is_number())
        throw ValidationError("telemetry key '" + std::string(dotted_path) +
                              "' collides with a nested map");
      (*node)[std::string(part)] = Value(value);
      return;
    }
    auto [it, inserted] = node->try_emplace(std::string(part), Map{});
    if (!inserted && it->second.is_number())
      throw ValidationError("telemetry key '" + std::string(dotted_path) +
                            "' descends through a leaf");
    node = &std::get<Map>(it->second.v);
    rest = rest.substr(dot + 1);
  }
}

namespace {

void append_json_string(std::string& out, std::string_view s) {
  out += '"';
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_number(std::string& out, double v, const std::string& key) {
  if (!std::isfinite(v))
    throw ValidationError("non-finite telemetry value at '" + key + "'");
  out += detail::format_double(v);
}

void append_map(std::string& out, const TelemetryRecord::Map& map,
                const std::string& prefix) {
  out += '{';
  bool first = true;
  for (const auto& [key, value] : map) {
    if (!first) out += ',';
    first = false;
    append_json_string(out, key);
    out += ':';
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_number())
      append_number(out, std::get<double>(value.v), path);
    else
      append_map(out, std::get<TelemetryRecord::Map>(value.v), path);
  }
  out += '}';
}

void flatten_map(const TelemetryRecord::Map& map, const std::string& prefix,
                 std::vector<std::pair<std::string, double>>& out) {
  for (const auto& [key, value] : map) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_number()) {
      const double v = std::get<double>(value.v);
      if (!std::isfinite(v))
        throw ValidationError("non-finite telemetry value at '" + path + "'");
      out.emplace_back(path, v);
    } else {
      flatten_map(std::get<TelemetryRecord::Map>(value.v), path, out);
    }
  }
}

}  // namespace

std::string serialize_telemetry(const TelemetryRecord& record,
                                const TelemetrySerializeOptions& opts) {
  if (!std::isfinite(record.timestamp))
    throw ValidationError("non-finite telemetry timestamp");
  std::string out;
  out.reserve(256);
  out += '{';
  if (opts.flatten) {
    std::vector<std::pair<std::string, double>> flat;
    flatten_map(record.values, "", flat);
    flat.emplace_back(std::string(kTelemetryTimestampKey), record.timestamp);
    std::sort(flat.begin(), flat.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    bool first = true;
    for (const auto& [key, v] : flat) {
      if (!first) out += ',';
      first = false;
      append_json_string(out, key);
      out += ':';
      out += detail::format_double(v);
    }
  } else {
    // std::map iterates lexicographically; "timestamp" is merged in order.
    bool first = true;
    bool timestamp_done = false;
    const std::string ts_key(kTelemetryTimestampKey);
    for (const auto& [key, value] : record.values) {
      if (!timestamp_done && ts_key < key) {
        if (!first) out += ',';
        first = false;
        append_json_string(out, ts_key);
        out += ':';
        append_number(out, record.timestamp, ts_key);
        timestamp_done = true;
      }
      if (!first) out += ',';
      first = false;
      append_json_string(out, key);
      out += ':';
      if (value.is_number())
        append_number(out, std::get<double>(value.v), key);
      else
        append_map(out, std::get<TelemetryRecord::Map>(value.v), key);
    }
    if (!timestamp_done) {
      if (!first) out += ',';
      append_json_string(out, ts_key);
      out += ':';
      append_number(out, record.timestamp, ts_key);
    }
  }
  out += '}';
  return out;
}

TelemetryPublisher::TelemetryPublisher(const std::string& destination,
                                       TelemetryOptions options)
    : options_(options) {
  const size_t colon = destination.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= destination.size())
    throw ConfigError("telemetry destination must be host:port, got '" +
                      destination + "'");
  const std::string host = destination.substr(0, colon);
  const std::string port = destination.substr(colon + 1);
  for (const char c : port)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw ConfigError("bad telemetry port '" + port + "'");

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* result = nullptr;
  if (getaddrinfo(host.c_str(), port.c_str(), &hints, &result) != 0 || !result)
    throw ConfigError("cannot resolve telemetry destination '" + destination + "'");

  fd_ = ::socket(result->ai_family, SOCK_DGRAM | SOCK_NONBLOCK, 0);
  if (fd_ < 0) {
    freeaddrinfo(result);
    throw ConfigError("cannot create telemetry socket");
  }
  // Datagram semantics: connect() just pins the destination, no handshake.
  if (::connect(fd_, result->ai_addr, result->ai_addrlen) != 0) {
    freeaddrinfo(result);
    ::close(fd_);
    fd_ = -1;
    throw ConfigError("cannot set telemetry destination '" + destination + "'");
  }
  freeaddrinfo(result);
}

TelemetryPublisher::~TelemetryPublisher() {
  if (fd_ >= 0) ::close(fd_);
}

PublishOutcome TelemetryPublisher::publish(const TelemetryRecord& record) {
  PublishOutcome outcome;
  std::string payload;
  try {
    payload = serialize_telemetry(record, options_.serialize);
  } catch (const ValidationError&) {
    ++rejected_;
    outcome.status = PublishStatus::RejectedNonFinite;
    return outcome;
  }
  outcome.payload_bytes = payload.size();
  if (payload.size() > options_.max_payload_bytes) {
    ++rejected_;
    outcome.status = PublishStatus::RejectedOversize;
    return outcome;
  }
  const ssize_t n = ::send(fd_, payload.data(), payload.size(), MSG_DONTWAIT);
  if (n == static_cast<ssize_t>(payload.size())) {
    ++sent_;
    outcome.status = PublishStatus::Sent;
  } else {
    ++dropped_;
    outcome.status = PublishStatus::DroppedSendFailed;
  }
  return outcome;
}

TelemetryStats TelemetryPublisher::stats() const {
  return {sent_.load(), dropped_.load(), rejected_.load()};
}

}  // namespace qdd
