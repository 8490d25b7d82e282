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

#include "qdd/sensing.hpp"

#include <cmath>
#include <sstream>

namespace qdd {

namespace {
constexpr double kGravity = 9.81;
}

double Quaternion::norm() const {
  return std::sqrt(w * w + x * x + y * y + z * z);
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (n <= 0) return {1, 0, 0, 0};
  return {w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::operator*(const Quaternion& o) const {
  return {w * o.w - x * o.x - y * o.y - z * o.z,
          w * o.x + x * o.w + y * o.z - z * o.y,
          w * o.y - x * o.z + y * o.w + z * o.x,
          w * o.z + x * o.y - y * o.x + z * o.w};
}

Vec3 Quaternion::rotate(const Vec3& v) const {
  const Quaternion p{0, v.x, v.y, v.z};
  const Quaternion r = *this * p * conjugate();
  return {r.x, r.y, r.z};
}

Vec3 Quaternion::rotate_inverse(const Vec3& v) const {
  return conjugate().rotate(v);
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
  const double n = std::sqrt(axis.x * axis.x + axis.y * axis.y + axis.z * axis.z);
  if (n <= 0) return {1, 0, 0, 0};
  const double half = 0.5 * angle_rad;
  const double s = std::sin(half) / n;
  return {std::cos(half), axis.x * s, axis.y * s, axis.z * s};
}

SimulatedImu::SimulatedImu(ImuTrajectorySpec spec, std::shared_ptr<TimeSource> ts)
    : spec_(std::move(spec)), ts_(ts ? std::move(ts) : default_time_source()) {
  if (spec_.segments.empty())
    throw ValidationError("trajectory needs at least one segment");
  for (size_t i = 0; i < spec_.segments.size(); ++i)
    if (spec_.segments[i].duration_s < 0)
      throw ValidationError("segment " + std::to_string(i) +
                            ": duration must be >= 0");
  descriptor_.kind = ImuSourceDescriptor::Kind::Simulated;
  descriptor_.capabilities = spec_.capabilities;
  descriptor_.sample_rate_hint_hz = spec_.sample_rate_hint_hz;
  // Precompute each segment's starting orientation; within a segment the
  // rotation is the exact exponential of the constant body rate.
  Quaternion q{1, 0, 0, 0};
  segment_start_q_.push_back(q);
  for (const auto& seg : spec_.segments) {
    const Vec3 w = seg.angular_velocity;
    const double rate = std::sqrt(w.x * w.x + w.y * w.y + w.z * w.z);
    q = (q * Quaternion::from_axis_angle(w, rate * seg.duration_s)).normalized();
    segment_start_q_.push_back(q);
  }
}

Quaternion SimulatedImu::orientation_at(double t) const {
  double remaining = std::max(0.0, t);
  for (size_t i = 0; i < spec_.segments.size(); ++i) {
    const auto& seg = spec_.segments[i];
    const bool last = i + 1 == spec_.segments.size();
    const double span = last ? remaining : std::min(remaining, seg.duration_s);
    if (last || remaining <= seg.duration_s) {
      const Vec3 w = seg.angular_velocity;
      const double rate = std::sqrt(w.x * w.x + w.y * w.y + w.z * w.z);
      return (segment_start_q_[i] * Quaternion::from_axis_angle(w, rate * span))
          .normalized();
    }
    remaining -= seg.duration_s;
  }
  return segment_start_q_.back();
}

ImuSample SimulatedImu::sample_at(double t) const {
  double remaining = std::max(0.0, t);
  size_t idx = spec_.segments.size() - 1;
  for (size_t i = 0; i < spec_.segments.size(); ++i) {
    if (i + 1 == spec_.segments.size() || remaining <= spec_.segments[i].duration_s) {
      idx = i;
      break;
    }
    remaining -= spec_.segments[i].duration_s;
  }
  const auto& seg = spec_.segments[idx];
  const Quaternion q = orientation_at(t);

  ImuSample s;
  s.timestamp = t;
  s.temperature_c = spec_.temperature_c;
  s.angular_velocity = seg.angular_velocity;
  // Specific force in the body frame: proper acceleration plus gravity
  // support, rotated out of the world frame.
  const Vec3 specific_world{seg.world_acceleration.x, seg.world_acceleration.y,
                            seg.world_acceleration.z + kGravity};
  s.linear_acceleration = q.rotate_inverse(specific_world);
  if (descriptor_.has(ImuCapability::Orientation)) s.orientation = q;
  if (descriptor_.has(ImuCapability::Magnetometer))
    s.magnetic_field = q.rotate_inverse(spec_.world_magnetic_field);
  return s;
}

ImuSample SimulatedImu::query() {
  if (closed_) throw UsageError("IMU source is closed");
  double t = ts_->now();
  // Timestamps must strictly increase even when polled twice at one virtual
  // instant.
  if (t <= last_timestamp_) t = std::nextafter(last_timestamp_, 1e300);
  last_timestamp_ = t;
  return filtered(sample_at(t));
}

std::unique_ptr<SimulatedImu> open_simulated(const ImuTrajectorySpec& spec,
                                             std::shared_ptr<TimeSource> ts) {
  return std::make_unique<SimulatedImu>(spec, std::move(ts));
}

ImuTrajectorySpec parse_imu_trajectory(std::string_view text) {
  ImuTrajectorySpec spec;
  spec.capabilities = 0;
  bool capabilities_seen = false;
  std::stringstream ss{std::string(text)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::stringstream row(line);
    std::string head;
    row >> head;
    if (head == "capabilities") {
      capabilities_seen = true;
      std::string cap;
      while (row >> cap) {
        if (cap == "orientation")
          spec.capabilities |= static_cast<unsigned>(ImuCapability::Orientation);
        else if (cap == "magnetometer")
          spec.capabilities |= static_cast<unsigned>(ImuCapability::Magnetometer);
        else if (cap == "none")
          ;
        else
          throw ValidationError("trajectory line " + std::to_string(line_no) +
                                ": unknown capability '" + cap + "'");
      }
      continue;
    }
    ImuTrajectorySegment seg;
    std::stringstream row2(line);
    if (!(row2 >> seg.duration_s >> seg.angular_velocity.x >>
          seg.angular_velocity.y >> seg.angular_velocity.z >>
          seg.world_acceleration.x >> seg.world_acceleration.y >>
          seg.world_acceleration.z))
      throw ValidationError("trajectory line " + std::to_string(line_no) +
                            ": expected 'duration wx wy wz ax ay az'");
    if (seg.duration_s < 0)
      throw ValidationError("trajectory line " + std::to_string(line_no) +
                            ": negative duration");
    spec.segments.push_back(seg);
  }
  if (!capabilities_seen)
    spec.capabilities = static_cast<unsigned>(ImuCapability::Orientation) |
                        static_cast<unsigned>(ImuCapability::Magnetometer);
  if (spec.segments.empty())
    throw ValidationError("trajectory has no segments");
  return spec;
}

ExternalImuSource::ExternalImuSource(ImuSourceDescriptor descriptor)
    : descriptor_(descriptor) {
  descriptor_.kind = ImuSourceDescriptor::Kind::ExternalDriver;
}

void ExternalImuSource::feed(ImuSample sample) {
  std::lock_guard lock(m_);
  if (latest_ && sample.timestamp <= latest_->timestamp)
    sample.timestamp = std::nextafter(latest_->timestamp, 1e300);
  if (!descriptor_.has(ImuCapability::Orientation)) sample.orientation.reset();
  if (!descriptor_.has(ImuCapability::Magnetometer)) sample.magnetic_field.reset();
  latest_ = std::move(sample);
}

ImuSample ExternalImuSource::query() {
  std::lock_guard lock(m_);
  if (closed_) throw UsageError("IMU source is closed");
  if (!latest_) throw UsageError("no sample fed yet");
  return filtered(*latest_);
}

void ExternalImuSource::close() {
  std::lock_guard lock(m_);
  closed_ = true;
}

}  // namespace qdd
