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

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qdd/errors.hpp"
#include "qdd/time.hpp"

namespace qdd {

struct Vec3 {
  double x = 0, y = 0, z = 0;
  bool operator==(const Vec3&) const = default;
};

struct Quaternion {
  double w = 1, x = 0, y = 0, z = 0;

  double norm() const;
  Quaternion normalized() const;
  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  Quaternion operator*(const Quaternion& o) const;
  Vec3 rotate(const Vec3& v) const;          // body -> world
  Vec3 rotate_inverse(const Vec3& v) const;  // world -> body
  static Quaternion from_axis_angle(const Vec3& axis, double angle_rad);
};

/// One IMU reading. Axes are right-handed, z up; the accelerometer reports
/// specific force, so a gravity-aligned sensor at rest reads +9.81 on z.
/// Optional fields are absent (not zero) when the source lacks the
/// capability.
struct ImuSample {
  Vec3 linear_acceleration;              // m/s^2
  Vec3 angular_velocity;                 // rad/s, body frame
  std::optional<Vec3> magnetic_field;    // arbitrary units
  double temperature_c = 0.0;
  std::optional<Quaternion> orientation; // body -> world
  double timestamp = 0.0;
};

enum class ImuCapability : unsigned {
  Orientation = 1u << 0,
  Magnetometer = 1u << 1,
};

struct ImuSourceDescriptor {
  enum class Kind { Simulated, ExternalDriver } kind = Kind::Simulated;
  unsigned capabilities = 0;  // ImuCapability bits
  double sample_rate_hint_hz = 0.0;

  bool has(ImuCapability c) const {
    return (capabilities & static_cast<unsigned>(c)) != 0;
  }
};

/// Uniform sampling surface. Vendor drivers live outside the core and push
/// through ExternalImuSource; the simulated source generates samples from an
/// analytic trajectory.
class ImuSource {
 public:
  virtual ~ImuSource() = default;

  /// Most recent sample. Fields outside the descriptor's capabilities are
  /// absent. Throws UsageError once the source is closed (distinct from a
  /// missing capability).
  virtual ImuSample query() = 0;

  virtual const ImuSourceDescriptor& descriptor() const = 0;
  virtual void close() = 0;

  /// Pass-through hook for downstream filtering; the core applies no
  /// filtering of its own.
  void set_filter(std::function<ImuSample(ImuSample)> filter) {
    filter_ = std::move(filter);
  }

 protected:
  ImuSample filtered(ImuSample s) const { return filter_ ? filter_(std::move(s)) : s; }

 private:
  std::function<ImuSample(ImuSample)> filter_;
};

/// Piecewise-constant motion profile: each segment holds a body-frame angular
/// velocity and a world-frame linear acceleration for its duration; the final
/// segment extends forever. Orientation integrates exactly (quaternion
/// exponential per segment).
struct ImuTrajectorySegment {
  double duration_s = 0.0;
  Vec3 angular_velocity;      // rad/s, body frame
  Vec3 world_acceleration;    // m/s^2, world frame, excluding gravity
};

struct ImuTrajectorySpec {
  std::vector<ImuTrajectorySegment> segments;
  unsigned capabilities = static_cast<unsigned>(ImuCapability::Orientation) |
                          static_cast<unsigned>(ImuCapability::Magnetometer);
  double temperature_c = 25.0;
  double sample_rate_hint_hz = 200.0;
  /// World magnetic field direction reported by the magnetometer (arbitrary
  /// units; vendor conventions differ, so the value is carried opaquely).
  Vec3 world_magnetic_field{1.0, 0.0, 0.0};
};

class SimulatedImu final : public ImuSource {
 public:
  SimulatedImu(ImuTrajectorySpec spec, std::shared_ptr<TimeSource> ts);

  ImuSample query() override;
  const ImuSourceDescriptor& descriptor() const override { return descriptor_; }
  void close() override { closed_ = true; }

  /// Analytic state at time t (also the test oracle surface).
  Quaternion orientation_at(double t) const;
  ImuSample sample_at(double t) const;

 private:
  ImuTrajectorySpec spec_;
  std::shared_ptr<TimeSource> ts_;
  ImuSourceDescriptor descriptor_;
  std::vector<Quaternion> segment_start_q_;
  double last_timestamp_ = -1.0;
  bool closed_ = false;
};

/// Deterministic simulated source; same spec and time source give an
/// identical sample stream. Throws ValidationError on a malformed spec.
std::unique_ptr<SimulatedImu> open_simulated(const ImuTrajectorySpec& spec,
                                             std::shared_ptr<TimeSource> ts = nullptr);

/// Trajectory spec file: '#' comments, optional "capabilities ..." line, then
/// one segment per line: duration wx wy wz ax ay az.
ImuTrajectorySpec parse_imu_trajectory(std::string_view text);

/// Latest-sample handoff for externally fed drivers. feed() may run on a
/// driver context while query() runs on the control loop; the handoff is
/// atomic per sample.
class ExternalImuSource final : public ImuSource {
 public:
  explicit ExternalImuSource(ImuSourceDescriptor descriptor);

  void feed(ImuSample sample);
  ImuSample query() override;
  const ImuSourceDescriptor& descriptor() const override { return descriptor_; }
  void close() override;

 private:
  ImuSourceDescriptor descriptor_;
  mutable std::mutex m_;
  std::optional<ImuSample> latest_;
  bool closed_ = false;
};

}  // namespace qdd
