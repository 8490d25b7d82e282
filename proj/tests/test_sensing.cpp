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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qdd/sensing.hpp"

using namespace qdd;

namespace {

ImuTrajectorySpec rest_spec() {
  ImuTrajectorySpec spec;
  spec.segments.push_back({1.0, {0, 0, 0}, {0, 0, 0}});
  return spec;
}

double quat_angle_between(const Quaternion& a, const Quaternion& b) {
  const Quaternion d = a.conjugate() * b;
  return 2.0 * std::atan2(std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z),
                          std::abs(d.w));
}

}  // namespace

TEST_CASE("at rest the accelerometer reads gravity support on +z") {
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(rest_spec(), vts);
  vts->advance(0.1);
  const ImuSample s = imu->query();
  CHECK(s.linear_acceleration.x == doctest::Approx(0.0));
  CHECK(s.linear_acceleration.y == doctest::Approx(0.0));
  CHECK(s.linear_acceleration.z == doctest::Approx(9.81));
  CHECK(s.angular_velocity == Vec3{0, 0, 0});
  REQUIRE(s.orientation.has_value());
  CHECK(s.orientation->w == doctest::Approx(1.0));
  CHECK(s.temperature_c == doctest::Approx(25.0));
}

TEST_CASE("a constant spin about z reports that rate and the analytic quaternion") {
  const double rate = 0.785398;  // pi/4 rad/s
  ImuTrajectorySpec spec;
  spec.segments.push_back({10.0, {0, 0, rate}, {0, 0, 0}});
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(spec, vts);
  vts->advance(2.0);
  const ImuSample s = imu->query();
  CHECK(s.angular_velocity.z == doctest::Approx(rate));
  REQUIRE(s.orientation.has_value());
  const Quaternion expected =
      Quaternion::from_axis_angle({0, 0, 1}, rate * s.timestamp);
  CHECK(quat_angle_between(*s.orientation, expected) < 1e-9);
  CHECK(s.orientation->norm() == doctest::Approx(1.0).epsilon(1e-9));
  // Gravity stays on body z for a z-axis spin.
  CHECK(s.linear_acceleration.z == doctest::Approx(9.81));
}

TEST_CASE("absent capabilities are reported absent, never zero-filled") {
  ImuTrajectorySpec spec = rest_spec();
  spec.capabilities = 0;
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(spec, vts);
  vts->advance(0.01);
  const ImuSample s = imu->query();
  CHECK(!s.orientation.has_value());
  CHECK(!s.magnetic_field.has_value());
  CHECK(!imu->descriptor().has(ImuCapability::Orientation));
}

TEST_CASE("two sources from one spec produce identical streams") {
  ImuTrajectorySpec spec;
  spec.segments.push_back({0.5, {0.1, -0.2, 0.3}, {1.0, 0, 0}});
  spec.segments.push_back({0.5, {0, 0.4, 0}, {0, -2.0, 0}});
  auto vts_a = std::make_shared<VirtualTimeSource>();
  auto vts_b = std::make_shared<VirtualTimeSource>();
  auto a = open_simulated(spec, vts_a);
  auto b = open_simulated(spec, vts_b);
  for (int i = 0; i < 200; ++i) {
    vts_a->advance(0.004);
    vts_b->advance(0.004);
    const ImuSample sa = a->query();
    const ImuSample sb = b->query();
    REQUIRE(sa.timestamp == sb.timestamp);
    REQUIRE(sa.linear_acceleration == sb.linear_acceleration);
    REQUIRE(sa.angular_velocity == sb.angular_velocity);
    REQUIRE(sa.orientation->w == sb.orientation->w);
    REQUIRE(sa.orientation->z == sb.orientation->z);
  }
}

TEST_CASE("zero-motion samples differ only in timestamp") {
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(rest_spec(), vts);
  vts->advance(0.01);
  const ImuSample first = imu->query();
  vts->advance(0.01);
  const ImuSample second = imu->query();
  CHECK(second.timestamp > first.timestamp);
  CHECK(first.linear_acceleration == second.linear_acceleration);
  CHECK(first.angular_velocity == second.angular_velocity);
  CHECK(first.magnetic_field == second.magnetic_field);
}

TEST_CASE("integrating the reported rates reproduces the reported orientation") {
  ImuTrajectorySpec spec;
  spec.segments.push_back({0.4, {0.5, 0, 0}, {0, 0, 0}});
  spec.segments.push_back({0.4, {0, -0.8, 0.2}, {0, 0, 0}});
  spec.segments.push_back({0.4, {1.0, 1.0, -1.0}, {0, 0, 0}});
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(spec, vts);
  Quaternion integrated{1, 0, 0, 0};
  double last_t = 0.0;
  ImuSample s;
  const double dt = 0.0005;
  for (int i = 0; i < 2400; ++i) {
    vts->advance(dt);
    s = imu->query();
    const double h = s.timestamp - last_t;
    last_t = s.timestamp;
    const Vec3 w = s.angular_velocity;
    const double mag = std::sqrt(w.x * w.x + w.y * w.y + w.z * w.z);
    integrated = (integrated * Quaternion::from_axis_angle(w, mag * h)).normalized();
  }
  REQUIRE(s.orientation.has_value());
  CHECK(quat_angle_between(integrated, *s.orientation) < 1e-3);
}

TEST_CASE("timestamps strictly increase even at one virtual instant") {
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(rest_spec(), vts);
  const ImuSample a = imu->query();
  const ImuSample b = imu->query();  // clock did not move
  CHECK(b.timestamp > a.timestamp);
}

TEST_CASE("magnetometer tracks the world field through rotation") {
  ImuTrajectorySpec spec;
  spec.segments.push_back({10.0, {0, 0, M_PI / 2.0}, {0, 0, 0}});
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(spec, vts);
  vts->advance(1.0);  // a quarter turn about z
  const ImuSample s = imu->query();
  REQUIRE(s.magnetic_field.has_value());
  // World +x seen from a body rotated +90 degrees about z is body -y.
  CHECK(s.magnetic_field->x == doctest::Approx(0.0).epsilon(0.01));
  CHECK(s.magnetic_field->y < -0.9);
}

TEST_CASE("closed sources fail queries distinctly from missing capabilities") {
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(rest_spec(), vts);
  imu->close();
  CHECK_THROWS_AS(imu->query(), UsageError);
}

TEST_CASE("trajectory spec validation") {
  ImuTrajectorySpec empty;
  CHECK_THROWS_AS(open_simulated(empty, nullptr), ValidationError);
  ImuTrajectorySpec negative;
  negative.segments.push_back({-1.0, {0, 0, 0}, {0, 0, 0}});
  CHECK_THROWS_AS(open_simulated(negative, nullptr), ValidationError);
}

TEST_CASE("trajectory file parsing") {
  const char* text =
      "# spin then settle\n"
      "capabilities orientation\n"
      "2.0 0 0 0.785398 0 0 0\n"
      "1.0 0 0 0 0 0 0\n";
  const ImuTrajectorySpec spec = parse_imu_trajectory(text);
  REQUIRE(spec.segments.size() == 2);
  CHECK(spec.segments[0].angular_velocity.z == doctest::Approx(0.785398));
  CHECK(spec.capabilities == static_cast<unsigned>(ImuCapability::Orientation));
  CHECK_THROWS_AS(parse_imu_trajectory("1.0 0 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_imu_trajectory("capabilities telepathy\n1 0 0 0 0 0 0\n"),
                  ValidationError);
  CHECK_THROWS_AS(parse_imu_trajectory("# nothing\n"), ValidationError);
  CHECK_THROWS_AS(parse_imu_trajectory("-1 0 0 0 0 0 0\n"), ValidationError);
}

TEST_CASE("externally fed source hands off the latest sample") {
  ImuSourceDescriptor desc;
  desc.capabilities = static_cast<unsigned>(ImuCapability::Magnetometer);
  ExternalImuSource source(desc);
  CHECK_THROWS_AS(source.query(), UsageError);

  ImuSample s;
  s.linear_acceleration = {0, 0, 9.81};
  s.orientation = Quaternion{1, 0, 0, 0};  // not in the capability set
  s.magnetic_field = Vec3{0.3, 0, 0};
  s.timestamp = 1.0;
  source.feed(s);
  const ImuSample got = source.query();
  CHECK(!got.orientation.has_value());  // stripped, not zero-filled
  CHECK(got.magnetic_field.has_value());

  ImuSample stale = s;
  stale.timestamp = 0.5;  // older than the last; still must move forward
  source.feed(stale);
  CHECK(source.query().timestamp > 1.0);

  source.close();
  CHECK_THROWS_AS(source.query(), UsageError);
}

TEST_CASE("filter hook is applied on query") {
  auto vts = std::make_shared<VirtualTimeSource>();
  auto imu = open_simulated(rest_spec(), vts);
  imu->set_filter([](ImuSample s) {
    s.temperature_c = -100.0;
    return s;
  });
  vts->advance(0.01);
  CHECK(imu->query().temperature_c == doctest::Approx(-100.0));
}
