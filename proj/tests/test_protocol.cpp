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

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "qdd/bus.hpp"
#include "qdd/protocol.hpp"

using namespace qdd;

namespace {

std::vector<QuantizationSpec> all_specs() {
  std::vector<QuantizationSpec> specs;
  for (const auto& m : model_table()) {
    specs.push_back(m.position);
    specs.push_back(m.velocity);
    specs.push_back(m.torque);
    specs.push_back(m.kp);
    specs.push_back(m.kd);
  }
  return specs;
}

}  // namespace

TEST_CASE("quantization bounds map to the edge codes") {
  for (const auto& spec : all_specs()) {
    CHECK(float_to_uint(spec.min, spec) == 0);
    CHECK(float_to_uint(spec.max, spec) == spec.code_max());
    CHECK(uint_to_float(0, spec) == doctest::Approx(spec.min));
    CHECK(uint_to_float(spec.code_max(), spec) == doctest::Approx(spec.max));
  }
}

TEST_CASE("midpoint of a 16-bit field rounds up to 32768") {
  const QuantizationSpec spec{-12.5, 12.5, 16};
  const double mid = 0.5 * (spec.min + spec.max);
  CHECK(float_to_uint(mid, spec) == 32768);
  CHECK(oracle::quantize_brute_force(mid, spec) == 32768);
}

TEST_CASE("quantizer matches the brute-force nearest-code oracle") {
  std::mt19937_64 rng(7);
  const QuantizationSpec specs[] = {
      {-12.5, 12.5, 12}, {-18.0, 18.0, 12}, {0.0, 500.0, 8}, {-1.0, 3.0, 10}};
  for (const auto& spec : specs) {
    std::uniform_real_distribution<double> dist(spec.min - 1.0, spec.max + 1.0);
    for (int i = 0; i < 2000; ++i) {
      const double x = dist(rng);
      CHECK(float_to_uint(x, spec) == oracle::quantize_brute_force(x, spec));
    }
  }
}

TEST_CASE("code round-trip is exact over every code") {
  for (const auto& spec : all_specs()) {
    for (uint32_t c = 0; c <= spec.code_max(); ++c)
      REQUIRE(float_to_uint(uint_to_float(c, spec), spec) == c);
  }
}

TEST_CASE("value round-trip lands within half an LSB of the clamped input") {
  std::mt19937_64 rng(11);
  for (const auto& spec : all_specs()) {
    const double lsb = (spec.max - spec.min) / spec.code_max();
    std::uniform_real_distribution<double> dist(spec.min - 2.0, spec.max + 2.0);
    for (int i = 0; i < 2000; ++i) {
      const double x = dist(rng);
      const double clamped = std::clamp(x, spec.min, spec.max);
      const double back = uint_to_float(float_to_uint(x, spec), spec);
      CHECK(std::abs(back - clamped) <= 0.5 * lsb * (1 + 1e-9));
    }
  }
}

TEST_CASE("clamping and monotonicity") {
  const QuantizationSpec spec{-18.0, 18.0, 12};
  CHECK(float_to_uint(1e9, spec) == spec.code_max());
  CHECK(float_to_uint(-1e9, spec) == 0);
  CHECK(float_to_uint(25.0, spec) == float_to_uint(18.0, spec));
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-30.0, 30.0);
  for (int i = 0; i < 5000; ++i) {
    double a = dist(rng), b = dist(rng);
    if (a > b) std::swap(a, b);
    CHECK(float_to_uint(a, spec) <= float_to_uint(b, spec));
  }
}

TEST_CASE("codec rejects junk") {
  const QuantizationSpec spec{-1.0, 1.0, 12};
  CHECK_THROWS_AS(float_to_uint(std::nan(""), spec), CodecError);
  CHECK_THROWS_AS(float_to_uint(INFINITY, spec), CodecError);
  CHECK_THROWS_AS(uint_to_float(4096, spec), CodecError);
  CHECK_THROWS_AS(float_to_uint(0.0, QuantizationSpec{1.0, -1.0, 12}), CodecError);
  CHECK_THROWS_AS(float_to_uint(0.0, QuantizationSpec{0.0, 1.0, 17}), CodecError);
}

TEST_CASE("command with every field at spec minimum packs to zero codes") {
  for (const auto& model : model_table()) {
    MitCommand cmd;
    cmd.position = model.position.min;
    cmd.velocity = model.velocity.min;
    cmd.kp = model.kp.min;
    cmd.kd = model.kd.min;
    cmd.torque_ff = model.torque.min;
    const Payload payload = encode_mit_command(cmd, model);
    for (const uint8_t byte : payload) CHECK(byte == 0);
  }
}

TEST_CASE("zero torque encodes to the mid code on symmetric ranges") {
  for (const auto& model : model_table()) {
    CHECK(float_to_uint(0.0, model.torque) == (1u << (model.torque.bits - 1)));
  }
}

TEST_CASE("classic mini-cheetah byte packing for the CubeMars layout") {
  const ActuatorModelSpec& model = lookup_model("AK80-9");
  MitCommand cmd;
  cmd.position = uint_to_float(0x1234, model.position);
  cmd.velocity = uint_to_float(0x567, model.velocity);
  cmd.kp = uint_to_float(0x89A, model.kp);
  cmd.kd = uint_to_float(0xBCD, model.kd);
  cmd.torque_ff = uint_to_float(0xEF0, model.torque);
  const Payload payload = encode_mit_command(cmd, model);
  const Payload expected{0x12, 0x34, 0x56, 0x78, 0x9A, 0xBC, 0xDE, 0xF0};
  CHECK(payload == expected);
}

TEST_CASE("command encode/decode round-trips within one LSB per family") {
  std::mt19937_64 rng(17);
  for (const char* name : {"AK80-9", "RobStride 01", "CyberGear Micromotor"}) {
    const ActuatorModelSpec& model = lookup_model(name);
    const auto lsb = [](const QuantizationSpec& s) {
      return (s.max - s.min) / s.code_max();
    };
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto sample = [&](const QuantizationSpec& s) {
      return s.min + (s.max - s.min) * unit(rng);
    };
    for (int i = 0; i < 10000; ++i) {
      MitCommand cmd;
      cmd.position = sample(model.position);
      cmd.velocity = sample(model.velocity);
      cmd.kp = sample(model.kp);
      cmd.kd = sample(model.kd);
      cmd.torque_ff = sample(model.torque);
      const MitCommand back = decode_mit_command(encode_mit_command(cmd, model), model);
      CHECK(std::abs(back.position - cmd.position) <= lsb(model.position));
      CHECK(std::abs(back.velocity - cmd.velocity) <= lsb(model.velocity));
      CHECK(std::abs(back.kp - cmd.kp) <= lsb(model.kp));
      CHECK(std::abs(back.kd - cmd.kd) <= lsb(model.kd));
      CHECK(std::abs(back.torque_ff - cmd.torque_ff) <= lsb(model.torque));
    }
  }
}

TEST_CASE("encode is deterministic") {
  const ActuatorModelSpec& model = lookup_model("AK80-9");
  MitCommand cmd{0.3, -1.2, 12.0, 0.7, 2.5};
  CHECK(encode_mit_command(cmd, model) == encode_mit_command(cmd, model));
}

TEST_CASE("feedback decode: all-zero codes hit the range minima") {
  for (const auto& model : model_table()) {
    const Payload zeros{};
    const MitFeedback fb = decode_feedback(zeros, model);
    CHECK(fb.position == doctest::Approx(model.position.min));
    CHECK(fb.velocity == doctest::Approx(model.velocity.min));
    CHECK(fb.torque == doctest::Approx(model.torque.min));
    CHECK(fb.temperature == doctest::Approx(-40.0));
    CHECK(fb.fault_code == 0);
  }
}

TEST_CASE("feedback decode: max temperature code reads the documented top") {
  const ActuatorModelSpec& model = lookup_model("AK80-9");
  MitFeedback fb;
  fb.can_id = 3;
  fb.temperature = 500.0;  // clamps to the top of the field
  const MitFeedback back = decode_feedback(encode_feedback(fb, model), model);
  CHECK(back.temperature == doctest::Approx(215.0));
  CHECK(back.can_id == 3);
}

TEST_CASE("feedback round-trips within one LSB and keeps ids and faults") {
  std::mt19937_64 rng(23);
  for (const char* name : {"AK80-9", "RobStride 03", "CyberGear Micromotor"}) {
    const ActuatorModelSpec& model = lookup_model(name);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
      MitFeedback fb;
      fb.can_id = static_cast<uint8_t>(1 + (i % 200));
      fb.position = model.position.min + (model.position.max - model.position.min) * unit(rng);
      fb.velocity = model.velocity.min + (model.velocity.max - model.velocity.min) * unit(rng);
      fb.torque = model.torque.min + (model.torque.max - model.torque.min) * unit(rng);
      fb.temperature = -40.0 + 255.0 * unit(rng);
      fb.fault_code = static_cast<uint8_t>(i % 8);
      const MitFeedback back = decode_feedback(encode_feedback(fb, model), model);
      CHECK(std::abs(back.position - fb.position) <=
            (model.position.max - model.position.min) / model.position.code_max());
      const FamilyLayout& layout = family_layout(model.family);
      if (layout.feedback_id_in_payload) CHECK(back.can_id == fb.can_id);
      bool has_fault = false;
      for (const auto& [field, width] : layout.feedback_fields)
        if (field == FbField::FaultCode) has_fault = width >= 3;
      if (has_fault) CHECK(back.fault_code == fb.fault_code);
    }
  }
}

TEST_CASE("truncated payloads are framing errors") {
  const ActuatorModelSpec& model = lookup_model("AK80-9");
  const std::vector<uint8_t> short_payload{1, 2, 3};
  CHECK_THROWS_AS(decode_feedback(short_payload, model), FramingError);
  CHECK_THROWS_AS(decode_mit_command(short_payload, model), FramingError);
}

TEST_CASE("special frames are distinguished, deterministic, and matchable") {
  for (const Family family : {Family::CubeMars, Family::RobStride, Family::CyberGear}) {
    const Payload enable = encode_special(SpecialFrameKind::Enable, family);
    const Payload disable = encode_special(SpecialFrameKind::Disable, family);
    const Payload zero = encode_special(SpecialFrameKind::ZeroPosition, family);
    CHECK(enable != disable);
    CHECK(enable != zero);
    CHECK(disable != zero);
    CHECK(encode_special(SpecialFrameKind::Enable, family) == enable);
    CHECK(match_special(enable, family) == SpecialFrameKind::Enable);
    CHECK(match_special(disable, family) == SpecialFrameKind::Disable);
    CHECK(match_special(zero, family) == SpecialFrameKind::ZeroPosition);
    const Payload ordinary{1, 2, 3, 4, 5, 6, 7, 8};
    CHECK(!match_special(ordinary, family).has_value());
  }
}

TEST_CASE("model table lookups") {
  const ActuatorModelSpec& ak = lookup_model("AK80-9");
  CHECK(ak.family == Family::CubeMars);
  CHECK(ak.rated_torque == doctest::Approx(9.0));
  CHECK_THROWS_AS(lookup_model("NOTAMOTOR"), UnknownModelError);
  try {
    lookup_model("NOTAMOTOR");
  } catch (const UnknownModelError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("AK80-9") != std::string::npos);
    CHECK(msg.find("CyberGear Micromotor") != std::string::npos);
  }
}

TEST_CASE("shipped table satisfies the aggregate limits") {
  CHECK(!model_table().empty());
  double rated_lo = 1e9, rated_hi = 0, peak_lo = 1e9, peak_hi = 0;
  for (const auto& m : model_table()) {
    CHECK(m.rated_torque <= m.peak_torque);
    CHECK(m.torque.min == doctest::Approx(-m.torque.max));
    CHECK(m.rated_torque >= 1.3);
    CHECK(m.rated_torque <= 40.0);
    CHECK(m.peak_torque >= 4.1);
    CHECK(m.peak_torque <= 120.0);
    rated_lo = std::min(rated_lo, m.rated_torque);
    rated_hi = std::max(rated_hi, m.rated_torque);
    peak_lo = std::min(peak_lo, m.peak_torque);
    peak_hi = std::max(peak_hi, m.peak_torque);
  }
  // The catalog spans the full advertised envelope.
  CHECK(rated_lo == doctest::Approx(1.3));
  CHECK(rated_hi == doctest::Approx(40.0));
  CHECK(peak_lo == doctest::Approx(4.1));
  CHECK(peak_hi == doctest::Approx(120.0));
}

TEST_CASE("table parser rejects malformed records") {
  const char* header =
      "AK99,CubeMars,-12.5,12.5,16,-45,45,12,-9,9,12,0,500,12,0,5,12,3,9,100\n";
  CHECK(parse_model_table(header).size() == 1);
  CHECK_THROWS_AS(parse_model_table("AK99,Nonsense,-1,1,16,-1,1,12,-1,1,12,0,1,12,0,1,12,1,1,100"),
                  ValidationError);
  CHECK_THROWS_AS(parse_model_table("AK99,CubeMars,-1,1,16\n"), ValidationError);
  // width mismatch against the family layout
  CHECK_THROWS_AS(parse_model_table("AK99,CubeMars,-12.5,12.5,8,-45,45,12,-9,9,12,0,500,12,0,5,12,3,9,100"),
                  ValidationError);
  // rated above peak
  CHECK_THROWS_AS(parse_model_table("AK99,CubeMars,-12.5,12.5,16,-45,45,12,-9,9,12,0,500,12,0,5,12,12,9,100"),
                  ValidationError);
  // asymmetric torque range
  CHECK_THROWS_AS(parse_model_table("AK99,CubeMars,-12.5,12.5,16,-45,45,12,-8,9,12,0,500,12,0,5,12,3,9,100"),
                  ValidationError);
  // duplicate names
  CHECK_THROWS_AS(parse_model_table(std::string(header) + header), ValidationError);
  // comments and blank lines are fine
  CHECK(parse_model_table(std::string("# comment\n\n") + header).size() == 1);
}

TEST_CASE("external model tables load from disk") {
  const std::string path = "/tmp/qddkit_models_" + std::to_string(getpid()) + ".csv";
  {
    std::ofstream out(path);
    out << "# local override\n"
        << "AK99,CubeMars,-12.5,12.5,16,-45,45,12,-9,9,12,0,500,12,0,5,12,3,9,100\n";
  }
  const auto table = load_model_table(path);
  REQUIRE(table.size() == 1);
  CHECK(table[0].name == "AK99");
  CHECK(table[0].family == Family::CubeMars);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_model_table("/tmp/qddkit-no-such-table.csv"), IoError);
}

TEST_CASE("arbitration id construction per family") {
  const FamilyLayout& cm = family_layout(Family::CubeMars);
  CHECK(!cm.extended_id);
  CHECK(cm.command_arb_id(9) == 9);
  CHECK(cm.feedback_arb_id(9) == 0);
  CHECK(cm.feedback_id_in_payload);

  const FamilyLayout& rs = family_layout(Family::RobStride);
  CHECK(rs.extended_id);
  CHECK(rs.command_arb_id(9) == ((1u << 24) | (0xFDu << 8) | 9u));
  CHECK(rs.feedback_arb_id(9) == ((2u << 24) | (9u << 8) | 0xFDu));
  CHECK(rs.command_arb_id(9) <= kExtendedIdMask);
}
