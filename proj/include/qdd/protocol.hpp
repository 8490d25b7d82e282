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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qdd/errors.hpp"

namespace qdd {

/// Linear quantization of a physical quantity onto an unsigned bit field.
/// Codes span [0, 2^bits - 1]; code 0 maps to `min`, the max code to `max`.
struct QuantizationSpec {
  double min = 0.0;
  double max = 1.0;
  unsigned bits = 12;

  uint32_t code_max() const { return (1u << bits) - 1u; }
  bool valid() const { return min < max && bits >= 1 && bits <= 16; }
};

/// Physical value -> code. The value is clamped to [min, max] first, then
/// mapped linearly and rounded to the nearest code (ties away from zero).
/// Throws CodecError for non-finite values or an invalid spec.
uint32_t float_to_uint(double value, const QuantizationSpec& spec);

/// Code -> physical value: min + code * (max - min) / (2^bits - 1).
/// Throws CodecError if the code exceeds the spec's code range.
double uint_to_float(uint32_t code, const QuantizationSpec& spec);

enum class Family { CubeMars, RobStride, CyberGear };

std::string_view family_name(Family family);
std::optional<Family> family_from_name(std::string_view name);

/// Per-model quantization ranges and torque limits. This is the codec's
/// source of truth; the shipped table lives in data/actuator_models.csv.
struct ActuatorModelSpec {
  std::string name;
  Family family = Family::CubeMars;
  QuantizationSpec position;  // rad
  QuantizationSpec velocity;  // rad/s
  QuantizationSpec torque;    // Nm, symmetric around zero
  QuantizationSpec kp;        // Nm/rad
  QuantizationSpec kd;        // Nm*s/rad
  double rated_torque = 0.0;  // Nm, continuous-safe
  double peak_torque = 0.0;   // Nm, short-burst maximum
  double max_temperature = 0.0;  // degC
};

/// Five-field impedance command, in physical units. On-board torque is
/// torque_ff + kp * (position - theta) + kd * (velocity - omega).
struct MitCommand {
  double position = 0.0;   // rad
  double velocity = 0.0;   // rad/s
  double kp = 0.0;         // Nm/rad
  double kd = 0.0;         // Nm*s/rad
  double torque_ff = 0.0;  // Nm

  bool operator==(const MitCommand&) const = default;
};

/// Decoded actuator state report.
struct MitFeedback {
  uint8_t can_id = 0;
  double position = 0.0;     // rad
  double velocity = 0.0;     // rad/s
  double torque = 0.0;       // Nm
  double temperature = 0.0;  // degC
  uint8_t fault_code = 0;    // passed through opaquely; see docs/protocol.md
};

/// Control-plane frames with one distinguished payload per family.
enum class SpecialFrameKind { Enable, Disable, ZeroPosition };

using Payload = std::array<uint8_t, 8>;

// Field roles used by the data-driven layout tables.
enum class CmdField { Position, Velocity, Kp, Kd, TorqueFF };
enum class FbField { IdEcho, Position, Velocity, Torque, Temperature, FaultCode };

/// Wire layout for one actuator family, kept as data so a family difference
/// (or a corrected vendor layout) is a table change, not a code change.
/// Fields are packed in order, most-significant bit first unless msb_first is
/// cleared; trailing unused bits are zero. Bit-by-bit documentation lives in
/// docs/protocol.md.
struct FamilyLayout {
  Family family = Family::CubeMars;
  bool msb_first = true;
  std::vector<std::pair<CmdField, unsigned>> command_fields;
  std::vector<std::pair<FbField, unsigned>> feedback_fields;
  /// Feedback temperature field mapping (degC range over the raw field).
  QuantizationSpec temperature;
  Payload enable_payload{};
  Payload disable_payload{};
  Payload zero_payload{};
  /// Arbitration-id construction: arb = base | (can_id << shift).
  bool extended_id = false;
  uint32_t command_id_base = 0;
  unsigned command_id_shift = 0;
  uint32_t feedback_id_base = 0;
  unsigned feedback_id_shift = 0;
  /// When set, feedback frames carry the actuator id in the IdEcho field and
  /// all share feedback_id_base as their arbitration id.
  bool feedback_id_in_payload = false;

  uint32_t command_arb_id(uint8_t can_id) const {
    return command_id_base | (static_cast<uint32_t>(can_id) << command_id_shift);
  }
  uint32_t feedback_arb_id(uint8_t can_id) const {
    if (feedback_id_in_payload) return feedback_id_base;
    return feedback_id_base | (static_cast<uint32_t>(can_id) << feedback_id_shift);
  }
};

const FamilyLayout& family_layout(Family family);

/// Packs the five quantized command fields per the family layout. Each field
/// is clamped to its model range before quantization. Pure function of its
/// inputs. Throws CodecError on non-finite fields.
Payload encode_mit_command(const MitCommand& cmd, const ActuatorModelSpec& model);

/// Inverse of encode_mit_command. Throws FramingError on a bad payload length.
MitCommand decode_mit_command(std::span<const uint8_t> payload,
                              const ActuatorModelSpec& model);

/// Packs an actuator state report (used by the virtual actuators).
Payload encode_feedback(const MitFeedback& fb, const ActuatorModelSpec& model);

/// Dequantizes a feedback payload. can_id comes from the IdEcho field when the
/// family layout carries one, otherwise it is left 0 (the arbitration id
/// identifies the sender for those families). Throws FramingError on a bad
/// payload length.
MitFeedback decode_feedback(std::span<const uint8_t> payload,
                            const ActuatorModelSpec& model);

/// The family's distinguished payload for Enable / Disable / ZeroPosition.
Payload encode_special(SpecialFrameKind kind, Family family);

/// Reverse lookup of encode_special; nullopt if the payload is not special.
std::optional<SpecialFrameKind> match_special(std::span<const uint8_t> payload,
                                              Family family);

// Model table ------------------------------------------------------------

/// Looks up a model by exact name in the shipped table. Throws
/// UnknownModelError listing the known models.
const ActuatorModelSpec& lookup_model(std::string_view name);

const std::vector<ActuatorModelSpec>& model_table();
std::vector<std::string> model_names();

/// Parses a model table in the shipped CSV dialect ('#' comments allowed).
/// Every record is validated: spec ranges sane, field widths matching the
/// family layout, rated <= peak, symmetric torque range.
std::vector<ActuatorModelSpec> parse_model_table(std::string_view csv_text);

/// Loads an external model table file (same format as the shipped fixture).
std::vector<ActuatorModelSpec> load_model_table(const std::string& path);

}  // namespace qdd
