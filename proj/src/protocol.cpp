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

#include "qdd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include "qdd/detail/embedded_fixtures.hpp"

namespace qdd {

namespace {

// Bitwise cursor over an 8-byte payload. msb_first packs each field and the
// stream itself most-significant-bit first (the mini-cheetah convention).
struct BitCursor {
  size_t pos = 0;

  void put(Payload& out, uint32_t code, unsigned width, bool msb_first) {
    for (unsigned i = 0; i < width; ++i) {
      const unsigned bit =
          msb_first ? (code >> (width - 1u - i)) & 1u : (code >> i) & 1u;
      const size_t p = pos + i;
      const size_t byte = p / 8;
      const unsigned shift = msb_first ? 7u - (p % 8) : (p % 8);
      if (bit) out[byte] |= static_cast<uint8_t>(1u << shift);
    }
    pos += width;
  }

  uint32_t get(std::span<const uint8_t> in, unsigned width, bool msb_first) {
    uint32_t code = 0;
    for (unsigned i = 0; i < width; ++i) {
      const size_t p = pos + i;
      const size_t byte = p / 8;
      const unsigned shift = msb_first ? 7u - (p % 8) : (p % 8);
      const uint32_t bit = (in[byte] >> shift) & 1u;
      if (msb_first) {
        code |= bit << (width - 1u - i);
      } else {
        code |= bit << i;
      }
    }
    pos += width;
    return code;
  }
};

Payload special_payload(uint8_t last_byte) {
  Payload p;
  p.fill(0xFF);
  p[7] = last_byte;
  return p;
}

const QuantizationSpec& command_field_spec(const ActuatorModelSpec& model,
                                           CmdField field) {
  switch (field) {
    case CmdField::Position: return model.position;
    case CmdField::Velocity: return model.velocity;
    case CmdField::Kp: return model.kp;
    case CmdField::Kd: return model.kd;
    case CmdField::TorqueFF: return model.torque;
  }
  throw CodecError("unknown command field");
}

double command_field_value(const MitCommand& cmd, CmdField field) {
  switch (field) {
    case CmdField::Position: return cmd.position;
    case CmdField::Velocity: return cmd.velocity;
    case CmdField::Kp: return cmd.kp;
    case CmdField::Kd: return cmd.kd;
    case CmdField::TorqueFF: return cmd.torque_ff;
  }
  throw CodecError("unknown command field");
}

const char* command_field_name(CmdField field) {
  switch (field) {
    case CmdField::Position: return "position";
    case CmdField::Velocity: return "velocity";
    case CmdField::Kp: return "kp";
    case CmdField::Kd: return "kd";
    case CmdField::TorqueFF: return "torque_ff";
  }
  return "?";
}

std::vector<FamilyLayout> build_layouts() {
  std::vector<FamilyLayout> layouts(3);

  // CubeMars AK series, MIT mode: classic mini-cheetah packing. Commands go
  // to the actuator's own 11-bit id; replies arrive on id 0x000 with the
  // actuator id echoed in payload byte 0.
  FamilyLayout& cm = layouts[0];
  cm.family = Family::CubeMars;
  cm.command_fields = {{CmdField::Position, 16},
                       {CmdField::Velocity, 12},
                       {CmdField::Kp, 12},
                       {CmdField::Kd, 12},
                       {CmdField::TorqueFF, 12}};
  cm.feedback_fields = {{FbField::IdEcho, 8},      {FbField::Position, 16},
                        {FbField::Velocity, 12},   {FbField::Torque, 12},
                        {FbField::Temperature, 8}, {FbField::FaultCode, 8}};
  cm.temperature = {-40.0, 215.0, 8};
  cm.enable_payload = special_payload(0xFC);
  cm.disable_payload = special_payload(0xFD);
  cm.zero_payload = special_payload(0xFE);
  cm.extended_id = false;
  cm.command_id_base = 0;
  cm.command_id_shift = 0;
  cm.feedback_id_base = 0;
  cm.feedback_id_in_payload = true;

  // RobStride: extended ids with the communication type in bits 24..28 and
  // the host id 0xFD riding along (commands carry it in bits 8..15, replies
  // in bits 0..7). The actuator id sits in the remaining byte.
  FamilyLayout& rs = layouts[1];
  rs.family = Family::RobStride;
  rs.command_fields = {{CmdField::Position, 16},
                       {CmdField::Velocity, 14},
                       {CmdField::Kp, 12},
                       {CmdField::Kd, 10},
                       {CmdField::TorqueFF, 12}};
  rs.feedback_fields = {{FbField::Position, 16},
                        {FbField::Velocity, 14},
                        {FbField::Torque, 12},
                        {FbField::Temperature, 12},
                        {FbField::FaultCode, 8}};
  rs.temperature = {-40.0, 215.0, 12};
  rs.enable_payload = special_payload(0xFC);
  rs.disable_payload = special_payload(0xFD);
  rs.zero_payload = special_payload(0xFE);
  rs.extended_id = true;
  rs.command_id_base = (1u << 24) | (0xFDu << 8);
  rs.command_id_shift = 0;
  rs.feedback_id_base = (2u << 24) | 0xFDu;
  rs.feedback_id_shift = 8;

  // CyberGear Micromotor: same id scheme, different field packing (16-bit
  // position/velocity/torque, byte-wide gains).
  FamilyLayout& cg = layouts[2];
  cg.family = Family::CyberGear;
  cg.command_fields = {{CmdField::Position, 16},
                       {CmdField::Velocity, 16},
                       {CmdField::TorqueFF, 16},
                       {CmdField::Kp, 8},
                       {CmdField::Kd, 8}};
  cg.feedback_fields = {{FbField::Position, 16},
                        {FbField::Velocity, 16},
                        {FbField::Torque, 16},
                        {FbField::Temperature, 16}};
  cg.temperature = {-40.0, 215.0, 16};
  cg.enable_payload = special_payload(0xFC);
  cg.disable_payload = special_payload(0xFD);
  cg.zero_payload = special_payload(0xFE);
  cg.extended_id = true;
  cg.command_id_base = (1u << 24) | (0xFDu << 8);
  cg.command_id_shift = 0;
  cg.feedback_id_base = (2u << 24) | 0xFDu;
  cg.feedback_id_shift = 8;

  return layouts;
}

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& token, size_t line_no) {
  try {
    size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("model table line " + std::to_string(line_no) +
                          ": bad number '" + token + "'");
  }
}

unsigned expected_width(const FamilyLayout& layout, CmdField field) {
  for (const auto& [f, w] : layout.command_fields)
    if (f == field) return w;
  return 0;
}

void validate_model(const ActuatorModelSpec& m, size_t line_no) {
  const auto fail = [&](const std::string& why) {
    throw ValidationError("model table line " + std::to_string(line_no) + " (" +
                          m.name + "): " + why);
  };
  const FamilyLayout& layout = family_layout(m.family);
  const std::pair<const QuantizationSpec*, CmdField> specs[] = {
      {&m.position, CmdField::Position},
      {&m.velocity, CmdField::Velocity},
      {&m.torque, CmdField::TorqueFF},
      {&m.kp, CmdField::Kp},
      {&m.kd, CmdField::Kd}};
  for (const auto& [spec, field] : specs) {
    if (!spec->valid()) fail(std::string(command_field_name(field)) + " spec invalid");
    if (spec->bits != expected_width(layout, field))
      fail(std::string(command_field_name(field)) + " width does not match the " +
           std::string(family_name(m.family)) + " layout");
  }
  if (std::abs(m.torque.min + m.torque.max) > 1e-9 * std::abs(m.torque.max))
    fail("torque range must be symmetric");
  if (m.rated_torque <= 0 || m.peak_torque <= 0) fail("torque limits must be positive");
  if (m.rated_torque > m.peak_torque) fail("rated torque exceeds peak torque");
  if (m.peak_torque > m.torque.max + 1e-9) fail("peak torque not representable");
}

std::vector<ActuatorModelSpec> parse_table(std::string_view text) {
  std::vector<ActuatorModelSpec> out;
  size_t line_no = 0;
  size_t begin = 0;
  while (begin <= text.size()) {
    const size_t end = text.find('\n', begin);
    std::string line = trim(text.substr(
        begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
    begin = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> tok;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) tok.push_back(trim(cell));
    if (tok.size() != 20)
      throw ValidationError("model table line " + std::to_string(line_no) +
                            ": expected 20 fields, got " + std::to_string(tok.size()));

    ActuatorModelSpec m;
    m.name = tok[0];
    const auto fam = family_from_name(tok[1]);
    if (!fam)
      throw ValidationError("model table line " + std::to_string(line_no) +
                            ": unknown family '" + tok[1] + "'");
    m.family = *fam;
    const auto num = [&](size_t i) { return parse_number(tok[i], line_no); };
    const auto bits = [&](size_t i) { return static_cast<unsigned>(num(i)); };
    m.position = {num(2), num(3), bits(4)};
    m.velocity = {num(5), num(6), bits(7)};
    m.torque = {num(8), num(9), bits(10)};
    m.kp = {num(11), num(12), bits(13)};
    m.kd = {num(14), num(15), bits(16)};
    m.rated_torque = num(17);
    m.peak_torque = num(18);
    m.max_temperature = num(19);
    validate_model(m, line_no);
    for (const auto& existing : out)
      if (existing.name == m.name)
        throw ValidationError("model table line " + std::to_string(line_no) +
                              ": duplicate model '" + m.name + "'");
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

uint32_t float_to_uint(double value, const QuantizationSpec& spec) {
  if (!spec.valid()) throw CodecError("invalid quantization spec");
  if (!std::isfinite(value)) throw CodecError("cannot quantize non-finite value");
  const double v = std::clamp(value, spec.min, spec.max);
  const double scaled = (v - spec.min) / (spec.max - spec.min) *
                        static_cast<double>(spec.code_max());
  const auto code = static_cast<uint32_t>(std::llround(scaled));
  return std::min(code, spec.code_max());
}

double uint_to_float(uint32_t code, const QuantizationSpec& spec) {
  if (!spec.valid()) throw CodecError("invalid quantization spec");
  if (code > spec.code_max())
    throw CodecError("code " + std::to_string(code) + " out of range for " +
                     std::to_string(spec.bits) + "-bit field");
  return spec.min + static_cast<double>(code) * (spec.max - spec.min) /
                        static_cast<double>(spec.code_max());
}

std::string_view family_name(Family family) {
  switch (family) {
    case Family::CubeMars: return "CubeMars";
    case Family::RobStride: return "RobStride";
    case Family::CyberGear: return "CyberGear";
  }
  return "?";
}

std::optional<Family> family_from_name(std::string_view name) {
  if (name == "CubeMars") return Family::CubeMars;
  if (name == "RobStride") return Family::RobStride;
  if (name == "CyberGear") return Family::CyberGear;
  return std::nullopt;
}

const FamilyLayout& family_layout(Family family) {
  static const std::vector<FamilyLayout> layouts = build_layouts();
  return layouts.at(static_cast<size_t>(family));
}

Payload encode_mit_command(const MitCommand& cmd, const ActuatorModelSpec& model) {
  const FamilyLayout& layout = family_layout(model.family);
  Payload out{};
  BitCursor cur;
  for (const auto& [field, width] : layout.command_fields) {
    const QuantizationSpec& spec = command_field_spec(model, field);
    if (spec.bits != width)
      throw CodecError(model.name + ": spec width mismatch for " +
                       command_field_name(field));
    const double value = command_field_value(cmd, field);
    if (!std::isfinite(value))
      throw CodecError(std::string("non-finite ") + command_field_name(field) +
                       " in command");
    cur.put(out, float_to_uint(value, spec), width, layout.msb_first);
  }
  return out;
}

MitCommand decode_mit_command(std::span<const uint8_t> payload,
                              const ActuatorModelSpec& model) {
  if (payload.size() != 8)
    throw FramingError("command payload must be 8 bytes, got " +
                       std::to_string(payload.size()));
  const FamilyLayout& layout = family_layout(model.family);
  MitCommand cmd;
  BitCursor cur;
  for (const auto& [field, width] : layout.command_fields) {
    const double v =
        uint_to_float(cur.get(payload, width, layout.msb_first),
                      command_field_spec(model, field));
    switch (field) {
      case CmdField::Position: cmd.position = v; break;
      case CmdField::Velocity: cmd.velocity = v; break;
      case CmdField::Kp: cmd.kp = v; break;
      case CmdField::Kd: cmd.kd = v; break;
      case CmdField::TorqueFF: cmd.torque_ff = v; break;
    }
  }
  return cmd;
}

Payload encode_feedback(const MitFeedback& fb, const ActuatorModelSpec& model) {
  const FamilyLayout& layout = family_layout(model.family);
  Payload out{};
  BitCursor cur;
  for (const auto& [field, width] : layout.feedback_fields) {
    uint32_t code = 0;
    switch (field) {
      case FbField::IdEcho: code = fb.can_id; break;
      case FbField::Position: code = float_to_uint(fb.position, model.position); break;
      case FbField::Velocity: code = float_to_uint(fb.velocity, model.velocity); break;
      case FbField::Torque: code = float_to_uint(fb.torque, model.torque); break;
      case FbField::Temperature:
        code = float_to_uint(fb.temperature, layout.temperature);
        break;
      case FbField::FaultCode:
        code = fb.fault_code & ((width >= 32 ? ~0u : (1u << width) - 1u));
        break;
    }
    cur.put(out, code, width, layout.msb_first);
  }
  return out;
}

MitFeedback decode_feedback(std::span<const uint8_t> payload,
                            const ActuatorModelSpec& model) {
  if (payload.size() != 8)
    throw FramingError("feedback payload must be 8 bytes, got " +
                       std::to_string(payload.size()));
  const FamilyLayout& layout = family_layout(model.family);
  MitFeedback fb;
  BitCursor cur;
  for (const auto& [field, width] : layout.feedback_fields) {
    const uint32_t code = cur.get(payload, width, layout.msb_first);
    switch (field) {
      case FbField::IdEcho: fb.can_id = static_cast<uint8_t>(code); break;
      case FbField::Position: fb.position = uint_to_float(code, model.position); break;
      case FbField::Velocity: fb.velocity = uint_to_float(code, model.velocity); break;
      case FbField::Torque: fb.torque = uint_to_float(code, model.torque); break;
      case FbField::Temperature:
        fb.temperature = uint_to_float(code, layout.temperature);
        break;
      case FbField::FaultCode: fb.fault_code = static_cast<uint8_t>(code); break;
    }
  }
  return fb;
}

Payload encode_special(SpecialFrameKind kind, Family family) {
  const FamilyLayout& layout = family_layout(family);
  switch (kind) {
    case SpecialFrameKind::Enable: return layout.enable_payload;
    case SpecialFrameKind::Disable: return layout.disable_payload;
    case SpecialFrameKind::ZeroPosition: return layout.zero_payload;
  }
  throw CodecError("unknown special frame kind");
}

std::optional<SpecialFrameKind> match_special(std::span<const uint8_t> payload,
                                              Family family) {
  if (payload.size() != 8) return std::nullopt;
  const FamilyLayout& layout = family_layout(family);
  const auto eq = [&](const Payload& p) {
    return std::equal(payload.begin(), payload.end(), p.begin());
  };
  if (eq(layout.enable_payload)) return SpecialFrameKind::Enable;
  if (eq(layout.disable_payload)) return SpecialFrameKind::Disable;
  if (eq(layout.zero_payload)) return SpecialFrameKind::ZeroPosition;
  return std::nullopt;
}

const std::vector<ActuatorModelSpec>& model_table() {
  static const std::vector<ActuatorModelSpec> table =
      parse_table(detail::kModelTableCsv);
  return table;
}

const ActuatorModelSpec& lookup_model(std::string_view name) {
  for (const auto& m : model_table())
    if (m.name == name) return m;
  std::string msg = "unknown actuator model '" + std::string(name) + "'; known models:";
  for (const auto& m : model_table()) msg += " '" + m.name + "'";
  throw UnknownModelError(msg);
}

std::vector<std::string> model_names() {
  std::vector<std::string> names;
  names.reserve(model_table().size());
  for (const auto& m : model_table()) names.push_back(m.name);
  return names;
}

std::vector<ActuatorModelSpec> parse_model_table(std::string_view csv_text) {
  return parse_table(csv_text);
}

std::vector<ActuatorModelSpec> load_model_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_table(ss.str());
}

}  // namespace qdd
