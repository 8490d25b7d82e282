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

#include <stdexcept>
#include <string>

namespace qdd {

/// Base class for all qddkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad value or code handed to the quantization / frame codecs.
class CodecError : public Error {
 public:
  using Error::Error;
};

/// Payload does not match the expected frame layout (wrong length etc.).
class FramingError : public CodecError {
 public:
  using CodecError::CodecError;
};

/// Model name not present in the model table.
class UnknownModelError : public CodecError {
 public:
  using CodecError::CodecError;
};

/// Bus open / I/O failure.
class BusError : public Error {
 public:
  using Error::Error;
};

/// API misuse: closed handle, unknown actuator id, command to a disabled
/// actuator, log after close.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration (unparseable destination, invalid frequency, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data failed validation (duplicate field names, malformed script, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File I/O failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qdd
