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

#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "qdd/errors.hpp"

namespace qdd {

using LogCell = std::variant<double, std::string>;
using LogRow = std::vector<LogCell>;

enum class LogStatus {
  Accepted,
  AcceptedDegraded,  // buffered, but the writer has failed
  DroppedOverflow,   // overflow bound hit; oldest pending rows were dropped
};

struct RecorderOptions {
  char delimiter = ',';
  size_t buffer_capacity = 200;  // rows per flush boundary
  bool overwrite = false;
  /// Pending rows may pile up to overflow_factor * buffer_capacity while the
  /// writer is stuck; beyond that the oldest buffer is dropped (counted).
  size_t overflow_factor = 4;
};

struct RecorderStats {
  uint64_t rows_logged = 0;
  uint64_t rows_written = 0;   // handed to the OS (flush boundaries complete)
  uint64_t rows_dropped = 0;
  uint64_t flush_boundaries = 0;
  bool writer_failed = false;
};

/// Buffered delimiter-separated logger. log() only appends to an in-memory
/// buffer; every buffer_capacity rows the full buffer is handed to a
/// background writer thread, so at 200 Hz with the default capacity the file
/// grows about once per second and a crash loses at most one buffer. The
/// header row is written (and synced) before log() ever accepts a row.
class Recorder {
 public:
  /// Creates the file and writes the header. Throws IoError when the path is
  /// unwritable or exists without the overwrite option, ValidationError on
  /// empty/duplicate field names.
  Recorder(const std::string& path, std::vector<std::string> field_names,
           RecorderOptions options = {});
  ~Recorder();

  Recorder(const Recorder&) = delete;
  Recorder& operator=(const Recorder&) = delete;

  /// Appends one row (arity must match the header; throws ValidationError
  /// otherwise, UsageError after close). Performs no file I/O on the calling
  /// context.
  LogStatus log(LogRow row);

  /// Blocks until every buffered row, including the partial buffer, is in the
  /// file and synced. Throws IoError if the writer has failed, reporting the
  /// rows at risk.
  void flush();

  /// flush + join + close; idempotent. Logging afterwards is a usage error.
  void close();

  RecorderStats stats() const;
  const std::vector<std::string>& field_names() const { return fields_; }

 private:
  void writer_loop();
  void enqueue_locked(std::vector<LogRow>&& buffer);
  std::string format_row(const LogRow& row) const;

  std::vector<std::string> fields_;
  RecorderOptions options_;
  std::FILE* file_ = nullptr;

  mutable std::mutex m_;
  std::condition_variable work_cv_;
  std::condition_variable drained_cv_;
  std::vector<LogRow> active_;
  std::deque<std::vector<LogRow>> pending_;
  size_t pending_rows_ = 0;
  bool writer_busy_ = false;
  bool closing_ = false;
  bool closed_ = false;
  bool writer_failed_ = false;

  uint64_t rows_logged_ = 0;
  uint64_t rows_written_ = 0;
  uint64_t rows_dropped_ = 0;
  uint64_t flush_boundaries_ = 0;

  std::thread writer_;
};

/// Parses a recording: returns (field names, data row count). Validates that
/// every line splits to the header arity under the delimiter. Used by the
/// record-inspect CLI.
std::pair<std::vector<std::string>, uint64_t> inspect_recording(
    const std::string& path, char delimiter = ',');

}  // namespace qdd
