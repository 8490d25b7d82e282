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

#include "qdd/recorder.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qdd/detail/format.hpp"

namespace qdd {

namespace {

bool needs_quoting(const std::string& s, char delimiter) {
  return s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
}

void append_cell(std::string& out, const std::string& s, char delimiter) {
  if (!needs_quoting(s, delimiter)) {
    out += s;
    return;
  }
  out += '"';
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

Recorder::Recorder(const std::string& path, std::vector<std::string> field_names,
                   RecorderOptions options)
    : fields_(std::move(field_names)), options_(options) {
  if (fields_.empty()) throw ValidationError("recorder needs at least one field");
  if (options_.buffer_capacity == 0)
    throw ValidationError("buffer capacity must be positive");
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].empty()) throw ValidationError("empty field name");
    for (size_t j = i + 1; j < fields_.size(); ++j)
      if (fields_[i] == fields_[j])
        throw ValidationError("duplicate field name '" + fields_[i] + "'");
  }

  int flags = O_WRONLY | O_CREAT;
  flags |= options_.overwrite ? O_TRUNC : O_EXCL;
  const int fd = ::open(path.c_str(), flags, 0644);
  if (fd < 0) {
    if (errno == EEXIST)
      throw IoError("'" + path + "' exists; pass overwrite to replace it");
    throw IoError("cannot create '" + path + "': " + std::strerror(errno));
  }
  file_ = ::fdopen(fd, "w");
  if (!file_) {
    ::close(fd);
    throw IoError("cannot open '" + path + "' for writing");
  }

  std::string header;
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (i) header += options_.delimiter;
    append_cell(header, fields_[i], options_.delimiter);
  }
  header += '\n';
  if (std::fwrite(header.data(), 1, header.size(), file_) != header.size() ||
      std::fflush(file_) != 0 || ::fsync(fileno(file_)) != 0) {
    std::fclose(file_);
    throw IoError("cannot write header to '" + path + "'");
  }

  active_.reserve(options_.buffer_capacity);
  writer_ = std::thread([this] { writer_loop(); });
}

Recorder::~Recorder() {
  try {
    close();
  } catch (const Error&) {
    // Destructor cannot report; stats carried the failure already.
  }
}

std::string Recorder::format_row(const LogRow& row) const {
  std::string out;
  for (size_t i = 0; i < row.size(); ++i) {
    if (i) out += options_.delimiter;
    if (const double* d = std::get_if<double>(&row[i]))
      out += detail::format_double(*d);
    else
      append_cell(out, std::get<std::string>(row[i]), options_.delimiter);
  }
  out += '\n';
  return out;
}

void Recorder::enqueue_locked(std::vector<LogRow>&& buffer) {
  pending_rows_ += buffer.size();
  pending_.push_back(std::move(buffer));
  const size_t bound = options_.overflow_factor * options_.buffer_capacity;
  while (pending_rows_ > bound && pending_.size() > 1) {
    rows_dropped_ += pending_.front().size();
    pending_rows_ -= pending_.front().size();
    pending_.pop_front();
  }
  work_cv_.notify_one();
}

LogStatus Recorder::log(LogRow row) {
  if (row.size() != fields_.size())
    throw ValidationError("row has " + std::to_string(row.size()) +
                          " cells, header has " + std::to_string(fields_.size()));
  std::lock_guard lock(m_);
  if (closed_ || closing_) throw UsageError("log on a closed recorder");
  const uint64_t dropped_before = rows_dropped_;
  active_.push_back(std::move(row));
  ++rows_logged_;
  if (active_.size() >= options_.buffer_capacity) {
    std::vector<LogRow> full;
    full.reserve(options_.buffer_capacity);
    full.swap(active_);
    enqueue_locked(std::move(full));
  }
  if (rows_dropped_ > dropped_before) return LogStatus::DroppedOverflow;
  if (writer_failed_) return LogStatus::AcceptedDegraded;
  return LogStatus::Accepted;
}

void Recorder::writer_loop() {
  std::unique_lock lock(m_);
  while (true) {
    work_cv_.wait(lock, [&] { return !pending_.empty() || closing_; });
    if (pending_.empty() && closing_) break;
    std::vector<LogRow> buffer = std::move(pending_.front());
    pending_.pop_front();
    pending_rows_ -= buffer.size();
    writer_busy_ = true;
    lock.unlock();

    bool ok = !writer_failed_;
    if (ok) {
      std::string block;
      for (const LogRow& row : buffer) block += format_row(row);
      ok = std::fwrite(block.data(), 1, block.size(), file_) == block.size() &&
           std::fflush(file_) == 0;
    }

    lock.lock();
    if (ok) {
      rows_written_ += buffer.size();
      ++flush_boundaries_;
    } else {
      writer_failed_ = true;
      rows_dropped_ += buffer.size();
    }
    writer_busy_ = false;
    drained_cv_.notify_all();
  }
}

void Recorder::flush() {
  std::unique_lock lock(m_);
  if (closed_) throw UsageError("flush on a closed recorder");
  if (!active_.empty()) {
    std::vector<LogRow> partial;
    partial.reserve(options_.buffer_capacity);
    partial.swap(active_);
    enqueue_locked(std::move(partial));
  }
  drained_cv_.wait(lock, [&] { return pending_.empty() && !writer_busy_; });
  if (writer_failed_)
    throw IoError("recorder writer failed; " + std::to_string(rows_dropped_) +
                  " rows lost");
  ::fsync(fileno(file_));
}

void Recorder::close() {
  {
    std::lock_guard lock(m_);
    if (closed_) return;
  }
  std::string failure;
  try {
    flush();
  } catch (const Error& e) {
    failure = e.what();
  }
  {
    std::lock_guard lock(m_);
    closing_ = true;
    work_cv_.notify_all();
  }
  if (writer_.joinable()) writer_.join();
  {
    std::lock_guard lock(m_);
    if (file_) {
      std::fclose(file_);
      file_ = nullptr;
    }
    closed_ = true;
  }
  if (!failure.empty()) throw IoError(failure);
}

RecorderStats Recorder::stats() const {
  std::lock_guard lock(m_);
  return {rows_logged_, rows_written_, rows_dropped_, flush_boundaries_,
          writer_failed_};
}

std::pair<std::vector<std::string>, uint64_t> inspect_recording(
    const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open recording '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  // Quote-aware record scan (cells may contain embedded delimiters/newlines).
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  const auto end_cell = [&] {
    record.push_back(std::move(cell));
    cell.clear();
    cell_started = false;
  };
  const auto end_record = [&] {
    end_cell();
    records.push_back(std::move(record));
    record.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"' && !cell_started) {
      in_quotes = true;
      cell_started = true;
    } else if (c == delimiter) {
      end_cell();
      cell_started = false;
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      // tolerated before '\n'
    } else {
      cell += c;
      cell_started = true;
    }
  }
  if (in_quotes) throw ValidationError("'" + path + "': unterminated quote");
  if (cell_started || !record.empty()) end_record();

  if (records.empty()) throw ValidationError("'" + path + "' has no header row");
  const std::vector<std::string> header = records.front();
  for (size_t i = 1; i < records.size(); ++i)
    if (records[i].size() != header.size())
      throw ValidationError("'" + path + "' row " + std::to_string(i) + " has " +
                            std::to_string(records[i].size()) + " cells, header has " +
                            std::to_string(header.size()));
  return {header, records.size() - 1};
}

}  // namespace qdd
