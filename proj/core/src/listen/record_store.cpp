// Copyright 2026 The dogvc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dogvc/listen.hpp"

namespace dogvc::listen {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kRecords = "records.jsonl";
constexpr const char* kAudit = "audit.jsonl";
constexpr const char* kSessions = "sessions.jsonl";
constexpr const char* kSecret = "secret";

// Appends one line and fsyncs before returning, so an acknowledged record
// survives a crash.
void append_line(const fs::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(fmt::format("cannot open {}: {}", path.string(), std::strerror(errno)));
  const std::string data = line + "\n";
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(fmt::format("cannot write {}: {}", path.string(), std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

// A torn final line (crash mid-append) was never acknowledged and is skipped.
template <class T, class Parse>
std::vector<T> read_lines(const fs::path& path, Parse parse) {
  std::vector<T> out;
  std::ifstream in(path);
  if (!in) return out;
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(parse(lines[i]));
    } catch (const Error&) {
      if (i + 1 != lines.size()) throw;
    }
  }
  return out;
}

std::string session_to_json(const Session& s) {
  ordered_json j;
  j["id"] = s.id;
  j["rater"] = s.rater;
  j["experiment"] = s.experiment;
  j["seed"] = s.seed;
  return j.dump();
}

Session session_from_json(const std::string& line) {
  try {
    const auto j = json::parse(line);
    Session s;
    s.id = j.at("id").get<std::string>();
    s.rater = j.at("rater").get<std::string>();
    s.experiment = j.at("experiment").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("session record: ") + e.what());
  }
}

std::vector<StoredRecord> latest_per_key(std::vector<StoredRecord> all) {
  std::map<std::string, std::size_t> slot;
  std::vector<StoredRecord> out;
  for (auto& r : all) {
    const auto [it, fresh] = slot.emplace(r.key(), out.size());
    if (fresh) {
      out.push_back(std::move(r));
    } else {
      out[it->second] = std::move(r);
    }
  }
  return out;
}

}  // namespace

RecordStore::RecordStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  const fs::path secret_path = dir_ / kSecret;
  if (fs::exists(secret_path)) {
    secret_ = read_file(secret_path);
  } else {
    std::random_device rd;
    std::string raw;
    for (int i = 0; i < 8; ++i) raw += fmt::format("{:08x}", rd());
    write_file_atomic(secret_path, raw);
    secret_ = raw;
  }
  if (secret_.empty()) throw Error("empty token secret in " + secret_path.string());
}

void RecordStore::append(const StoredRecord& record) {
  const std::string line = record.to_json();
  std::lock_guard lock(mutex_);
  append_line(dir_ / kAudit, line);
  append_line(dir_ / kRecords, line);
}

void RecordStore::append_session(const Session& session) {
  std::lock_guard lock(mutex_);
  append_line(dir_ / kSessions, session_to_json(session));
}

std::vector<StoredRecord> RecordStore::effective() const {
  std::lock_guard lock(mutex_);
  return latest_per_key(read_lines<StoredRecord>(dir_ / kRecords, StoredRecord::from_json));
}

std::vector<StoredRecord> RecordStore::audit() const {
  std::lock_guard lock(mutex_);
  return read_lines<StoredRecord>(dir_ / kAudit, StoredRecord::from_json);
}

std::vector<Session> RecordStore::sessions() const {
  std::lock_guard lock(mutex_);
  return read_lines<Session>(dir_ / kSessions, session_from_json);
}

void RecordStore::compact() {
  std::lock_guard lock(mutex_);
  const auto records = latest_per_key(read_lines<StoredRecord>(dir_ / kRecords, StoredRecord::from_json));
  std::string body;
  for (const auto& r : records) body += r.to_json() + "\n";
  write_file_atomic(dir_ / kRecords, body);
}

}  // namespace dogvc::listen
