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

#pragma once

// Blinded listening-test service: sessions, clip delivery, rating and
// transcript collection, and de-blinded aggregation.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dogvc/common.hpp"
#include "dogvc/eval.hpp"

namespace dogvc::listen {

/// Error carrying the HTTP status it maps to.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct PlaylistEntry {
  std::string token;
  std::string text;  // written reference for the clarity question, may be empty
};

struct Session {
  std::string id;
  std::string rater;
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<std::string> clips;  // de-blinded clip ids, playlist order
  std::vector<PlaylistEntry> playlist;
};

/// One persisted submission. Ratings carry a scale, transcripts do not.
struct StoredRecord {
  std::string session;
  std::string token;
  std::string experiment;
  std::optional<eval::RatingRecord> rating;
  std::optional<eval::TranscriptRecord> transcript;

  /// (session, token, scale or "transcript"): later records replace earlier ones.
  std::string key() const;
  std::string to_json() const;
  static StoredRecord from_json(const std::string& line);
};

/// Append-only JSONL log. Every submission goes to both `records.jsonl` and
/// `audit.jsonl`; compaction rewrites `records.jsonl` to the effective set
/// and leaves the audit trail untouched.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path dir);

  void append(const StoredRecord& record);
  void append_session(const Session& session);

  /// Last record per key, in first-submission order, read from disk.
  std::vector<StoredRecord> effective() const;
  std::vector<StoredRecord> audit() const;
  std::vector<Session> sessions() const;
  void compact();

  /// Persistent secret used to derive clip tokens.
  const std::string& secret() const { return secret_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string secret_;
  mutable std::mutex mutex_;
};

struct ExperimentResults {
  std::string experiment;
  eval::MosTable mos;
  std::map<std::pair<std::string, int>, double> cer;
  std::size_t ratings = 0;
  std::size_t transcripts = 0;

  std::string to_json() const;
};

class ListeningService {
 public:
  explicit ListeningService(std::filesystem::path records_dir, std::size_t compact_every = 256);

  /// Loads `experiment.json`; clip paths resolve against its directory.
  void add_experiment(const std::filesystem::path& experiment_file);
  void add_experiment(eval::ListeningExperiment experiment, const std::filesystem::path& base_dir);

  Session create_session(const std::string& rater, const std::string& experiment, std::uint64_t seed);
  std::string clip_bytes(const std::string& token) const;
  void submit_rating(const std::string& session, const std::string& token, const std::string& scale, int score);
  void submit_transcript(const std::string& session, const std::string& token, const std::string& text);
  ExperimentResults results(const std::string& experiment) const;

  RecordStore& store() { return store_; }

 private:
  struct LoadedExperiment {
    eval::ListeningExperiment experiment;
    std::filesystem::path base_dir;
    std::map<std::string, std::string> clip_hash;  // clip id -> sha256 of the file
  };
  struct TokenTarget {
    std::string session;
    std::string clip;
  };

  Session build_session(const std::string& rater, const LoadedExperiment& exp, std::uint64_t seed) const;
  void register_session(const Session& s);
  const TokenTarget& check_token(const std::string& session, const std::string& token) const;
  void after_append();

  RecordStore store_;
  std::size_t compact_every_;
  std::size_t appended_ = 0;
  std::map<std::string, LoadedExperiment> experiments_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, TokenTarget> tokens_;
  mutable std::shared_mutex mutex_;
};

/// Builds the playlist order: conditions interleave round-robin with the
/// starting condition rotated per rater (a Latin square over raters), and
/// clips within a condition are shuffled by the seed.
std::vector<std::string> latin_square_order(const eval::ListeningExperiment& experiment, const std::string& rater,
                                            std::uint64_t seed);

/// HTTP front end. `listen(port)` blocks; port 0 picks a free port.
class HttpServer {
 public:
  explicit HttpServer(ListeningService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and returns the port; then call `run()` to serve.
  int bind(const std::string& host, int port);
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dogvc::listen
