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

#include <chrono>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dogvc/listen.hpp"

namespace dogvc::listen {

namespace fs = std::filesystem;

namespace {

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ListeningService::ListeningService(fs::path records_dir, std::size_t compact_every)
    : store_(std::move(records_dir)), compact_every_(compact_every) {}

void ListeningService::add_experiment(const fs::path& experiment_file) {
  add_experiment(eval::ListeningExperiment::from_json(read_file(experiment_file)), experiment_file.parent_path());
}

void ListeningService::add_experiment(eval::ListeningExperiment experiment, const fs::path& base_dir) {
  LoadedExperiment loaded;
  for (const auto& clip : experiment.clips) {
    const fs::path p = base_dir / clip.path;
    if (!fs::is_regular_file(p)) throw Error(fmt::format("clip {} missing: {}", clip.id, p.string()));
    loaded.clip_hash[clip.id] = sha256_hex(read_file(p));
  }
  loaded.base_dir = base_dir;
  const std::string id = experiment.id;
  loaded.experiment = std::move(experiment);

  std::unique_lock lock(mutex_);
  if (experiments_.count(id)) throw Error("experiment " + id + " loaded twice");
  const auto& exp = experiments_.emplace(id, std::move(loaded)).first->second;
  // Sessions from a previous run keep their tokens.
  std::size_t restored = 0;
  for (const auto& s : store_.sessions()) {
    if (s.experiment != id || sessions_.count(s.id)) continue;
    register_session(build_session(s.rater, exp, s.seed));
    ++restored;
  }
  spdlog::info("experiment {}: {} clips, {} sessions restored", id, exp.experiment.clips.size(), restored);
}

Session ListeningService::build_session(const std::string& rater, const LoadedExperiment& exp,
                                        std::uint64_t seed) const {
  Session s;
  s.rater = rater;
  s.experiment = exp.experiment.id;
  s.seed = seed;
  s.id = sha256_hex(fmt::format("session\n{}\n{}\n{}\n{}", store_.secret(), rater, s.experiment, seed))
             .substr(0, 24);
  s.clips = latin_square_order(exp.experiment, rater, seed);
  for (const auto& clip : s.clips) {
    const std::string token = sha256_hex(fmt::format("clip\n{}\n{}\n{}", store_.secret(), s.id, clip)).substr(0, 32);
    s.playlist.push_back({token, exp.experiment.find(clip).reference_text});
  }
  return s;
}

void ListeningService::register_session(const Session& s) {
  for (std::size_t i = 0; i < s.clips.size(); ++i) tokens_[s.playlist[i].token] = {s.id, s.clips[i]};
  sessions_[s.id] = s;
}

Session ListeningService::create_session(const std::string& rater, const std::string& experiment,
                                         std::uint64_t seed) {
  if (rater.empty()) throw ServiceError(400, "rater id required");
  std::unique_lock lock(mutex_);
  const auto it = experiments_.find(experiment);
  if (it == experiments_.end()) throw ServiceError(404, "unknown experiment");
  if (it->second.experiment.clips.empty()) throw ServiceError(404, "experiment has no clips");
  Session s = build_session(rater, it->second, seed);
  if (const auto existing = sessions_.find(s.id); existing != sessions_.end()) return existing->second;
  store_.append_session(s);
  register_session(s);
  return s;
}

std::string ListeningService::clip_bytes(const std::string& token) const {
  std::shared_lock lock(mutex_);
  const auto t = tokens_.find(token);
  if (t == tokens_.end()) throw ServiceError(403, "unknown clip token");
  const auto& exp = experiments_.at(sessions_.at(t->second.session).experiment);
  std::string bytes = read_file(exp.base_dir / exp.experiment.find(t->second.clip).path);
  if (sha256_hex(bytes) != exp.clip_hash.at(t->second.clip)) {
    spdlog::error("clip {} changed on disk since the experiment was loaded", t->second.clip);
    throw ServiceError(500, "clip unavailable");
  }
  return bytes;
}

const ListeningService::TokenTarget& ListeningService::check_token(const std::string& session,
                                                                   const std::string& token) const {
  const auto t = tokens_.find(token);
  if (t == tokens_.end() || t->second.session != session) throw ServiceError(403, "token not in session");
  return t->second;
}

void ListeningService::submit_rating(const std::string& session, const std::string& token, const std::string& scale,
                                     int score) {
  StoredRecord rec;
  {
    std::shared_lock lock(mutex_);
    const auto& target = check_token(session, token);
    eval::RatingRecord r;
    try {
      r.scale = eval::parse_scale(scale);
    } catch (const Error&) {
      throw ServiceError(422, "unknown scale");
    }
    if (score < 1 || score > 5) throw ServiceError(422, "score must be an integer from 1 to 5");
    const auto& s = sessions_.at(session);
    r.rater = s.rater;
    r.clip = target.clip;
    r.score = score;
    r.timestamp = now_seconds();
    rec = {session, token, s.experiment, r, std::nullopt};
  }
  store_.append(rec);
  after_append();
}

void ListeningService::submit_transcript(const std::string& session, const std::string& token,
                                         const std::string& text) {
  StoredRecord rec;
  {
    std::shared_lock lock(mutex_);
    const auto& target = check_token(session, token);
    const auto& s = sessions_.at(session);
    eval::TranscriptRecord t;
    t.rater = s.rater;
    t.clip = target.clip;
    t.text = text;
    t.reference_id = target.clip;
    t.timestamp = now_seconds();
    rec = {session, token, s.experiment, std::nullopt, t};
  }
  store_.append(rec);
  after_append();
}

void ListeningService::after_append() {
  if (compact_every_ == 0) return;
  bool due = false;
  {
    std::unique_lock lock(mutex_);
    due = ++appended_ % compact_every_ == 0;
  }
  if (due) store_.compact();
}

ExperimentResults ListeningService::results(const std::string& experiment) const {
  ExperimentResults out;
  out.experiment = experiment;
  std::shared_lock lock(mutex_);
  const auto it = experiments_.find(experiment);
  if (it == experiments_.end()) throw ServiceError(404, "unknown experiment");
  const auto& exp = it->second.experiment;
  // Always recomputed from the persisted log.
  std::vector<eval::RatingRecord> ratings;
  std::vector<eval::TranscriptRecord> transcripts;
  for (const auto& r : store_.effective()) {
    if (r.experiment != experiment) continue;
    if (r.rating) ratings.push_back(*r.rating);
    if (r.transcript) transcripts.push_back(*r.transcript);
  }
  out.ratings = ratings.size();
  out.transcripts = transcripts.size();
  out.mos = eval::aggregate_mos(ratings, [&](const eval::RatingRecord& r) { return exp.find(r.clip).condition; });
  out.cer = eval::aggregate_cer(exp, transcripts);
  return out;
}

}  // namespace dogvc::listen
