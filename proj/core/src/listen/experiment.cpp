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

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "dogvc/listen.hpp"

namespace dogvc::listen {

using nlohmann::json;
using nlohmann::ordered_json;

std::string StoredRecord::key() const {
  const std::string what = rating ? eval::to_string(rating->scale) : std::string("transcript");
  return session + "/" + token + "/" + what;
}

std::string StoredRecord::to_json() const {
  ordered_json j;
  j["session"] = session;
  j["token"] = token;
  j["experiment"] = experiment;
  if (rating) j["rating"] = json::parse(rating->to_json());
  if (transcript) j["transcript"] = json::parse(transcript->to_json());
  return j.dump();
}

StoredRecord StoredRecord::from_json(const std::string& line) {
  StoredRecord r;
  try {
    const auto j = json::parse(line);
    r.session = j.at("session").get<std::string>();
    r.token = j.at("token").get<std::string>();
    r.experiment = j.at("experiment").get<std::string>();
    if (j.contains("rating")) r.rating = eval::RatingRecord::from_json(j["rating"].dump());
    if (j.contains("transcript")) r.transcript = eval::TranscriptRecord::from_json(j["transcript"].dump());
  } catch (const json::exception& e) {
    throw Error(std::string("stored record: ") + e.what());
  }
  if (r.rating.has_value() == r.transcript.has_value()) {
    throw Error("stored record must hold exactly one of rating or transcript");
  }
  return r;
}

std::vector<std::string> latin_square_order(const eval::ListeningExperiment& experiment, const std::string& rater,
                                            std::uint64_t seed) {
  const auto conditions = experiment.conditions();
  if (conditions.empty()) return {};
  std::mt19937_64 rng(seed ^ hash64(rater));
  std::vector<std::vector<std::string>> groups;
  for (const auto& c : conditions) {
    std::vector<std::string> ids;
    for (const auto& clip : experiment.clips) {
      if (clip.condition == c) ids.push_back(clip.id);
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    groups.push_back(std::move(ids));
  }
  // Row r of the cyclic square starts at condition r.
  const std::size_t c = groups.size();
  const std::size_t row = static_cast<std::size_t>((seed + hash64(rater)) % c);
  std::vector<std::string> order;
  for (std::size_t round = 0; order.size() < experiment.clips.size(); ++round) {
    for (std::size_t i = 0; i < c; ++i) {
      const auto& g = groups[(row + i) % c];
      if (round < g.size()) order.push_back(g[round]);
    }
  }
  return order;
}

std::string ExperimentResults::to_json() const {
  ordered_json j;
  j["experiment"] = experiment;
  j["ratings"] = ratings;
  j["transcripts"] = transcripts;
  j["mos"] = json::array();
  for (const auto& [key, m] : mos) {
    ordered_json row;
    row["condition"] = key.first;
    row["scale"] = eval::to_string(key.second);
    row["mean"] = m.mean;
    row["sd"] = m.sd;
    row["ci95"] = m.ci95;
    row["n"] = m.n;
    j["mos"].push_back(row);
  }
  j["cer"] = json::array();
  for (const auto& [key, v] : cer) {
    ordered_json row;
    row["condition"] = key.first;
    row["sentence"] = key.second;
    row["cer"] = v;
    j["cer"].push_back(row);
  }
  return j.dump();
}

}  // namespace dogvc::listen
