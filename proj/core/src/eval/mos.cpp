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
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dogvc/eval.hpp"

namespace dogvc::eval {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(MosScale s) {
  switch (s) {
    case MosScale::dog_likeness: return "dog_likeness";
    case MosScale::sound_quality: return "sound_quality";
    case MosScale::clarity: return "clarity";
  }
  return "?";
}

MosScale parse_scale(const std::string& s) {
  for (MosScale m : kAllScales) {
    if (to_string(m) == s) return m;
  }
  throw Error("unknown MOS scale '" + s + "'");
}

void RatingRecord::validate() const {
  if (score < 1 || score > 5) throw Error(fmt::format("score {} outside 1..5", score));
  if (rater.empty()) throw Error("rating without rater");
  if (clip.empty()) throw Error("rating without clip");
}

std::string RatingRecord::to_json() const {
  ordered_json j;
  j["rater"] = rater;
  j["clip"] = clip;
  j["scale"] = to_string(scale);
  j["score"] = score;
  j["timestamp"] = timestamp;
  return j.dump();
}

RatingRecord RatingRecord::from_json(const std::string& line) {
  RatingRecord r;
  try {
    const auto j = json::parse(line);
    r.rater = j.at("rater").get<std::string>();
    r.clip = j.at("clip").get<std::string>();
    r.scale = parse_scale(j.at("scale").get<std::string>());
    r.score = j.at("score").get<int>();
    r.timestamp = j.value("timestamp", std::int64_t{0});
  } catch (const json::exception& e) {
    throw Error(std::string("rating record: ") + e.what());
  }
  r.validate();
  return r;
}

std::string TranscriptRecord::to_json() const {
  ordered_json j;
  j["rater"] = rater;
  j["clip"] = clip;
  j["text"] = text;
  j["reference_id"] = reference_id;
  j["timestamp"] = timestamp;
  return j.dump();
}

TranscriptRecord TranscriptRecord::from_json(const std::string& line) {
  TranscriptRecord t;
  try {
    const auto j = json::parse(line);
    t.rater = j.at("rater").get<std::string>();
    t.clip = j.at("clip").get<std::string>();
    t.text = j.at("text").get<std::string>();
    t.reference_id = j.value("reference_id", std::string());
    t.timestamp = j.value("timestamp", std::int64_t{0});
  } catch (const json::exception& e) {
    throw Error(std::string("transcript record: ") + e.what());
  }
  return t;
}

MosTable aggregate_mos(const std::vector<RatingRecord>& ratings,
                       const std::function<std::string(const RatingRecord&)>& group_of) {
  struct Acc {
    double sum = 0.0;
    double sq = 0.0;
    int n = 0;
  };
  std::map<std::pair<std::string, MosScale>, Acc> acc;
  for (const auto& r : ratings) {
    r.validate();
    auto& a = acc[{group_of(r), r.scale}];
    a.sum += r.score;
    a.sq += static_cast<double>(r.score) * r.score;
    ++a.n;
  }
  MosTable out;
  for (const auto& [key, a] : acc) {
    MosSummary s;
    s.n = a.n;
    s.mean = a.sum / a.n;
    if (a.n > 1) s.sd = std::sqrt(std::max(0.0, (a.sq - a.n * s.mean * s.mean) / (a.n - 1)));
    s.ci95 = 1.96 * s.sd / std::sqrt(static_cast<double>(a.n));
    out[key] = s;
  }
  return out;
}

std::vector<std::string> ListeningExperiment::conditions() const {
  std::set<std::string> s;
  for (const auto& c : clips) s.insert(c.condition);
  return {s.begin(), s.end()};
}

const ListeningClip& ListeningExperiment::find(const std::string& clip_id) const {
  for (const auto& c : clips) {
    if (c.id == clip_id) return c;
  }
  throw Error("experiment " + id + " has no clip " + clip_id);
}

std::string ListeningExperiment::to_json() const {
  ordered_json j;
  j["id"] = id;
  j["clips"] = ordered_json::array();
  for (const auto& c : clips) {
    ordered_json cj;
    cj["id"] = c.id;
    cj["path"] = c.path.generic_string();
    cj["condition"] = c.condition;
    cj["reference_text"] = c.reference_text;
    cj["sentence"] = c.sentence;
    j["clips"].push_back(cj);
  }
  return j.dump(2);
}

ListeningExperiment ListeningExperiment::from_json(const std::string& text) {
  ListeningExperiment e;
  try {
    const auto j = json::parse(text);
    e.id = j.at("id").get<std::string>();
    std::set<std::string> seen;
    for (const auto& cj : j.at("clips")) {
      ListeningClip c;
      c.id = cj.at("id").get<std::string>();
      c.path = cj.at("path").get<std::string>();
      c.condition = cj.at("condition").get<std::string>();
      c.reference_text = cj.value("reference_text", std::string());
      c.sentence = cj.value("sentence", 0);
      if (!seen.insert(c.id).second) throw Error("duplicate clip id " + c.id);
      e.clips.push_back(std::move(c));
    }
  } catch (const json::exception& ex) {
    throw Error(std::string("experiment definition: ") + ex.what());
  }
  if (e.id.empty()) throw Error("experiment definition: empty id");
  return e;
}

std::map<std::pair<std::string, int>, double> aggregate_cer(const ListeningExperiment& exp,
                                                            const std::vector<TranscriptRecord>& transcripts,
                                                            const TextNormalization& norm) {
  std::map<std::pair<std::string, int>, std::pair<double, int>> acc;
  for (const auto& t : transcripts) {
    const auto& clip = exp.find(t.clip);
    if (normalize_text(clip.reference_text, norm).empty()) continue;
    auto& a = acc[{clip.condition, clip.sentence}];
    a.first += cer(clip.reference_text, t.text, norm);
    ++a.second;
  }
  std::map<std::pair<std::string, int>, double> out;
  for (const auto& [k, a] : acc) out[k] = a.first / a.second;
  return out;
}

}  // namespace dogvc::eval
