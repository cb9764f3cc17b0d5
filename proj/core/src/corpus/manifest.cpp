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
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dogvc/corpus.hpp"

namespace dogvc::corpus {

std::string to_string(Split s) { return s == Split::train ? "train" : "eval"; }

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "eval") return Split::eval;
  throw Error("unknown split '" + s + "'");
}

void Manifest::validate() const {
  std::set<std::string> ids;
  for (const auto& c : clips) {
    if (!ids.insert(c.id).second) throw Error("duplicate clip id " + c.id);
    if (!split.contains(c.id)) throw Error("clip " + c.id + " has no split assignment");
    if (c.duration <= 0.0) throw Error("clip " + c.id + " has non-positive duration");
    if (c.sample_rate <= 0) throw Error("clip " + c.id + " has non-positive sample rate");
  }
}

std::vector<AudioClip> Manifest::clips_in(const std::string& domain, std::optional<Split> which) const {
  std::vector<AudioClip> out;
  for (const auto& c : clips) {
    if (c.domain != domain) continue;
    if (which) {
      auto it = split.find(c.id);
      if (it == split.end() || it->second != *which) continue;
    }
    out.push_back(c);
  }
  return out;
}

const AudioClip& Manifest::find(const std::string& id) const {
  for (const auto& c : clips) {
    if (c.id == id) return c;
  }
  throw Error("clip " + id + " not in manifest");
}

std::string to_jsonl(const Manifest& m) {
  std::ostringstream out;
  nlohmann::ordered_json header;
  header["format"] = "dogvc-manifest";
  header["version"] = 1;
  header["seed"] = m.seed;
  header["config_hash"] = m.config_hash;
  out << header.dump() << '\n';
  for (const auto& c : m.clips) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["domain"] = c.domain;
    j["path"] = c.path.generic_string();
    j["sample_rate"] = c.sample_rate;
    j["duration"] = c.duration;
    j["source"] = c.source;
    j["license"] = c.license_tag;
    auto it = m.split.find(c.id);
    j["split"] = it == m.split.end() ? "train" : to_string(it->second);
    out << j.dump() << '\n';
  }
  return out.str();
}

Manifest parse_jsonl(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (!header_seen && j.contains("format")) {
      if (j.at("format") != "dogvc-manifest") throw Error("not a dogvc manifest");
      m.seed = j.value("seed", std::uint64_t{0});
      m.config_hash = j.value("config_hash", std::string{});
      header_seen = true;
      continue;
    }
    AudioClip c;
    c.id = j.at("id").get<std::string>();
    c.domain = j.at("domain").get<std::string>();
    c.path = j.at("path").get<std::string>();
    c.sample_rate = j.at("sample_rate").get<int>();
    c.duration = j.at("duration").get<double>();
    c.source = j.value("source", std::string{});
    c.license_tag = j.value("license", std::string{});
    m.split[c.id] = parse_split(j.value("split", std::string{"train"}));
    m.clips.push_back(std::move(c));
  }
  m.validate();
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  write_file_atomic(path, to_jsonl(m));
}

Manifest read_manifest(const std::filesystem::path& path) { return parse_jsonl(read_file(path)); }

Manifest make_split(const Manifest& manifest, int n_eval, std::uint64_t seed) {
  if (n_eval < 0) throw Error("make_split: n_eval must be >= 0");
  Manifest out = manifest;
  out.seed = seed;
  out.split.clear();
  std::map<std::string, std::vector<std::string>> by_domain;
  for (const auto& c : manifest.clips) by_domain[c.domain].push_back(c.id);
  for (auto& [domain, ids] : by_domain) {
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(seed ^ hash64(domain));
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(n_eval), ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.split[ids[i]] = i < n ? Split::eval : Split::train;
  }
  return out;
}

}  // namespace dogvc::corpus
