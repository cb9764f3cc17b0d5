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
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "dogvc/corpus.hpp"

namespace dogvc::corpus {

namespace fs = std::filesystem;

Vector DomainLabel::onehot() const {
  Vector v = Vector::Zero(num_domains);
  v(index) = 1.0;
  return v;
}

DomainSet::DomainSet(std::vector<Domain> domains) : domains_(std::move(domains)) {
  std::set<std::string> seen;
  for (const auto& d : domains_) {
    if (d.name.empty()) throw Error("domain name must not be empty");
    if (d.members.empty()) throw Error("domain '" + d.name + "' has no members");
    if (!seen.insert(d.name).second) throw Error("duplicate domain '" + d.name + "'");
  }
}

DomainSet DomainSet::default_six() {
  return DomainSet({{"FKN", {"FKN"}},
                    {"MMY", {"MMY"}},
                    {"people", {"FKN", "FTK", "MMY", "MTK"}},
                    {"adult_dog", {"adult_dog"}},
                    {"puppy", {"puppy"}},
                    {"dogs", {"adult_dog", "puppy"}}});
}

DomainSet DomainSet::atomic(const std::vector<std::string>& names) {
  std::vector<Domain> d;
  for (const auto& n : names) d.push_back({n, {n}});
  return DomainSet(std::move(d));
}

DomainSet DomainSet::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<Domain> d;
  for (const auto& item : j) {
    Domain dom;
    dom.name = item.at("name").get<std::string>();
    dom.members = item.contains("members") ? item.at("members").get<std::vector<std::string>>()
                                           : std::vector<std::string>{dom.name};
    d.push_back(std::move(dom));
  }
  return DomainSet(std::move(d));
}

std::string DomainSet::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& d : domains_) j.push_back({{"name", d.name}, {"members", d.members}});
  return j.dump();
}

bool DomainSet::contains(const std::string& name) const {
  return std::any_of(domains_.begin(), domains_.end(), [&](const Domain& d) { return d.name == name; });
}

int DomainSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    if (domains_[i].name == name) return static_cast<int>(i);
  }
  throw Error("unknown domain '" + name + "'");
}

DomainLabel DomainSet::label(const std::string& name) const { return label(index_of(name)); }

DomainLabel DomainSet::label(int index) const {
  if (index < 0 || index >= size()) throw Error("domain index out of range");
  return {index, domains_[static_cast<std::size_t>(index)].name, size()};
}

std::vector<std::string> DomainSet::names() const {
  std::vector<std::string> out;
  for (const auto& d : domains_) out.push_back(d.name);
  return out;
}

std::string clip_id(const std::string& domain, std::string_view file_bytes) {
  return domain + "-" + sha256_hex(file_bytes).substr(0, 16);
}

IngestResult ingest_directory(const fs::path& root, const std::string& domain, const IngestOptions& opts) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error("cannot read directory " + root.string());
  std::vector<fs::path> files;
  fs::recursive_directory_iterator it(root, ec);
  if (ec) throw Error("cannot read directory " + root.string() + ": " + ec.message());
  for (const auto& entry : it) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  IngestResult result;
  std::set<std::string> ids;
  for (const auto& file : files) {
    auto ext = file.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".wav") {
      result.skipped.push_back({file, "not audio"});
      spdlog::warn("ingest: skipping non-audio file {}", file.string());
      continue;
    }
    try {
      const std::string bytes = read_file(file);
      auto wave = dsp::decode_wav(bytes);
      wave.validate();
      AudioClip clip;
      clip.id = clip_id(domain, bytes);
      if (!ids.insert(clip.id).second) {
        result.skipped.push_back({file, "duplicate content"});
        continue;
      }
      clip.domain = domain;
      clip.path = file;
      clip.sample_rate = wave.sample_rate;
      clip.duration = wave.duration();
      clip.source = opts.source.empty() ? fs::relative(file, root).generic_string() : opts.source;
      clip.license_tag = opts.license_tag;
      if (wave.sample_rate != opts.project_rate && opts.resampled_dir) {
        auto resampled = dsp::resample(wave, opts.project_rate);
        clip.path = *opts.resampled_dir / (clip.id + ".wav");
        dsp::write_wav(clip.path, resampled);
        clip.sample_rate = resampled.sample_rate;
        clip.duration = resampled.duration();
      }
      result.clips.push_back(std::move(clip));
    } catch (const std::exception& e) {
      result.skipped.push_back({file, std::string("undecodable: ") + e.what()});
      spdlog::warn("ingest: skipping {}: {}", file.string(), e.what());
    }
  }
  return result;
}

dsp::Waveform load_clip(const AudioClip& clip, int project_rate) {
  auto w = dsp::read_wav(clip.path);
  if (w.sample_rate != project_rate) w = dsp::resample(w, project_rate);
  return w;
}

AudioLoader disk_loader(int project_rate) {
  return [project_rate](const AudioClip& c) { return load_clip(c, project_rate); };
}

}  // namespace dogvc::corpus
