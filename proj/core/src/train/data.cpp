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
#include <limits>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dogvc/train.hpp"

namespace dogvc::train {

namespace {

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

}  // namespace

TrainingData::TrainingData(const corpus::DomainSet& domains, std::map<std::string, std::vector<Matrix>> items)
    : domains_(domains), items_(std::move(items)) {
  for (const auto& [name, list] : items_) {
    for (const auto& m : list) {
      if (m.rows() == 0) throw Error("empty feature sequence in domain " + name);
      if (feature_dim_ == 0) feature_dim_ = static_cast<int>(m.cols());
      if (m.cols() != feature_dim_) {
        throw Error(fmt::format("feature dimension {} in domain {} differs from {}", m.cols(), name, feature_dim_));
      }
    }
  }
  members_with_data_.resize(static_cast<std::size_t>(domains_.size()));
  log_f0_.resize(static_cast<std::size_t>(domains_.size()));
  stats_.resize(static_cast<std::size_t>(domains_.size()));
  for (int slot = 0; slot < domains_.size(); ++slot) {
    const auto& dom = domains_.at(slot);
    std::vector<dsp::FeatureSequence> seqs;
    for (const auto& member : dom.members) {
      const auto it = items_.find(member);
      if (it == items_.end() || it->second.empty()) continue;
      members_with_data_[slot].push_back(member);
      for (const auto& m : it->second) seqs.push_back(dsp::FeatureSequence{m});
    }
    if (seqs.empty()) {
      spdlog::warn("domain {} has no training clips", dom.name);
      continue;
    }
    active_.push_back(slot);
    stats_[slot] = dsp::fit_norm(seqs, dom.name);
  }
  if (active_.empty()) throw Error("no training data for any domain");
}

TrainingData TrainingData::load(const corpus::Manifest& manifest, const std::filesystem::path& featdir,
                                const corpus::DomainSet& domains, dsp::FeatureKind kind,
                                std::optional<std::uint64_t> expected_hash) {
  std::set<std::string> wanted;
  for (int i = 0; i < domains.size(); ++i) {
    for (const auto& m : domains.at(i).members) wanted.insert(m);
  }
  std::map<std::string, std::vector<Matrix>> items;
  std::map<std::string, std::vector<dsp::F0Track>> tracks;
  for (const auto& clip : manifest.clips) {
    if (!wanted.count(clip.domain)) continue;
    const auto split = manifest.split.find(clip.id);
    if (split != manifest.split.end() && split->second != corpus::Split::train) continue;
    const auto path = dsp::feature_path(featdir, clip.id, kind);
    auto seq = dsp::read_features(path);
    if (seq.kind != kind) {
      throw Error(fmt::format("{} holds {} features, expected {}", path.string(), dsp::to_string(seq.kind),
                              dsp::to_string(kind)));
    }
    if (expected_hash && seq.config_hash != *expected_hash) {
      throw Error(fmt::format("{} was extracted with config {}, expected {}", path.string(), hex64(seq.config_hash),
                              hex64(*expected_hash)));
    }
    items[clip.domain].push_back(std::move(seq.frames));
    const auto f0_path = dsp::feature_path(featdir, clip.id, dsp::FeatureKind::f0);
    if (std::filesystem::exists(f0_path)) tracks[clip.domain].push_back(dsp::f0_from_features(dsp::read_features(f0_path)));
  }
  TrainingData data(domains, std::move(items));
  data.set_f0_tracks(tracks);
  return data;
}

void TrainingData::set_f0_tracks(const std::map<std::string, std::vector<dsp::F0Track>>& tracks) {
  for (int slot = 0; slot < domains_.size(); ++slot) {
    std::vector<dsp::F0Track> all;
    for (const auto& member : domains_.at(slot).members) {
      const auto it = tracks.find(member);
      if (it != tracks.end()) all.insert(all.end(), it->second.begin(), it->second.end());
    }
    log_f0_[static_cast<std::size_t>(slot)] = dsp::fit_log_f0(all);
  }
}

int TrainingData::shortest_item() const {
  int best = std::numeric_limits<int>::max();
  for (const auto& [name, list] : items_) {
    for (const auto& m : list) best = std::min(best, static_cast<int>(m.rows()));
  }
  return best;
}

Batch TrainingData::sample(int size, int frames, std::mt19937_64& rng) const {
  if (size < 1 || frames < 1) throw Error("batch size and crop length must be positive");
  Batch b;
  b.x = nets::Tensor(size, feature_dim_, frames);
  for (int n = 0; n < size; ++n) {
    const int slot = pick(active_, rng);
    const auto& member = pick(members_with_data_[slot], rng);
    const Matrix& m = pick(items_.at(member), rng);
    const int len = static_cast<int>(m.rows());
    std::uniform_int_distribution<int> start_dist(0, std::max(0, len - frames));
    const int start = start_dist(rng);
    const auto& st = stats_[slot];
    for (int t = 0; t < frames; ++t) {
      const int row = (start + t) % len;
      for (int f = 0; f < feature_dim_; ++f) b.x(n, f, t) = (m(row, f) - st.mean(f)) / st.std(f);
    }
    b.labels.push_back(slot);
  }
  return b;
}

std::vector<int> TrainingData::other_labels(const std::vector<int>& labels, std::mt19937_64& rng) const {
  std::vector<int> out;
  for (int l : labels) {
    if (active_.size() < 2) {
      out.push_back(l);
      continue;
    }
    std::vector<int> choices;
    for (int s : active_) {
      if (s != l) choices.push_back(s);
    }
    out.push_back(pick(choices, rng));
  }
  return out;
}

std::vector<Matrix> TrainingData::normalized_items(int slot) const {
  std::vector<Matrix> out;
  const auto& st = stats_.at(static_cast<std::size_t>(slot));
  for (const auto& member : members_with_data_.at(static_cast<std::size_t>(slot))) {
    for (const auto& m : items_.at(member)) {
      Matrix x = m;
      for (Eigen::Index t = 0; t < x.rows(); ++t) {
        x.row(t) = ((x.row(t).transpose() - st.mean).array() / st.std.array()).matrix().transpose();
      }
      out.push_back(std::move(x));
    }
  }
  return out;
}

}  // namespace dogvc::train
