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

#include "dogvc/dsp/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <spdlog/spdlog.h>

namespace dogvc::dsp {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::melspec:
      return "melspec";
    case FeatureKind::mcc:
      return "mcc";
    case FeatureKind::f0:
      return "f0";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(const std::string& name) {
  if (name == "melspec") return FeatureKind::melspec;
  if (name == "mcc") return FeatureKind::mcc;
  if (name == "f0") return FeatureKind::f0;
  throw Error("unknown feature kind '" + name + "'");
}

namespace {

static_assert(std::endian::native == std::endian::little, "feature files assume a little-endian host");

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

}  // namespace

std::string encode_features(const FeatureSequence& seq) {
  std::string out;
  out.reserve(kFeatureHeaderBytes + 4 * seq.frames.size());
  out += "DVFT";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.frames.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.frames.cols()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(std::lround(seq.frame_hop * 1e6)));
  put<std::uint64_t>(out, seq.config_hash);
  put<float>(out, static_cast<float>(seq.alpha));
  for (Eigen::Index t = 0; t < seq.frames.rows(); ++t) {
    for (Eigen::Index f = 0; f < seq.frames.cols(); ++f) {
      put<float>(out, static_cast<float>(seq.frames(t, f)));
    }
  }
  return out;
}

FeatureSequence decode_features(std::string_view bytes) {
  if (bytes.size() < kFeatureHeaderBytes || bytes.substr(0, 4) != "DVFT") {
    throw Error("not a feature file");
  }
  FeatureSequence seq;
  const auto kind = get<std::uint32_t>(bytes, 4);
  if (kind < 1 || kind > 3) throw Error("feature file has unknown kind");
  seq.kind = static_cast<FeatureKind>(kind);
  const auto rows = get<std::uint32_t>(bytes, 8);
  const auto cols = get<std::uint32_t>(bytes, 12);
  seq.frame_hop = get<std::uint32_t>(bytes, 16) * 1e-6;
  seq.config_hash = get<std::uint64_t>(bytes, 20);
  seq.alpha = get<float>(bytes, 28);
  const std::size_t expected = kFeatureHeaderBytes + std::size_t{4} * rows * cols;
  if (bytes.size() != expected) throw Error("feature file size does not match header");
  seq.frames.resize(rows, cols);
  std::size_t off = kFeatureHeaderBytes;
  for (std::uint32_t t = 0; t < rows; ++t) {
    for (std::uint32_t f = 0; f < cols; ++f, off += 4) seq.frames(t, f) = get<float>(bytes, off);
  }
  return seq;
}

void write_features(const std::filesystem::path& path, const FeatureSequence& seq) {
  write_file_atomic(path, encode_features(seq));
}

FeatureSequence read_features(const std::filesystem::path& path) {
  return decode_features(read_file(path));
}

NormStats fit_norm(std::span<const FeatureSequence> data, const std::string& domain,
                   std::vector<int>* floored) {
  if (data.empty()) throw Error("fit_norm: no data");
  const int dim = data.front().dim();
  Vector sum = Vector::Zero(dim), sq = Vector::Zero(dim);
  double count = 0;
  for (const auto& seq : data) {
    if (seq.dim() != dim) throw Error("fit_norm: feature dimensions disagree");
    for (Eigen::Index t = 0; t < seq.frames.rows(); ++t) {
      const Vector row = seq.frames.row(t).transpose();
      sum += row;
      sq += row.cwiseAbs2();
      count += 1;
    }
  }
  if (count == 0) throw Error("fit_norm: no frames");
  NormStats stats;
  stats.domain = domain;
  stats.mean = sum / count;
  stats.std = (sq / count - stats.mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  for (int d = 0; d < dim; ++d) {
    if (stats.std(d) < kNormEpsilon) {
      spdlog::warn("fit_norm[{}]: dimension {} has zero spread; flooring std", domain, d);
      stats.std(d) = kNormEpsilon;
      if (floored) floored->push_back(d);
    }
  }
  return stats;
}

namespace {
void check_dims(const NormStats& stats, const FeatureSequence& x) {
  if (stats.mean.size() != x.dim() || stats.std.size() != x.dim()) {
    throw Error("normalization stats dimension " + std::to_string(stats.mean.size()) +
                " does not match features " + std::to_string(x.dim()));
  }
}
}  // namespace

FeatureSequence apply_norm(const NormStats& stats, const FeatureSequence& x) {
  check_dims(stats, x);
  FeatureSequence out = x;
  out.frames = (x.frames.rowwise() - stats.mean.transpose()).array().rowwise() /
               stats.std.transpose().array();
  return out;
}

FeatureSequence invert_norm(const NormStats& stats, const FeatureSequence& x) {
  check_dims(stats, x);
  FeatureSequence out = x;
  out.frames = (x.frames.array().rowwise() * stats.std.transpose().array()).matrix().rowwise() +
               stats.mean.transpose();
  return out;
}

std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& clip_id, FeatureKind kind) {
  return dir / (clip_id + "." + to_string(kind) + ".feat");
}

}  // namespace dogvc::dsp
