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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dogvc/common.hpp"

namespace dogvc::dsp {

enum class FeatureKind : std::uint32_t { melspec = 1, mcc = 2, f0 = 3 };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& name);

/// Time-major feature matrix: one row per analysis frame.
struct FeatureSequence {
  Matrix frames;  // T x F
  FeatureKind kind = FeatureKind::melspec;
  double frame_hop = 0.008;     // seconds
  std::uint64_t config_hash = 0;
  double alpha = 0.0;           // frequency-warping factor, mcc only

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

// Binary feature file: 32-byte little-endian header
//   0  magic "DVFT"
//   4  u32 kind
//   8  u32 T
//  12  u32 F
//  16  u32 hop in microseconds
//  20  u64 extraction config hash
//  28  f32 warping factor (mcc), 0 otherwise
// followed by T*F row-major float32 values.
inline constexpr std::size_t kFeatureHeaderBytes = 32;

std::string encode_features(const FeatureSequence& seq);
FeatureSequence decode_features(std::string_view bytes);
void write_features(const std::filesystem::path& path, const FeatureSequence& seq);
FeatureSequence read_features(const std::filesystem::path& path);

/// `<dir>/<clip_id>.<kind>.feat`
std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& clip_id, FeatureKind kind);
/// Extraction settings stored next to the feature files.
inline constexpr const char* kAnalysisFileName = "analysis.json";

struct NormStats {
  Vector mean;
  Vector std;
  std::string domain = "global";
};

inline constexpr double kNormEpsilon = 1e-8;

/// Per-dimension mean and (population) standard deviation over all frames.
/// Dimensions with zero spread are floored at kNormEpsilon; their indices are
/// reported through `floored` when given.
NormStats fit_norm(std::span<const FeatureSequence> data, const std::string& domain = "global",
                   std::vector<int>* floored = nullptr);
FeatureSequence apply_norm(const NormStats& stats, const FeatureSequence& x);
FeatureSequence invert_norm(const NormStats& stats, const FeatureSequence& x);

}  // namespace dogvc::dsp
