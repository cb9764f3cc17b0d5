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

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "dogvc/common.hpp"

namespace dogvc::nets {

enum class LayerKind { conv, deconv };
enum class Norm { none, batch };
enum class Activation { none, glu, sigmoid };

/// Channel count as written in an architecture file: a literal or one of the
/// symbols F (feature dimension), Z (latent dimension), D (number of domains).
struct ChannelSpec {
  int value = 1;
  char symbol = 0;

  int resolve(int feature_dim, int latent_dim, int num_domains) const;
};

struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  int kernel = 1;
  ChannelSpec channels;
  int stride = 1;
  Norm norm = Norm::none;
  Activation activation = Activation::none;
  bool same_padding = false;
  bool kernel_tunable = false;  // `k=3*`: follows the kernel delta

  void validate() const;
  std::string to_string() const;
};

enum class Role { generator, discriminator, classifier, encoder, decoder, aux_classifier };
inline constexpr std::array<Role, 6> kAllRoles = {Role::generator, Role::discriminator,  Role::classifier,
                                                  Role::encoder,   Role::decoder,        Role::aux_classifier};
std::string to_string(Role r);
Role parse_role(const std::string& s);

struct NetworkConfig {
  std::array<std::vector<LayerSpec>, kAllRoles.size()> base_specs;
  int kernel_delta = 0;
  int num_domains = 6;
  int latent_dim = 8;
  bool delta_on_generator = false;

  const std::vector<LayerSpec>& specs(Role r) const { return base_specs[static_cast<std::size_t>(r)]; }
  std::vector<LayerSpec>& specs(Role r) { return base_specs[static_cast<std::size_t>(r)]; }

  void validate() const;
  /// Canonical text form; parse_architecture(to_text()) round-trips.
  std::string to_text() const;
  std::uint64_t hash(int feature_dim) const;
};

/// Parses the declarative architecture format:
///
///   set latent=8
///   [discriminator]
///   conv k=3* c=32 s=2 norm=batch act=glu pad=valid
///
/// Lines starting with '#' are comments.
NetworkConfig parse_architecture(const std::string& text);
NetworkConfig load_architecture(const std::filesystem::path& path);

/// Applies `delta` to the tunable time kernels of the discriminator and the
/// classifier (and the generator when `delta_on_generator` is set).
NetworkConfig build_with_kernel_delta(const NetworkConfig& base, int delta);

/// Frames seen by one output position: r_l = r_{l-1} + (k_l - 1) * prod_{j<l} s_j.
int receptive_field(const std::vector<LayerSpec>& specs);
int receptive_field(const NetworkConfig& cfg, Role which);

/// Output length of a stack of valid convolutions, or 0 if the input is too short.
int valid_output_length(const std::vector<LayerSpec>& specs, int input_length);

/// Product of strides of the stack.
int total_stride(const std::vector<LayerSpec>& specs);

}  // namespace dogvc::nets
