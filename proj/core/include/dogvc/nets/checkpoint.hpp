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
#include <map>
#include <string>

#include "dogvc/nets/networks.hpp"

namespace dogvc::nets {

/// Binary checkpoint: a fixed header (architecture hash, kernel delta,
/// number of domains, step), an opaque metadata document and named float32
/// little-endian blobs for every parameter and batch-norm statistic.
struct Checkpoint {
  std::uint64_t arch_hash = 0;
  int kernel_delta = 0;
  int num_domains = 0;
  std::uint64_t step = 0;
  std::string metadata;
  std::map<std::string, Tensor> blobs;
};

Checkpoint snapshot(const ModelBundle& model, std::uint64_t step, std::string metadata);
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& model, std::uint64_t step,
                     std::string metadata);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies weights into `model`. Throws if the architecture hash, a blob name
/// or a blob shape disagrees.
void restore(const Checkpoint& ckpt, const ModelBundle& model);

}  // namespace dogvc::nets
