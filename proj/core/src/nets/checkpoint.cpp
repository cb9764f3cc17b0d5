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

#include "dogvc/nets/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>

namespace dogvc::nets {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'D', 'V', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error("checkpoint truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint snapshot(const ModelBundle& model, std::uint64_t step, std::string metadata) {
  Checkpoint c;
  c.arch_hash = model.config().hash(model.feature_dim());
  c.kernel_delta = model.config().kernel_delta;
  c.num_domains = model.config().num_domains;
  c.step = step;
  c.metadata = std::move(metadata);
  for (const auto& p : model.parameters()) c.blobs[p.name] = p.var->value;
  for (const auto& [name, st] : model.bn_states()) {
    c.blobs[name + ".running_mean"] = st->running_mean;
    c.blobs[name + ".running_var"] = st->running_var;
  }
  return c;
}

std::string encode_checkpoint(const Checkpoint& c) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, c.arch_hash);
  put<std::int32_t>(out, c.kernel_delta);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.num_domains));
  put<std::uint64_t>(out, c.step);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.metadata.size()));
  out += c.metadata;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.blobs.size()));
  for (const auto& [name, t] : c.blobs) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.n()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.c()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.t()));
    for (double v : t.data()) put<float>(out, static_cast<float>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.str(4) != std::string(kMagic, 4)) throw Error("not a checkpoint file");
  if (const auto v = in.get<std::uint32_t>(); v != kVersion) throw Error(fmt::format("unsupported checkpoint version {}", v));
  Checkpoint c;
  c.arch_hash = in.get<std::uint64_t>();
  c.kernel_delta = in.get<std::int32_t>();
  c.num_domains = static_cast<int>(in.get<std::uint32_t>());
  c.step = in.get<std::uint64_t>();
  c.metadata = in.str(in.get<std::uint32_t>());
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.str(in.get<std::uint32_t>());
    const auto n = in.get<std::uint32_t>(), ch = in.get<std::uint32_t>(), t = in.get<std::uint32_t>();
    Tensor tensor(static_cast<int>(n), static_cast<int>(ch), static_cast<int>(t));
    for (auto& v : tensor.data()) v = in.get<float>();
    c.blobs.emplace(std::move(name), std::move(tensor));
  }
  if (!in.done()) throw Error("trailing bytes after checkpoint");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& model, std::uint64_t step,
                     std::string metadata) {
  write_file_atomic(path, encode_checkpoint(snapshot(model, step, std::move(metadata))));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void restore(const Checkpoint& ckpt, const ModelBundle& model) {
  const auto expected = model.config().hash(model.feature_dim());
  if (ckpt.arch_hash != expected) {
    throw Error(fmt::format("checkpoint architecture {} does not match model {}", hex64(ckpt.arch_hash), hex64(expected)));
  }
  auto take = [&](const std::string& name, Tensor& dst) {
    const auto it = ckpt.blobs.find(name);
    if (it == ckpt.blobs.end()) throw Error("checkpoint lacks " + name);
    if (!it->second.same_shape(dst)) {
      throw Error(fmt::format("checkpoint blob {} has shape {}, model expects {}", name, it->second.shape_string(),
                              dst.shape_string()));
    }
    dst = it->second;
  };
  for (const auto& p : model.parameters()) take(p.name, p.var->value);
  for (const auto& [name, st] : model.bn_states()) {
    take(name + ".running_mean", st->running_mean);
    take(name + ".running_var", st->running_var);
  }
}

}  // namespace dogvc::nets
