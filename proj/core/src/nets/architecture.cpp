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

#include "dogvc/nets/architecture.hpp"

#include <charconv>
#include <sstream>

#include <fmt/format.h>

namespace dogvc::nets {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s, int line_no) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(fmt::format("architecture line {}: bad integer '{}'", line_no, s));
  return v;
}

LayerSpec parse_layer(const std::string& line, int line_no) {
  std::istringstream in(line);
  std::string word;
  in >> word;
  LayerSpec spec;
  if (word == "conv") {
    spec.kind = LayerKind::conv;
  } else if (word == "deconv") {
    spec.kind = LayerKind::deconv;
  } else {
    throw Error(fmt::format("architecture line {}: unknown layer '{}'", line_no, word));
  }
  bool have_k = false, have_c = false;
  while (in >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw Error(fmt::format("architecture line {}: expected key=value, got '{}'", line_no, word));
    const std::string key = word.substr(0, eq);
    std::string val = word.substr(eq + 1);
    if (key == "k") {
      if (!val.empty() && val.back() == '*') {
        spec.kernel_tunable = true;
        val.pop_back();
      }
      spec.kernel = parse_int(val, line_no);
      have_k = true;
    } else if (key == "c") {
      if (val == "F" || val == "Z" || val == "D") {
        spec.channels.symbol = val[0];
      } else {
        spec.channels.value = parse_int(val, line_no);
      }
      have_c = true;
    } else if (key == "s") {
      spec.stride = parse_int(val, line_no);
    } else if (key == "norm") {
      if (val == "batch") spec.norm = Norm::batch;
      else if (val == "none") spec.norm = Norm::none;
      else throw Error(fmt::format("architecture line {}: unknown norm '{}'", line_no, val));
    } else if (key == "act") {
      if (val == "glu") spec.activation = Activation::glu;
      else if (val == "sigmoid") spec.activation = Activation::sigmoid;
      else if (val == "none") spec.activation = Activation::none;
      else throw Error(fmt::format("architecture line {}: unknown activation '{}'", line_no, val));
    } else if (key == "pad") {
      if (val == "same") spec.same_padding = true;
      else if (val == "valid") spec.same_padding = false;
      else throw Error(fmt::format("architecture line {}: unknown padding '{}'", line_no, val));
    } else {
      throw Error(fmt::format("architecture line {}: unknown key '{}'", line_no, key));
    }
  }
  if (!have_k || !have_c) throw Error(fmt::format("architecture line {}: k and c are required", line_no));
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(fmt::format("architecture line {}: {}", line_no, e.what()));
  }
  return spec;
}

}  // namespace

int ChannelSpec::resolve(int feature_dim, int latent_dim, int num_domains) const {
  switch (symbol) {
    case 0: return value;
    case 'F': return feature_dim;
    case 'Z': return latent_dim;
    case 'D': return num_domains;
    default: throw Error(fmt::format("unknown channel symbol '{}'", symbol));
  }
}

void LayerSpec::validate() const {
  if (kernel < 1) throw Error(fmt::format("kernel must be >= 1 (got {})", kernel));
  if (stride < 1) throw Error(fmt::format("stride must be >= 1 (got {})", stride));
  if (channels.symbol == 0 && channels.value < 1) throw Error(fmt::format("channels must be >= 1 (got {})", channels.value));
  if (kind == LayerKind::deconv && !same_padding) throw Error("deconv layers require pad=same");
}

std::string LayerSpec::to_string() const {
  const char* act = activation == Activation::glu ? "glu" : activation == Activation::sigmoid ? "sigmoid" : "none";
  const std::string c = channels.symbol ? std::string(1, channels.symbol) : std::to_string(channels.value);
  return fmt::format("{} k={}{} c={} s={} norm={} act={} pad={}", kind == LayerKind::conv ? "conv" : "deconv", kernel,
                     kernel_tunable ? "*" : "", c, stride, norm == Norm::batch ? "batch" : "none", act,
                     same_padding ? "same" : "valid");
}

std::string to_string(Role r) {
  switch (r) {
    case Role::generator: return "generator";
    case Role::discriminator: return "discriminator";
    case Role::classifier: return "classifier";
    case Role::encoder: return "encoder";
    case Role::decoder: return "decoder";
    case Role::aux_classifier: return "aux_classifier";
  }
  return "?";
}

Role parse_role(const std::string& s) {
  for (Role r : kAllRoles) {
    if (to_string(r) == s) return r;
  }
  throw Error("unknown network section '" + s + "'");
}

void NetworkConfig::validate() const {
  if (num_domains < 1) throw Error("num_domains must be >= 1");
  if (latent_dim < 1) throw Error("latent dimension must be >= 1");
  for (Role r : kAllRoles) {
    for (const auto& s : specs(r)) s.validate();
  }
}

std::string NetworkConfig::to_text() const {
  std::string out = fmt::format("set latent={}\n", latent_dim);
  for (Role r : kAllRoles) {
    if (specs(r).empty()) continue;
    out += "[" + to_string(r) + "]\n";
    for (const auto& s : specs(r)) out += s.to_string() + "\n";
  }
  return out;
}

std::uint64_t NetworkConfig::hash(int feature_dim) const {
  return hash64(fmt::format("{}delta={}\ndomains={}\nfeatures={}\n", to_text(), kernel_delta, num_domains, feature_dim));
}

NetworkConfig parse_architecture(const std::string& text) {
  NetworkConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<LayerSpec>* section = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(fmt::format("architecture line {}: unterminated section", line_no));
      section = &cfg.specs(parse_role(line.substr(1, line.size() - 2)));
      continue;
    }
    if (line.rfind("set ", 0) == 0) {
      const std::string kv = trim(line.substr(4));
      const auto eq = kv.find('=');
      if (eq == std::string::npos || kv.substr(0, eq) != "latent") {
        throw Error(fmt::format("architecture line {}: unknown setting '{}'", line_no, kv));
      }
      cfg.latent_dim = parse_int(kv.substr(eq + 1), line_no);
      continue;
    }
    if (!section) throw Error(fmt::format("architecture line {}: layer outside a section", line_no));
    section->push_back(parse_layer(line, line_no));
  }
  cfg.validate();
  return cfg;
}

NetworkConfig load_architecture(const std::filesystem::path& path) { return parse_architecture(read_file(path)); }

NetworkConfig build_with_kernel_delta(const NetworkConfig& base, int delta) {
  if (delta < -2 || delta > 2) throw Error(fmt::format("kernel delta {} outside [-2, 2]", delta));
  NetworkConfig out = base;
  out.kernel_delta = base.kernel_delta + delta;
  std::vector<Role> roles = {Role::discriminator, Role::classifier};
  if (base.delta_on_generator) roles.push_back(Role::generator);
  for (Role r : roles) {
    for (auto& s : out.specs(r)) {
      if (!s.kernel_tunable) continue;
      s.kernel += delta;
      if (s.kernel < 1) {
        throw Error(fmt::format("kernel delta {} makes a {} kernel {} (< 1)", delta, to_string(r), s.kernel));
      }
    }
  }
  return out;
}

int receptive_field(const std::vector<LayerSpec>& specs) {
  long r = 1, jump = 1;
  for (const auto& s : specs) {
    r += static_cast<long>(s.kernel - 1) * jump;
    jump *= s.stride;
  }
  return static_cast<int>(r);
}

int receptive_field(const NetworkConfig& cfg, Role which) { return receptive_field(cfg.specs(which)); }

int valid_output_length(const std::vector<LayerSpec>& specs, int input_length) {
  int t = input_length;
  for (const auto& s : specs) {
    if (t < s.kernel) return 0;
    t = (t - s.kernel) / s.stride + 1;
  }
  return t;
}

int total_stride(const std::vector<LayerSpec>& specs) {
  int p = 1;
  for (const auto& s : specs) p *= s.stride;
  return p;
}

}  // namespace dogvc::nets
