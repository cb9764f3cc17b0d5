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

#include "dogvc/dsp/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>

#include "dogvc/common.hpp"

namespace dogvc::dsp {

void Waveform::validate() const {
  if (sample_rate <= 0) throw Error("waveform sample rate must be positive");
  if (samples.empty()) throw Error("waveform is empty");
  for (double s : samples) {
    if (!std::isfinite(s)) throw Error("waveform contains non-finite samples");
  }
}

namespace {

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | (p[1] << 8)); }

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

double decode_sample(const unsigned char* p, int format, int bits) {
  if (format == 3) {
    if (bits == 32) {
      float f;
      std::uint32_t u = le32(p);
      std::memcpy(&f, &u, 4);
      return f;
    }
    std::uint64_t u = std::uint64_t(le32(p)) | (std::uint64_t(le32(p + 4)) << 32);
    double d;
    std::memcpy(&d, &u, 8);
    return d;
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = std::int32_t(p[0]) | (std::int32_t(p[1]) << 8) | (std::int32_t(p[2]) << 16);
      if (v & 0x800000) v |= ~0xffffff;
      return v / 8388608.0;
    }
    case 32:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
    default:
      throw Error("unsupported PCM bit depth " + std::to_string(bits));
  }
}

}  // namespace

Waveform decode_wav(std::string_view bytes) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw Error("not a RIFF/WAVE file");
  }
  int format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = data + pos;
    std::uint32_t chunk_size = le32(chunk + 4);
    std::size_t body = pos + 8;
    std::size_t avail = std::min<std::size_t>(chunk_size, size - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw Error("truncated fmt chunk");
      format = le16(data + body);
      channels = le16(data + body + 2);
      rate = le32(data + body + 4);
      bits = le16(data + body + 14);
      if (format == 0xFFFE && avail >= 26) format = le16(data + body + 24);  // extensible
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = data + body;
      pcm_size = avail;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }
  if (format == 0 || pcm == nullptr) throw Error("WAVE file lacks fmt or data chunk");
  if (format != 1 && format != 3) throw Error("unsupported WAVE format tag " + std::to_string(format));
  if (format == 3 && bits != 32 && bits != 64) throw Error("unsupported float bit depth");
  if (channels <= 0 || rate == 0) throw Error("invalid WAVE header");

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  if (frame_bytes == 0) throw Error("invalid WAVE block size");
  const std::size_t n = pcm_size / frame_bytes;
  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      acc += decode_sample(pcm + i * frame_bytes + c * (bits / 8), format, bits);
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

Waveform read_wav(const std::filesystem::path& path) { return decode_wav(read_file(path)); }

std::string encode_wav(const Waveform& w) {
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(w.sample_rate));
  put32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, 2 * n);
  for (double s : w.samples) {
    double c = std::clamp(std::isfinite(s) ? s : 0.0, -1.0, 1.0);
    auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    put16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  write_file_atomic(path, encode_wav(w));
}

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0 || w.sample_rate <= 0) throw Error("resample: rates must be positive");
  if (target_rate == w.sample_rate) return w;

  constexpr int kZeros = 16;
  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  // Cutoff relative to the input Nyquist, slightly below the lower of the two.
  const double cutoff = 0.95 * std::min(1.0, ratio);
  const double half_width = kZeros / cutoff;  // in input samples
  const auto n_in = static_cast<std::int64_t>(w.samples.size());
  const auto n_out = static_cast<std::int64_t>(std::floor(n_in * ratio));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(std::max<std::int64_t>(n_out, 1)), 0.0);
  for (std::int64_t j = 0; j < n_out; ++j) {
    const double t = j / ratio;
    const auto lo = static_cast<std::int64_t>(std::ceil(t - half_width));
    const auto hi = static_cast<std::int64_t>(std::floor(t + half_width));
    double acc = 0.0;
    for (std::int64_t i = std::max<std::int64_t>(lo, 0); i <= std::min(hi, n_in - 1); ++i) {
      const double x = i - t;
      const double arg = std::numbers::pi * cutoff * x;
      const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(arg) / arg;
      const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * x / half_width);
      acc += w.samples[static_cast<std::size_t>(i)] * cutoff * sinc * win;
    }
    out.samples[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

double rms(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return std::sqrt(acc / w.samples.size());
}

double rms_dbfs(const Waveform& w) {
  const double r = rms(w);
  if (r <= 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(r);
}

}  // namespace dogvc::dsp
