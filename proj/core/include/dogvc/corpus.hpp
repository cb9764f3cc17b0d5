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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dogvc/common.hpp"
#include "dogvc/dsp/audio.hpp"
#include "dogvc/dsp/f0.hpp"

namespace dogvc::corpus {

/// Conditioning class as seen by the networks.
struct DomainLabel {
  int index = 0;
  std::string name;
  int num_domains = 1;

  /// Vector of length num_domains with a single 1 at `index`.
  Vector onehot() const;
};

/// A training domain. Atomic domains list only themselves as members;
/// composite ones ("people", "dogs") resolve to the union of their members'
/// clips but still occupy a single class slot.
struct Domain {
  std::string name;
  std::vector<std::string> members;

  bool composite() const { return members.size() != 1 || members.front() != name; }
};

class DomainSet {
 public:
  DomainSet() = default;
  explicit DomainSet(std::vector<Domain> domains);

  /// FKN, MMY, people, adult_dog, puppy, dogs.
  static DomainSet default_six();
  /// One atomic domain per name.
  static DomainSet atomic(const std::vector<std::string>& names);
  static DomainSet from_json(const std::string& text);
  std::string to_json() const;

  int size() const { return static_cast<int>(domains_.size()); }
  const Domain& at(int index) const { return domains_.at(static_cast<std::size_t>(index)); }
  bool contains(const std::string& name) const;
  int index_of(const std::string& name) const;  // throws when unknown
  DomainLabel label(const std::string& name) const;
  DomainLabel label(int index) const;
  std::vector<std::string> names() const;

 private:
  std::vector<Domain> domains_;
};

struct AudioClip {
  std::string id;
  std::string domain;  // atomic domain name
  std::filesystem::path path;
  int sample_rate = 0;
  double duration = 0.0;
  std::string source;
  std::string license_tag;
};

enum class Split { train, eval };
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct Manifest {
  std::vector<AudioClip> clips;
  std::map<std::string, Split> split;  // clip id -> split
  std::uint64_t seed = 0;
  std::string config_hash;

  /// Checks unique ids and that every clip has a split assignment.
  void validate() const;
  std::vector<AudioClip> clips_in(const std::string& domain, std::optional<Split> which = std::nullopt) const;
  const AudioClip& find(const std::string& id) const;
};

std::string to_jsonl(const Manifest& m);
Manifest parse_jsonl(const std::string& text);
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Ingest

struct SkipReport {
  std::filesystem::path path;
  std::string reason;
};

struct IngestOptions {
  int project_rate = 16000;
  /// When set, clips whose rate differs from project_rate are resampled and
  /// written here; the clip then points at the resampled copy.
  std::optional<std::filesystem::path> resampled_dir;
  std::string source;       // attribution; defaults to the relative path
  std::string license_tag;
};

struct IngestResult {
  std::vector<AudioClip> clips;
  std::vector<SkipReport> skipped;
};

/// Id: "<domain>-" + first 16 hex chars of SHA-256 over the file bytes.
std::string clip_id(const std::string& domain, std::string_view file_bytes);

/// Walks `root` recursively in sorted order. Non-WAV files and undecodable
/// WAVs are reported in `skipped`; duplicate content is skipped as well.
IngestResult ingest_directory(const std::filesystem::path& root, const std::string& domain,
                              const IngestOptions& opts = {});

using AudioLoader = std::function<dsp::Waveform(const AudioClip&)>;

/// Reads the clip from disk and resamples to `project_rate`.
dsp::Waveform load_clip(const AudioClip& clip, int project_rate = 16000);
AudioLoader disk_loader(int project_rate = 16000);

// ---------------------------------------------------------------------------
// Curation

struct CurationThresholds {
  double loud_db_min = -45.0;  // dBFS
  double loud_db_max = -3.0;   // dBFS
  double snr_min = 10.0;       // dB
};

enum class RejectReason { soft, loud, noisy };
std::string to_string(RejectReason r);

struct Rejection {
  AudioClip clip;
  RejectReason reason;
  double level_db = 0.0;
  double snr_db = 0.0;
};

struct CurationResult {
  std::vector<AudioClip> kept;
  std::vector<Rejection> rejected;
};

/// Heuristic SNR (dB). Larger of two estimates: the energy ratio between the
/// loudest and quietest 20% of 32 ms frames, and the inverse spectral flatness
/// of the averaged power spectrum. Either one being high means the signal
/// dominates; stationary broadband noise scores low on both.
double estimate_snr_db(const dsp::Waveform& w);

CurationResult curate(std::span<const AudioClip> clips, const CurationThresholds& thresholds,
                      const AudioLoader& loader = disk_loader());

// ---------------------------------------------------------------------------
// Pitch split and train/eval split

struct PitchSplit {
  std::vector<AudioClip> low_pitch;
  std::vector<AudioClip> high_pitch;
  std::vector<std::string> unvoiced;     // ids placed in low_pitch without any voiced frame
  std::map<std::string, double> median_f0;
};

inline constexpr double kDefaultPitchThresholdHz = 450.0;

PitchSplit split_by_pitch(std::span<const AudioClip> clips, double f0_threshold,
                          const AudioLoader& loader = disk_loader(), const dsp::F0Config& f0_cfg = {});

/// Exactly min(n_eval, |domain|) eval clips per atomic domain, chosen by a
/// seeded shuffle of the id-sorted clips. Everything else is train.
Manifest make_split(const Manifest& manifest, int n_eval, std::uint64_t seed);

}  // namespace dogvc::corpus
