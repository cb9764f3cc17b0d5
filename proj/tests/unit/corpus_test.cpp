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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dogvc/corpus.hpp"
#include "toy.hpp"

using namespace dogvc;
using namespace dogvc::corpus;
using dogvc::fixtures::TempDir;

namespace {

AudioLoader memory_loader(std::map<std::string, dsp::Waveform> audio) {
  return [audio = std::move(audio)](const AudioClip& c) { return audio.at(c.id); };
}

AudioClip fake_clip(const std::string& id, const std::string& domain = "adult_dog") {
  AudioClip c;
  c.id = id;
  c.domain = domain;
  c.path = id + ".wav";
  c.sample_rate = 16000;
  c.duration = 1.0;
  return c;
}

dsp::Waveform white(double rms_level, double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, rms_level);
  dsp::Waveform w;
  w.samples.resize(static_cast<std::size_t>(seconds * 16000));
  for (double& v : w.samples) v = n(rng);
  return w;
}

std::string fmt_id(const std::string& domain, int i) { return domain + "-" + std::to_string(i); }

}  // namespace

TEST(DomainSet, OneHotAndComposites) {
  const auto d = DomainSet::default_six();
  ASSERT_EQ(d.size(), 6);
  const auto label = d.label("adult_dog");
  const Vector v = label.onehot();
  EXPECT_EQ(v.size(), 6);
  EXPECT_EQ(v.sum(), 1.0);
  EXPECT_EQ(v(label.index), 1.0);
  EXPECT_TRUE(d.at(d.index_of("dogs")).composite());
  EXPECT_FALSE(d.at(d.index_of("FKN")).composite());
  EXPECT_THROW(d.index_of("cat"), Error);
  EXPECT_EQ(DomainSet::from_json(d.to_json()).names(), d.names());
}

TEST(Ingest, CountsSkipsAndStableIds) {
  TempDir dir("ingest");
  for (int i = 0; i < 2; ++i) dsp::write_wav(dir / ("a" + std::to_string(i) + ".wav"), fixtures::sine(300 + i, 0.5));
  write_file_atomic(dir / "notes.txt", "not audio");
  const auto r = ingest_directory(dir.path(), "adult_dog");
  ASSERT_EQ(r.clips.size(), 2u);
  ASSERT_EQ(r.skipped.size(), 1u);
  for (const auto& c : r.clips) {
    EXPECT_EQ(c.domain, "adult_dog");
    EXPECT_EQ(c.id.rfind("adult_dog", 0), 0u);
    EXPECT_GT(c.duration, 0.0);
  }
  const auto again = ingest_directory(dir.path(), "adult_dog");
  EXPECT_EQ(again.clips[0].id, r.clips[0].id);
  EXPECT_EQ(again.clips[1].id, r.clips[1].id);
}

TEST(Ingest, EmptyDirectoryAndMissingRoot) {
  TempDir dir("ingest-empty");
  EXPECT_TRUE(ingest_directory(dir.path(), "FKN").clips.empty());
  EXPECT_THROW(ingest_directory(dir / "missing", "FKN"), Error);
}

TEST(Ingest, ResamplesToProjectRate) {
  TempDir dir("ingest-rate");
  dsp::write_wav(dir / "x.wav", fixtures::sine(440, 0.5, 22050));
  IngestOptions opts;
  opts.resampled_dir = dir / "out";
  const auto r = ingest_directory(dir.path(), "FKN", opts);
  ASSERT_EQ(r.clips.size(), 1u);
  EXPECT_EQ(r.clips[0].sample_rate, 16000);
  EXPECT_EQ(dsp::read_wav(r.clips[0].path).sample_rate, 16000);
}

TEST(Curate, SilenceIsSoftSquareIsLoudToneIsKept) {
  dsp::Waveform silence;
  silence.samples.assign(16000, 0.0);
  dsp::Waveform square;
  for (int i = 0; i < 16000; ++i) square.samples.push_back((i / 40) % 2 ? 1.0 : -1.0);
  // Amplitude a sine has RMS a / sqrt(2); -20 dBFS RMS needs a = 0.1 sqrt(2).
  const auto tone = fixtures::sine(440.0, 1.0, 16000, 0.1 * std::sqrt(2.0));
  EXPECT_NEAR(dsp::rms_dbfs(tone), -20.0, 1e-3);

  const std::vector<AudioClip> clips{fake_clip("silence"), fake_clip("square"), fake_clip("tone")};
  const auto loader = memory_loader({{"silence", silence}, {"square", square}, {"tone", tone}});
  const auto r = curate(clips, {-40.0, -3.0, 10.0}, loader);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].id, "tone");
  ASSERT_EQ(r.rejected.size(), 2u);
  for (const auto& rej : r.rejected) {
    EXPECT_EQ(rej.reason, rej.clip.id == "silence" ? RejectReason::soft : RejectReason::loud);
  }
}

TEST(Curate, StationaryNoiseIsNoisy) {
  const auto loader = memory_loader({{"n", white(0.05, 1.0, 3)}});
  const std::vector<AudioClip> clips{fake_clip("n")};
  const auto r = curate(clips, {-45.0, -3.0, 10.0}, loader);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].reason, RejectReason::noisy);
}

TEST(Curate, IsAPartition) {
  std::map<std::string, dsp::Waveform> audio;
  std::vector<AudioClip> clips;
  for (int i = 0; i < 12; ++i) {
    const std::string id = "c" + std::to_string(i);
    audio[id] = i % 3 == 0 ? white(0.001 * (i + 1), 0.5, i) : fixtures::sine(200.0 + 50 * i, 0.5, 16000, 0.05 * i);
    clips.push_back(fake_clip(id));
  }
  const auto r = curate(clips, {}, memory_loader(audio));
  std::set<std::string> seen;
  for (const auto& c : r.kept) EXPECT_TRUE(seen.insert(c.id).second);
  for (const auto& c : r.rejected) EXPECT_TRUE(seen.insert(c.clip.id).second);
  EXPECT_EQ(seen.size(), clips.size());
  EXPECT_THROW(curate(clips, {-3.0, -40.0, 10.0}, memory_loader(audio)), Error);
}

TEST(PitchSplit, TonesLandOnTheirSide) {
  const auto loader = memory_loader({{"low", fixtures::sine(300.0, 1.0)}, {"high", fixtures::sine(700.0, 1.0)}});
  const std::vector<AudioClip> clips{fake_clip("low"), fake_clip("high")};
  const auto s = split_by_pitch(clips, 500.0, loader);
  ASSERT_EQ(s.low_pitch.size(), 1u);
  ASSERT_EQ(s.high_pitch.size(), 1u);
  EXPECT_EQ(s.low_pitch[0].id, "low");
  EXPECT_EQ(s.high_pitch[0].id, "high");
  EXPECT_NEAR(s.median_f0.at("low"), 300.0, 6.0);

  const auto all_high = split_by_pitch(clips, 1e-3, loader);
  EXPECT_EQ(all_high.high_pitch.size(), 2u);
}

TEST(PitchSplit, UnvoicedGoesLowWithFlag) {
  dsp::Waveform silence;
  silence.samples.assign(16000, 0.0);
  const auto loader = memory_loader({{"s", silence}});
  const std::vector<AudioClip> clips{fake_clip("s")};
  const auto r = split_by_pitch(clips, 450.0, loader);
  ASSERT_EQ(r.low_pitch.size(), 1u);
  EXPECT_EQ(r.unvoiced, std::vector<std::string>{"s"});
}

TEST(Split, ExactCountsAndDeterminism) {
  Manifest m;
  for (int i = 0; i < 503; ++i) m.clips.push_back(fake_clip(fmt_id("FKN", i), "FKN"));
  for (int i = 0; i < 4; ++i) m.clips.push_back(fake_clip(fmt_id("puppy", i), "puppy"));
  const auto a = make_split(m, 10, 5), b = make_split(m, 10, 5);
  EXPECT_EQ(a.split, b.split);
  EXPECT_EQ(to_jsonl(a), to_jsonl(b));
  EXPECT_EQ(a.clips_in("FKN", Split::eval).size(), 10u);
  EXPECT_EQ(a.clips_in("FKN", Split::train).size(), 493u);
  EXPECT_EQ(a.clips_in("puppy", Split::eval).size(), 4u);
  EXPECT_NE(make_split(m, 10, 6).split, a.split);
  const auto none = make_split(m, 0, 5);
  EXPECT_EQ(none.clips_in("FKN", Split::train).size(), 503u);
}
