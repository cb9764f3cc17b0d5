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

#include "dogvc/eval.hpp"

using namespace dogvc;
using namespace dogvc::eval;

namespace {

RatingRecord rating(const std::string& rater, const std::string& clip, MosScale scale, int score) {
  RatingRecord r;
  r.rater = rater;
  r.clip = clip;
  r.scale = scale;
  r.score = score;
  return r;
}

}  // namespace

TEST(Mos, MeanSdAndInterval) {
  std::vector<RatingRecord> rs;
  for (int s : {1, 2, 3, 4, 5}) rs.push_back(rating("r" + std::to_string(s), "c", MosScale::clarity, s));
  const auto table = aggregate_mos(rs, [](const RatingRecord&) { return std::string("cond"); });
  const auto& m = table.at({"cond", MosScale::clarity});
  EXPECT_EQ(m.n, 5);
  EXPECT_DOUBLE_EQ(m.mean, 3.0);
  EXPECT_NEAR(m.sd, std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(m.ci95, 1.96 * std::sqrt(2.5) / std::sqrt(5.0), 1e-12);
}

TEST(Mos, SingleRatingHasZeroSpread) {
  const auto t = aggregate_mos({rating("a", "c", MosScale::dog_likeness, 4)},
                               [](const RatingRecord& r) { return r.clip; });
  EXPECT_EQ(t.at({"c", MosScale::dog_likeness}).sd, 0.0);
}

TEST(Mos, RejectsOutOfRangeScores) {
  EXPECT_THROW(aggregate_mos({rating("a", "c", MosScale::clarity, 6)}, [](const RatingRecord&) { return "x"; }),
               Error);
  EXPECT_THROW(RatingRecord::from_json(R"({"rater":"a","clip":"c","scale":"clarity","score":0})"), Error);
}

TEST(Records, JsonRoundTrip) {
  const auto r = rating("a", "c", MosScale::sound_quality, 3);
  const auto back = RatingRecord::from_json(r.to_json());
  EXPECT_EQ(back.rater, "a");
  EXPECT_EQ(back.scale, MosScale::sound_quality);
  EXPECT_EQ(back.score, 3);
  TranscriptRecord t;
  t.rater = "a";
  t.clip = "c";
  t.text = "わんわん";
  EXPECT_EQ(TranscriptRecord::from_json(t.to_json()).text, "わんわん");
}

TEST(Experiment, JsonRoundTripAndCerAggregation) {
  ListeningExperiment e;
  e.id = "x";
  e.clips = {{"c1", "a/s1.wav", "A", "abcd", 0}, {"c2", "a/s2.wav", "A", "efgh", 1}, {"n", "n.wav", "noise", "", 0}};
  const auto back = ListeningExperiment::from_json(e.to_json());
  ASSERT_EQ(back.clips.size(), 3u);
  EXPECT_EQ(back.conditions(), (std::vector<std::string>{"A", "noise"}));

  std::vector<TranscriptRecord> ts(3);
  ts[0] = {"r1", "c1", "abcd", "c1", 0};
  ts[1] = {"r2", "c1", "abxx", "c1", 0};
  ts[2] = {"r1", "n", "anything", "n", 0};  // no reference: ignored
  const auto cer_table = aggregate_cer(back, ts);
  ASSERT_EQ(cer_table.size(), 1u);
  EXPECT_DOUBLE_EQ(cer_table.at({"A", 0}), (0.0 + 0.5) / 2.0);
}

TEST(Experiment, RejectsDuplicateClipIds) {
  EXPECT_THROW(ListeningExperiment::from_json(
                   R"({"id":"e","clips":[{"id":"a","path":"p","condition":"c"},{"id":"a","path":"q","condition":"c"}]})"),
               Error);
}
