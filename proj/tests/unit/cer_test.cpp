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

#include <algorithm>
#include <functional>
#include <random>

#include "dogvc/eval.hpp"
#include "oracles.hpp"

using namespace dogvc;
using namespace dogvc::eval;
using dogvc::fixtures::brute_distance;
using dogvc::fixtures::random_string;


TEST(EditStats, MatchesBruteForceOnRandomPairs) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_string(rng, 12), b = random_string(rng, 12);
    const auto s = edit_stats(a, b);
    ASSERT_EQ(s.distance(), brute_distance(a, b)) << i;
    ASSERT_EQ(s.ref_length, static_cast<int>(a.size()));
    // Counts must describe a real alignment of the two lengths.
    ASSERT_EQ(static_cast<int>(a.size()) - s.deletions + s.insertions, static_cast<int>(b.size()));
  }
}

TEST(EditStats, CountsOperationsSeparately) {
  EXPECT_EQ(edit_stats(U"abc", U"abd"), (EditStats{0, 1, 0, 3}));
  EXPECT_EQ(edit_stats(U"abc", U"ab"), (EditStats{1, 0, 0, 3}));
  EXPECT_EQ(edit_stats(U"ab", U"abc"), (EditStats{0, 0, 1, 2}));
  EXPECT_EQ(edit_stats(U"", U"xy"), (EditStats{0, 0, 2, 0}));
}

TEST(Cer, SpotValues) {
  EXPECT_EQ(cer("hello", "hello"), 0.0);
  EXPECT_EQ(cer("abc", "abd"), 1.0 / 3.0);
  EXPECT_EQ(cer("abc", ""), 1.0);
}

TEST(Cer, CanExceedOneWithInsertions) { EXPECT_DOUBLE_EQ(cer("ab", "abxyz"), 1.5); }

TEST(Cer, EmptyReferenceIsAnError) {
  EXPECT_THROW(cer("", "x"), Error);
  EXPECT_THROW(cer("  ..", "x"), Error);
}

TEST(Cer, JapaneseCountsCodePoints) {
  // One of five kana substituted.
  EXPECT_DOUBLE_EQ(cer("こんにちは", "こんばちは"), 1.0 / 5.0);
  EXPECT_EQ(edit_stats(std::string_view("ねこ"), std::string_view("ねこ")).ref_length, 2);
}

TEST(TextNormalization, FoldsWidthCaseSpaceAndPunctuation) {
  EXPECT_EQ(normalize_text("Ｈｅｌｌｏ,  World!"), U"helloworld");
  EXPECT_EQ(cer("Hello, world.", "hello world"), 0.0);
  TextNormalization raw{false, false, false, false};
  EXPECT_EQ(normalize_text("A b", raw), U"A b");
}

TEST(TextNormalization, HalfwidthKatakanaComposes) {
  // NFKC maps halfwidth ｶﾞ to the single code point ガ.
  EXPECT_EQ(normalize_text("ｶﾞ"), U"ガ");
}

TEST(TextNormalization, RejectsMalformedUtf8) {
  EXPECT_THROW(utf8_to_u32("\xff"), Error);
  EXPECT_THROW(utf8_to_u32("\xc3"), Error);
  EXPECT_THROW(utf8_to_u32("\xed\xa0\x80"), Error);  // surrogate
}
