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

#include <vector>

#include "dogvc/eval.hpp"

namespace dogvc::eval {

EditStats edit_stats(std::u32string_view ref, std::u32string_view hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<int> dp((n + 1) * w);
  for (std::size_t i = 0; i <= n; ++i) dp[i * w] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) dp[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = dp[(i - 1) * w + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int del = dp[(i - 1) * w + j] + 1;
      const int ins = dp[i * w + j - 1] + 1;
      dp[i * w + j] = std::min(diag, std::min(del, ins));
    }
  }
  EditStats s;
  s.ref_length = static_cast<int>(n);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const int here = dp[i * w + j];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (dp[(i - 1) * w + j - 1] + (same ? 0 : 1) == here) {
        s.substitutions += same ? 0 : 1;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && dp[(i - 1) * w + j] + 1 == here) {
      ++s.deletions;
      --i;
    } else {
      ++s.insertions;
      --j;
    }
  }
  return s;
}

EditStats edit_stats(std::string_view ref, std::string_view hyp) {
  return edit_stats(utf8_to_u32(ref), utf8_to_u32(hyp));
}

double cer(const EditStats& stats) {
  if (stats.ref_length == 0) throw Error("CER is undefined for an empty reference");
  return static_cast<double>(stats.distance()) / stats.ref_length;
}

double cer(std::string_view ref, std::string_view hyp, const TextNormalization& norm) {
  return cer(edit_stats(normalize_text(ref, norm), normalize_text(hyp, norm)));
}

}  // namespace dogvc::eval
