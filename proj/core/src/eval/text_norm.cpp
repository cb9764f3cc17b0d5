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

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "dogvc/eval.hpp"

namespace dogvc::eval {

std::u32string utf8_to_u32(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  auto fail = [&] { throw Error("malformed UTF-8 at byte " + std::to_string(i)); };
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      fail();
    }
    if (i + static_cast<std::size_t>(len) > s.size()) fail();
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) fail();
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail();
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::u32string normalize_text(std::string_view utf8, const TextNormalization& norm) {
  std::u32string text = utf8_to_u32(utf8);
  if (norm.nfkc) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status)) throw Error(std::string("NFKC unavailable: ") + u_errorName(status));
    const auto src = icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(text.data()),
                                                   static_cast<int32_t>(text.size()));
    const icu::UnicodeString dst = nfkc->normalize(src, status);
    if (U_FAILURE(status)) throw Error(std::string("NFKC failed: ") + u_errorName(status));
    text.clear();
    for (int32_t i = 0; i < dst.length(); i = dst.moveIndex32(i, 1)) text.push_back(static_cast<char32_t>(dst.char32At(i)));
  }
  std::u32string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    const auto cp = static_cast<UChar32>(c);
    if (norm.strip_whitespace && u_isUWhiteSpace(cp)) continue;
    if (norm.strip_punctuation && u_ispunct(cp)) continue;
    out.push_back(norm.lowercase ? static_cast<char32_t>(u_tolower(cp)) : c);
  }
  return out;
}

}  // namespace dogvc::eval
