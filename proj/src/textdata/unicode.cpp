// Copyright (c) 2026 The nbrs Authors
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

#include "nbrs/textdata/unicode.hpp"

#include <algorithm>

namespace nbrs::text {

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
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
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!ok) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  for (char32_t c : s) out += encode_utf8(c);
  return out;
}

std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  for (char32_t c : decode_utf8(s)) out.push_back(encode_utf8(c));
  return out;
}

bool is_kanji(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF);
}

bool is_hiragana(char32_t c) { return c >= 0x3041 && c <= 0x309F; }

bool is_katakana(char32_t c) { return c >= 0x30A0 && c <= 0x30FF; }

bool is_kana(char32_t c) { return is_hiragana(c) || is_katakana(c); }

Script script_of(char32_t c) {
  if (is_kanji(c)) return Script::kKanji;
  if (is_hiragana(c)) return Script::kHiragana;
  if (is_katakana(c)) return Script::kKatakana;
  return Script::kOther;
}

bool contains_kanji(std::u32string_view s) {
  return std::any_of(s.begin(), s.end(), is_kanji);
}

bool contains_kanji(std::string_view s) { return contains_kanji(decode_utf8(s)); }

char32_t katakana_to_hiragana(char32_t c) {
  return (c >= 0x30A1 && c <= 0x30F6) ? c - 0x60 : c;
}

std::string to_hiragana(std::string_view s) {
  std::u32string cps = decode_utf8(s);
  for (auto& c : cps) c = katakana_to_hiragana(c);
  return encode_utf8(cps);
}

bool shares_kanji_bigram(std::string_view a, std::string_view b) {
  const std::u32string ua = decode_utf8(a);
  const std::u32string ub = decode_utf8(b);
  for (std::size_t i = 0; i + 1 < ua.size(); ++i) {
    if (!is_kanji(ua[i]) || !is_kanji(ua[i + 1])) continue;
    for (std::size_t j = 0; j + 1 < ub.size(); ++j) {
      if (ub[j] == ua[i] && ub[j + 1] == ua[i + 1]) return true;
    }
  }
  return false;
}

}  // namespace nbrs::text
