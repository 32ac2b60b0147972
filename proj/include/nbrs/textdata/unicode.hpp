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

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nbrs::text {

// Malformed sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(char32_t c);
std::string encode_utf8(std::u32string_view s);

// One UTF-8 string per code point.
std::vector<std::string> utf8_chars(std::string_view s);

enum class Script { kKanji, kHiragana, kKatakana, kOther };

// Kanji: CJK Unified Ideographs and Extension A.
bool is_kanji(char32_t c);
bool is_hiragana(char32_t c);
bool is_katakana(char32_t c);
bool is_kana(char32_t c);
Script script_of(char32_t c);

bool contains_kanji(std::string_view s);
bool contains_kanji(std::u32string_view s);

// Katakana letters shift to hiragana by a fixed offset; everything else,
// including the long vowel mark, is unchanged.
char32_t katakana_to_hiragana(char32_t c);
std::string to_hiragana(std::string_view s);

// True iff some pair of adjacent kanji in `a` also occurs adjacently in `b`.
bool shares_kanji_bigram(std::string_view a, std::string_view b);

}  // namespace nbrs::text
