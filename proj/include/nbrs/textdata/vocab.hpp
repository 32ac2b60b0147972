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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace nbrs::text {

// Symbol inventory with four reserved ids. Symbols are whole code points
// for spellings and pronunciations, or arbitrary tokens (phonemes, language
// ids) for the cognate task.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr std::size_t kReserved = 4;

  Vocabulary();
  // `symbols` excludes the reserved entries; duplicates are rejected.
  explicit Vocabulary(const std::vector<std::string>& symbols);

  std::size_t size() const { return symbols_.size(); }
  int id(std::string_view symbol) const;
  bool contains(std::string_view symbol) const;
  const std::string& symbol(int id) const;
  // All symbols including the reserved ones, in id order.
  const std::vector<std::string>& symbols() const { return symbols_; }

  // One symbol per line, line i (0-based) holds id i.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  bool operator==(const Vocabulary& other) const {
    return symbols_ == other.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
};

// Character vocabulary: the most frequent code points, ties by lower code
// point, up to max_size entries including the reserved four.
Vocabulary build_vocab(std::span<const std::string> corpus,
                       std::size_t max_size);

// Same selection rule over pre-split tokens (ties by byte order).
Vocabulary build_token_vocab(std::span<const std::vector<std::string>> corpus,
                             std::size_t max_size);

struct TokenSeq {
  std::vector<int> ids;
  std::string text;
  bool truncated = false;

  // Ids up to the first PAD.
  std::vector<int> unpadded() const;
};

// Character-level encoding; out-of-vocabulary code points map to UNK.
// With add_bos_eos the content is cut to max_len - 2 so both markers fit.
// The result is padded with PAD to exactly max_len.
TokenSeq encode(const Vocabulary& vocab, std::string_view s,
                std::size_t max_len, bool add_bos_eos);

TokenSeq encode_tokens(const Vocabulary& vocab,
                       std::span<const std::string> tokens,
                       std::size_t max_len, bool add_bos_eos);

// Concatenates symbols, skipping PAD/BOS and stopping at EOS.
std::string decode(const Vocabulary& vocab, std::span<const int> ids);
std::vector<std::string> decode_tokens(const Vocabulary& vocab,
                                       std::span<const int> ids);

std::vector<std::string> split_tokens(std::string_view s);
std::string join_tokens(std::span<const std::string> tokens);

}  // namespace nbrs::text
