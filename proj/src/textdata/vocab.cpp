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

#include "nbrs/textdata/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "nbrs/errors.hpp"
#include "nbrs/textdata/unicode.hpp"

namespace nbrs::text {
namespace {

const std::vector<std::string> kReservedSymbols = {"<pad>", "<s>", "</s>",
                                                   "<unk>"};

template <class Key>
std::vector<std::string> most_frequent(const std::map<Key, std::size_t>& counts,
                                       std::size_t capacity,
                                       std::string (*to_symbol)(const Key&)) {
  std::vector<std::pair<Key, std::size_t>> items(counts.begin(), counts.end());
  // std::map iteration is already key-ordered, so a stable sort on count
  // leaves ties in key order.
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < items.size() && i < capacity; ++i) {
    out.push_back(to_symbol(items[i].first));
  }
  return out;
}

std::string char_symbol(const char32_t& c) { return encode_utf8(c); }
std::string token_symbol(const std::string& s) { return s; }

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& symbols) {
  symbols_ = kReservedSymbols;
  for (const auto& s : symbols) symbols_.push_back(s);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty() || symbols_[i].find('\n') != std::string::npos) {
      throw DataError("vocabulary symbol " + std::to_string(i) +
                      " is empty or contains a newline");
    }
    if (!ids_.emplace(symbols_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate vocabulary symbol '" + symbols_[i] + "'");
    }
  }
}

int Vocabulary::id(std::string_view symbol) const {
  auto it = ids_.find(std::string(symbol));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view symbol) const {
  return ids_.count(std::string(symbol)) > 0;
}

const std::string& Vocabulary::symbol(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw DataError("vocabulary id " + std::to_string(id) + " out of range");
  }
  return symbols_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary '" + path + "'");
  for (const auto& s : symbols_) out << s << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read vocabulary '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.size() < kReserved ||
      !std::equal(kReservedSymbols.begin(), kReservedSymbols.end(),
                  lines.begin())) {
    throw DataError("vocabulary '" + path + "' lacks the reserved header");
  }
  return Vocabulary(std::vector<std::string>(lines.begin() + kReserved,
                                             lines.end()));
}

nlohmann::json Vocabulary::to_json() const {
  return std::vector<std::string>(symbols_.begin() + kReserved, symbols_.end());
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  return Vocabulary(j.get<std::vector<std::string>>());
}

Vocabulary build_vocab(std::span<const std::string> corpus,
                       std::size_t max_size) {
  if (max_size <= Vocabulary::kReserved) {
    throw UsageError("vocabulary max_size must exceed the 4 reserved ids");
  }
  std::map<char32_t, std::size_t> counts;
  for (const auto& s : corpus) {
    for (char32_t c : decode_utf8(s)) {
      if (c == U'\n' || c == U'\r') continue;
      ++counts[c];
    }
  }
  return Vocabulary(most_frequent<char32_t>(
      counts, max_size - Vocabulary::kReserved, &char_symbol));
}

Vocabulary build_token_vocab(std::span<const std::vector<std::string>> corpus,
                             std::size_t max_size) {
  if (max_size <= Vocabulary::kReserved) {
    throw UsageError("vocabulary max_size must exceed the 4 reserved ids");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : corpus) {
    for (const auto& tok : seq) {
      if (!tok.empty() && tok.find('\n') == std::string::npos) ++counts[tok];
    }
  }
  return Vocabulary(most_frequent<std::string>(
      counts, max_size - Vocabulary::kReserved, &token_symbol));
}

std::vector<int> TokenSeq::unpadded() const {
  auto end = std::find(ids.begin(), ids.end(), Vocabulary::kPad);
  return {ids.begin(), end};
}

TokenSeq encode_tokens(const Vocabulary& vocab,
                       std::span<const std::string> tokens,
                       std::size_t max_len, bool add_bos_eos) {
  if (max_len == 0) throw DataError("encode: max_len must be at least 1");
  TokenSeq seq;
  std::size_t room = max_len;
  if (add_bos_eos) {
    room = max_len >= 2 ? max_len - 2 : 0;
    seq.ids.push_back(Vocabulary::kBos);
  }
  const std::size_t kept = std::min(room, tokens.size());
  seq.truncated = kept < tokens.size();
  for (std::size_t i = 0; i < kept; ++i) {
    seq.ids.push_back(vocab.id(tokens[i]));
    seq.text += tokens[i];
  }
  if (add_bos_eos && max_len >= 2) seq.ids.push_back(Vocabulary::kEos);
  seq.ids.resize(max_len, Vocabulary::kPad);
  return seq;
}

TokenSeq encode(const Vocabulary& vocab, std::string_view s,
                std::size_t max_len, bool add_bos_eos) {
  const auto chars = utf8_chars(s);
  return encode_tokens(vocab, chars, max_len, add_bos_eos);
}

std::vector<std::string> decode_tokens(const Vocabulary& vocab,
                                       std::span<const int> ids) {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == Vocabulary::kEos) break;
    if (id == Vocabulary::kPad || id == Vocabulary::kBos) continue;
    out.push_back(vocab.symbol(id));
  }
  return out;
}

std::string decode(const Vocabulary& vocab, std::span<const int> ids) {
  std::string out;
  for (const auto& s : decode_tokens(vocab, ids)) out += s;
  return out;
}

std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace nbrs::text
