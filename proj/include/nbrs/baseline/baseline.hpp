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
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nbrs/geodata/feature.hpp"
#include "nbrs/geodata/neighborhood.hpp"

namespace nbrs::baseline {

// Emitted by the base reader for kanji it has never seen.
inline constexpr std::string_view kUnknownReading = "?";

struct AlignedUnit {
  std::string spelling;
  std::string kana;
  bool operator==(const AlignedUnit&) const = default;
};

// Units partition the spelling and the reading, in order.
struct Alignment {
  std::vector<AlignedUnit> units;
  double log_prob = 0.0;

  std::string spelling() const;
  std::string reading() const;
};

struct AlignerConfig {
  std::size_t max_spelling = 3;
  std::size_t max_kana = 6;
  // Path weight factor per spelling character beyond the first in a unit.
  double extra_char_penalty = 0.1;
  // Path weight factor for a unit with an empty reading.
  double empty_penalty = 0.01;
  // Probability assigned to pairs never seen in training.
  double unseen_floor = 1e-9;
  double tolerance = 1e-4;
  std::size_t max_iterations = 200;
};

// Monotone many-to-many spelling/kana aligner trained with EM. Kana in the
// spelling only ever aligns to the same kana (katakana folded).
class Aligner {
 public:
  using Pair = std::pair<std::string, std::string>;

  static Aligner train(std::span<const Pair> pairs,
                       const AlignerConfig& cfg = {},
                       std::vector<geo::Diagnostic>* diagnostics = nullptr);

  // Viterbi alignment; nullopt when no monotone alignment exists.
  std::optional<Alignment> align(std::string_view name,
                                 std::string_view pron) const;

  // Learned joint probability of a non-anchor unit.
  double probability(std::string_view spelling, std::string_view kana) const;

  std::size_t iterations() const { return iterations_; }
  bool converged() const { return converged_; }
  std::size_t trained_pairs() const { return trained_pairs_; }
  const AlignerConfig& config() const { return cfg_; }

 private:
  AlignerConfig cfg_;
  std::map<std::u32string, double> prob_;  // key: spelling U+0000 kana
  std::size_t iterations_ = 0;
  bool converged_ = false;
  std::size_t trained_pairs_ = 0;
};

// Kanji substring to kana readings with counts. Ties between equally
// frequent readings go to the one added first.
class ReadingLexicon {
 public:
  struct Reading {
    std::string kana;
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };

  // Keys without a kanji are ignored.
  void add(const std::string& key, const std::string& kana,
           std::size_t count = 1);
  // Adds every run of consecutive units whose spelling holds a kanji.
  void add_alignment(const Alignment& a, std::size_t max_key_chars = 8);

  bool contains(const std::string& key) const { return entries_.count(key) > 0; }
  std::optional<std::string> top(const std::string& key) const;
  const std::vector<Reading>& readings(const std::string& key) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t max_key_chars() const { return max_key_chars_; }
  const std::map<std::string, std::vector<Reading>>& entries() const {
    return entries_;
  }

  // substring \t reading \t count, most frequent reading first per key.
  void write_tsv(std::ostream& out) const;

 private:
  std::map<std::string, std::vector<Reading>> entries_;
  std::size_t next_seen_ = 0;
  std::size_t max_key_chars_ = 0;
};

ReadingLexicon build_lexicon(std::span<const Aligner::Pair> pairs,
                             const Aligner& aligner);

// Greedy longest-match reading; kana pass through as hiragana. The returned
// alignment has one unit per matched segment.
Alignment base_reading(std::string_view name, const ReadingLexicon& lex);

// Most common reading of every kanji substring across the neighbors; ties go
// to the nearest neighbor. Unalignable neighbors are skipped.
ReadingLexicon neighbor_lexicon(const geo::Neighborhood& n,
                                const Aligner& aligner);

// Replaces the reading of the longest lexicon spans (leftmost first among
// equals, never overlapping) that fall on unit boundaries of `base`.
Alignment substitute(const Alignment& base, const ReadingLexicon& lex);

struct BaselinePrediction {
  std::string base;
  std::string with_neighbors;
};

std::vector<BaselinePrediction> predict(std::span<const geo::Neighborhood> data,
                                        const ReadingLexicon& lex,
                                        const Aligner& aligner);

}  // namespace nbrs::baseline
