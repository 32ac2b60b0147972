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
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nbrs/geodata/feature.hpp"
#include "nbrs/geodata/neighborhood.hpp"
#include "nbrs/model/config.hpp"
#include "nbrs/numerics/rng.hpp"

namespace nbrs::cognate {

using Form = std::vector<std::string>;  // phoneme tokens

struct CognateSet {
  std::string id;
  // Forms in table column order; the target may be absent (to predict).
  std::vector<std::pair<std::string, Form>> forms;
  std::string target;  // empty when no language is designated
  bool synthetic = false;

  const Form* form(const std::string& language) const;
  // Forms other than the target's.
  std::size_t related() const;
};

struct CognateTable {
  std::vector<std::string> languages;
  std::vector<CognateSet> sets;
  std::vector<geo::Diagnostic> diagnostics;
};

// TSV with a header of language names after the id column. Empty cells are
// missing; a "?" cell marks the target. Without a "?" the target is
// `default_target` when that cell is filled, otherwise none.
CognateTable read_table(std::istream& in, const std::string& default_target = "");
CognateTable load_table(const std::string& path, const std::string& default_target = "");

// Writes the table with each set's target cell filled from `predictions`
// (one per set, tokens joined by spaces; empty leaves "?").
void write_table(std::ostream& out, std::span<const std::string> languages,
                 std::span<const CognateSet> sets,
                 std::span<const std::string> predictions = {});

// One set per filled language, with that language as the target.
std::vector<CognateSet> expand_targets(std::span<const CognateSet> sets);

// Target name is the target language id; each related form is a neighbor
// named by its language.
geo::Neighborhood to_neighborhood(const CognateSet& s);
CognateSet from_neighborhood(const geo::Neighborhood& n);

// Smaller transformer in interleaved, token-level mode.
model::ModelConfig cognate_model_config(std::size_t languages);

// Originals followed by `copies` copies of each set, every copy keeping a
// uniformly drawn nonempty proper subset of the related forms. Sets with
// one related form are copied unchanged.
std::vector<CognateSet> augment_drop(std::span<const CognateSet> sets,
                                     std::size_t copies, std::uint64_t seed);

// Per-language n-gram model over tokens with add-one smoothing.
class NgramModel {
 public:
  NgramModel(std::size_t order, std::span<const Form> forms);
  Form sample(num::RngState& rng, std::size_t max_len) const;
  std::size_t order() const { return order_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }

 private:
  std::size_t order_;
  std::vector<std::string> alphabet_;  // index alphabet_.size() is end-of-form
  std::map<std::vector<int>, std::vector<double>> counts_;
};

// Originals followed by `count` synthetic sets sampled from per-language
// n-gram models; targets cycle through the input sets' target languages.
std::vector<CognateSet> augment_ngram(std::span<const CognateSet> sets,
                                      std::size_t order, std::size_t count,
                                      std::uint64_t seed);

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b);
// Edit distance over the longer length; 0 for two empty forms.
double normalized_edit_distance(std::span<const std::string> a,
                                std::span<const std::string> b);
// B-cubed F over the columns of a minimum-edit alignment: gold clusters
// group columns by reference symbol, predicted clusters by predicted symbol.
double bcubed_f(std::span<const std::string> pred, std::span<const std::string> ref);
// Corpus BLEU up to 4-grams; orders with no candidate n-grams are skipped.
double corpus_bleu(std::span<const Form> preds, std::span<const Form> refs);

struct ScoreReport {
  double ned = 0.0;
  double bcubed = 0.0;
  double bleu = 0.0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;  // empty references
};

ScoreReport score(std::span<const Form> preds, std::span<const Form> refs);

}  // namespace nbrs::cognate
