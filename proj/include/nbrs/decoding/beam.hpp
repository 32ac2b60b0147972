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
#include <vector>

#include "nbrs/model/model.hpp"
#include "nbrs/numerics/array.hpp"

namespace nbrs::decoding {

struct BeamHypothesis {
  std::vector<int> tokens;  // generated ids, EOS excluded
  double log_likelihood = 0.0;
  bool finished = false;
};

// Source of next-token log-probabilities for a set of prefixes.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual std::size_t vocab_size() const = 0;
  // Rows are [prefixes, vocab_size()].
  virtual num::Array<double> next_log_probs(
      const std::vector<std::vector<int>>& prefixes) = 0;
};

struct BeamOptions {
  std::size_t beam = 8;
  // Generated tokens per hypothesis, EOS included.
  std::size_t max_len = 40;
  int eos = 2;
  std::vector<int> banned{0, 1, 3};  // PAD, BOS, UNK
  bool length_normalize = false;
};

// Up to `beam` finished hypotheses ranked by log-likelihood (descending,
// ties by token sequence). A hypothesis finishes on EOS or when it holds
// max_len tokens.
std::vector<BeamHypothesis> beam_search(StepScorer& scorer,
                                        const BeamOptions& opts);
// Arg-max decoding; equals beam_search with beam = 1.
BeamHypothesis greedy_decode(StepScorer& scorer, const BeamOptions& opts);

// ll[0] - ll[1]; +infinity for a single hypothesis.
double confidence_gap(std::span<const BeamHypothesis> hyps);

template <class T>
class ModelScorer final : public StepScorer {
 public:
  ModelScorer(const model::Model<T>& m, const model::Example& ex)
      : model_(m), memory_(m.encode(ex)) {}

  std::size_t vocab_size() const override { return model_.output_vocab(); }
  num::Array<double> next_log_probs(
      const std::vector<std::vector<int>>& prefixes) override {
    return model_.next_log_probs(memory_, prefixes);
  }
  const typename model::Model<T>::Memory& memory() const { return memory_; }

 private:
  const model::Model<T>& model_;
  typename model::Model<T>::Memory memory_;
};

// Beam-decodes every example (parallel over examples).
template <class T>
std::vector<std::vector<BeamHypothesis>> decode_all(
    const model::Model<T>& m, std::span<const model::Example> examples,
    std::size_t beam, std::size_t max_len);

}  // namespace nbrs::decoding
