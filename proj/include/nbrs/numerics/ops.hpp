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
#include <memory>
#include <utility>
#include <vector>

#include "nbrs/numerics/array.hpp"
#include "nbrs/numerics/kernels.hpp"
#include "nbrs/numerics/rng.hpp"
#include "nbrs/numerics/tape.hpp"

// Differentiable operations over rank-2 activations. Anything with more than
// two dimensions is treated as [rows, last_dim].
namespace nbrs::num {

// x[m,k] w[k,n] -> [m,n]
template <class T>
Var matmul(Tape<T>& t, Var x, Var w);

// x[m,n] + b[n] broadcast over rows.
template <class T>
Var add_bias(Tape<T>& t, Var x, Var b);

template <class T>
Var add(Tape<T>& t, Var a, Var b);

template <class T>
Var scale(Tape<T>& t, Var x, T factor);

template <class T>
Var relu(Tape<T>& t, Var x);

// Inverted dropout on individual elements. Rate 0 returns `x` unchanged;
// rate 1 zeroes everything.
template <class T>
Var dropout(Tape<T>& t, Var x, double rate, RngState& rng);

// Drops whole rows (entire token embeddings).
template <class T>
Var row_dropout(Tape<T>& t, Var x, double rate, RngState& rng);

template <class T>
Var layer_norm(Tape<T>& t, Var x, Var gain, Var bias, T eps = T(1e-6));

// Rows of `x` picked by index, repeats allowed. Used for embedding lookup
// and for assembling attention memories.
template <class T>
Var gather_rows(Tape<T>& t, Var x, const std::vector<int>& rows);

template <class T>
Var concat_rows(Tape<T>& t, const std::vector<Var>& parts);

template <class T>
Var concat_cols(Tape<T>& t, Var a, Var b);

// Mean over each [begin, begin + len) row block -> [segments, cols].
template <class T>
Var segment_mean(Tape<T>& t, Var x,
                 const std::vector<std::pair<std::size_t, std::size_t>>& segs);

// Scaled dot-product attention over pre-projected q, k, v. When `probs_out`
// is set it receives the attention weights laid out per
// AttentionLayout::prob_offsets. Fully masked query rows produce zero output
// and uniform weights; their count goes to `empty_rows` if given.
template <class T>
Var attention(Tape<T>& t, Var q, Var k, Var v, std::size_t heads,
              AttentionLayout layout,
              std::shared_ptr<const Array<T>>* probs_out = nullptr,
              std::size_t* empty_rows = nullptr);

// Label-smoothed cross entropy averaged over rows whose target != pad_id.
// The target class gets 1 - epsilon, every other class epsilon / (V - 1).
template <class T>
Var smoothed_cross_entropy(Tape<T>& t, Var logits,
                           const std::vector<int>& targets, double epsilon,
                           int pad_id);

template <class T>
Var sum(Tape<T>& t, Var x);

// sum(x * w) for a fixed weight array; handy for probing gradients.
template <class T>
Var weighted_sum(Tape<T>& t, Var x, const Array<T>& w);

// Row-wise log-softmax of plain values (no tape).
template <class T>
Array<T> log_softmax_rows(const Array<T>& logits);

}  // namespace nbrs::num
