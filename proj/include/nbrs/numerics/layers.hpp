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

#include <memory>
#include <string>

#include "nbrs/numerics/ops.hpp"
#include "nbrs/numerics/param_store.hpp"

// Transformer sublayers built from ops. Each *Ref holds the store indices of
// the sublayer's parameters; register with add_*, run with the free
// functions over a BoundParams.
namespace nbrs::num {

struct NormRef {
  std::size_t gain = 0;
  std::size_t bias = 0;
};

struct FeedForwardRef {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

// Projections carry no bias: a key bias cannot change attention weights.
struct AttentionRef {
  std::size_t wq = 0, wk = 0, wv = 0, wo = 0;
};

template <class T>
NormRef add_norm(ParamStore<T>& store, const std::string& prefix,
                 std::size_t d) {
  NormRef r;
  r.gain = store.add(prefix + ".gain", Array<T>(Shape{d}, T{1}));
  r.bias = store.add(prefix + ".bias", Array<T>(Shape{d}));
  return r;
}

template <class T>
FeedForwardRef add_feed_forward(ParamStore<T>& store, const std::string& prefix,
                                std::size_t d, std::size_t hidden,
                                RngState& rng) {
  FeedForwardRef r;
  r.w1 = store.add(prefix + ".w1", glorot_uniform<T>(d, hidden, rng));
  r.b1 = store.add(prefix + ".b1", Array<T>(Shape{hidden}));
  r.w2 = store.add(prefix + ".w2", glorot_uniform<T>(hidden, d, rng));
  r.b2 = store.add(prefix + ".b2", Array<T>(Shape{d}));
  return r;
}

template <class T>
AttentionRef add_attention(ParamStore<T>& store, const std::string& prefix,
                           std::size_t d, RngState& rng) {
  AttentionRef r;
  r.wq = store.add(prefix + ".wq", glorot_uniform<T>(d, d, rng));
  r.wk = store.add(prefix + ".wk", glorot_uniform<T>(d, d, rng));
  r.wv = store.add(prefix + ".wv", glorot_uniform<T>(d, d, rng));
  r.wo = store.add(prefix + ".wo", glorot_uniform<T>(d, d, rng));
  return r;
}

template <class T>
Var layer_norm(BoundParams<T>& p, const NormRef& ref, Var x) {
  return layer_norm(p.tape(), x, p(ref.gain), p(ref.bias));
}

// relu(x W1 + b1), ReLU dropout, then W2 + b2. `rng` may be null when
// relu_dropout is 0.
template <class T>
Var feed_forward(BoundParams<T>& p, const FeedForwardRef& ref, Var x,
                 double relu_dropout, RngState* rng) {
  auto& t = p.tape();
  Var h = relu(t, add_bias(t, matmul(t, x, p(ref.w1)), p(ref.b1)));
  if (relu_dropout > 0.0 && rng) h = dropout(t, h, relu_dropout, *rng);
  return add_bias(t, matmul(t, h, p(ref.w2)), p(ref.b2));
}

// Projects queries from `query_in` and keys/values from `memory_in`, attends
// per `layout`, and applies the output projection.
template <class T>
Var multi_head_attention(BoundParams<T>& p, const AttentionRef& ref,
                         Var query_in, Var memory_in, std::size_t heads,
                         AttentionLayout layout,
                         std::shared_ptr<const Array<T>>* probs = nullptr,
                         std::size_t* empty_rows = nullptr) {
  auto& t = p.tape();
  Var q = matmul(t, query_in, p(ref.wq));
  Var k = matmul(t, memory_in, p(ref.wk));
  Var v = matmul(t, memory_in, p(ref.wv));
  Var o = attention(t, q, k, v, heads, std::move(layout), probs, empty_rows);
  return matmul(t, o, p(ref.wo));
}

}  // namespace nbrs::num
