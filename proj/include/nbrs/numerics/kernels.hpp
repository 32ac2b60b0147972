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

// Compute kernels behind the autodiff ops. Every kernel exists twice:
// `ref::` is a plain serial loop nest kept as the testing oracle, `par::` is
// the OpenMP version the library runs. Both are deterministic for a fixed
// thread count; the parallel versions only split work over independent
// output rows or attention heads, so results do not depend on the schedule.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nbrs::num {

// One attention block: queries [q_begin, q_begin + q_len) attend keys
// [k_begin, k_begin + k_len). With `causal`, query i sees keys 0..i.
struct AttentionSegment {
  std::size_t q_begin = 0;
  std::size_t q_len = 0;
  std::size_t k_begin = 0;
  std::size_t k_len = 0;
  bool causal = false;
};

struct AttentionLayout {
  std::vector<AttentionSegment> segments;
  // Per key row; empty means every key is attendable.
  std::vector<std::uint8_t> key_valid;

  bool valid(std::size_t key_row) const {
    return key_valid.empty() || key_valid[key_row] != 0;
  }
  // Offsets of each segment's [heads, q_len, k_len] probability block.
  std::vector<std::size_t> prob_offsets(std::size_t heads) const;
  std::size_t prob_count(std::size_t heads) const;
};

namespace ref {

// c[m,n] (+)= a[m,k] b[k,n]
template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n, bool accumulate);
// c[k,n] (+)= a[m,k]^T b[m,n]
template <class T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate);
// c[m,k] (+)= a[m,n] b[k,n]^T
template <class T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate);

template <class T>
void layer_norm(const T* x, const T* gain, const T* bias, T* y, T* mean,
                T* rstd, std::size_t rows, std::size_t d, T eps);
template <class T>
void layer_norm_backward(const T* x, const T* gain, const T* mean,
                         const T* rstd, const T* dy, T* dx, T* dgain, T* dbias,
                         std::size_t rows, std::size_t d);

// Returns the number of query rows that had no attendable key.
template <class T>
std::size_t attention(const T* q, const T* k, const T* v, T* out, T* probs,
                      std::size_t d, std::size_t heads,
                      const AttentionLayout& layout);
template <class T>
void attention_backward(const T* q, const T* k, const T* v, const T* probs,
                        const T* dout, T* dq, T* dk, T* dv, std::size_t d,
                        std::size_t heads, const AttentionLayout& layout);

}  // namespace ref

namespace par {

template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n, bool accumulate);
template <class T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate);
template <class T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate);

template <class T>
void layer_norm(const T* x, const T* gain, const T* bias, T* y, T* mean,
                T* rstd, std::size_t rows, std::size_t d, T eps);
template <class T>
void layer_norm_backward(const T* x, const T* gain, const T* mean,
                         const T* rstd, const T* dy, T* dx, T* dgain, T* dbias,
                         std::size_t rows, std::size_t d);

template <class T>
std::size_t attention(const T* q, const T* k, const T* v, T* out, T* probs,
                      std::size_t d, std::size_t heads,
                      const AttentionLayout& layout);
template <class T>
void attention_backward(const T* q, const T* k, const T* v, const T* probs,
                        const T* dout, T* dq, T* dk, T* dv, std::size_t d,
                        std::size_t heads, const AttentionLayout& layout);

}  // namespace par

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int kernel_threads();
void set_kernel_threads(int n);

}  // namespace nbrs::num
