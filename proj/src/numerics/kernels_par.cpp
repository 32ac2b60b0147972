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

#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nbrs/numerics/kernels.hpp"

namespace nbrs::num {

int kernel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_kernel_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace par {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

}  // namespace

template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n, bool accumulate) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (m * n * k > kParallelWork)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    T* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0;
    }
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = arow[p];
      const T* brow = b + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

template <class T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static) if (m * n * k > kParallelWork)
  for (std::ptrdiff_t p = 0; p < rows; ++p) {
    T* crow = c + p * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const T aip = a[i * k + p];
      if (aip == T{0}) continue;
      const T* brow = b + i * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

template <class T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (m * n * k > kParallelWork)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const T* arow = a + i * n;
    T* crow = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T* brow = b + p * n;
      T acc = 0;
#pragma omp simd reduction(+ : acc)
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      crow[p] = accumulate ? crow[p] + acc : acc;
    }
  }
}

template <class T>
void layer_norm(const T* x, const T* gain, const T* bias, T* y, T* mean,
                T* rstd, std::size_t rows, std::size_t d, T eps) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * d > kParallelWork)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const T* xr = x + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const T c = xr[j] - mu;
      var += c * c;
    }
    var /= static_cast<T>(d);
    const T rs = T{1} / std::sqrt(var + eps);
    mean[r] = mu;
    rstd[r] = rs;
    T* yr = y + r * d;
#pragma omp simd
    for (std::size_t j = 0; j < d; ++j) {
      yr[j] = gain[j] * ((xr[j] - mu) * rs) + bias[j];
    }
  }
}

template <class T>
void layer_norm_backward(const T* x, const T* gain, const T* mean,
                         const T* rstd, const T* dy, T* dx, T* dgain, T* dbias,
                         std::size_t rows, std::size_t d) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rows);
  const T inv_d = T{1} / static_cast<T>(d);
#pragma omp parallel for schedule(static) if (rows * d > kParallelWork)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const T* xr = x + r * d;
    const T* dyr = dy + r * d;
    T sum_g = 0;
    T sum_gx = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const T g = dyr[j] * gain[j];
      sum_g += g;
      sum_gx += g * ((xr[j] - mean[r]) * rstd[r]);
    }
    T* dxr = dx + r * d;
    for (std::size_t j = 0; j < d; ++j) {
      const T xhat = (xr[j] - mean[r]) * rstd[r];
      dxr[j] += rstd[r] * (dyr[j] * gain[j] - sum_g * inv_d -
                           xhat * sum_gx * inv_d);
    }
  }
  const std::ptrdiff_t cols = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for schedule(static) if (rows * d > kParallelWork)
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    T sg = 0;
    T sb = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      const T xhat = (x[r * d + j] - mean[r]) * rstd[r];
      sg += dy[r * d + j] * xhat;
      sb += dy[r * d + j];
    }
    dgain[j] += sg;
    dbias[j] += sb;
  }
}

template <class T>
std::size_t attention(const T* q, const T* k, const T* v, T* out, T* probs,
                      std::size_t d, std::size_t heads,
                      const AttentionLayout& layout) {
  const std::size_t dh = d / heads;
  const T scale = T{1} / std::sqrt(static_cast<T>(dh));
  const auto offsets = layout.prob_offsets(heads);
  const std::ptrdiff_t tasks =
      static_cast<std::ptrdiff_t>(layout.segments.size() * heads);
  std::size_t empty_rows = 0;
  std::size_t work = 0;
  for (const auto& seg : layout.segments) work += seg.q_len * seg.k_len * d;

#pragma omp parallel for schedule(dynamic, 4) reduction(+ : empty_rows) if (work > kParallelWork)
  for (std::ptrdiff_t task = 0; task < tasks; ++task) {
    const std::size_t s = static_cast<std::size_t>(task) / heads;
    const std::size_t h = static_cast<std::size_t>(task) % heads;
    const auto& seg = layout.segments[s];
    T* p = probs + offsets[s] + h * seg.q_len * seg.k_len;
    for (std::size_t i = 0; i < seg.q_len; ++i) {
      const T* qrow = q + (seg.q_begin + i) * d + h * dh;
      T* prow = p + i * seg.k_len;
      T* orow = out + (seg.q_begin + i) * d + h * dh;
      for (std::size_t c = 0; c < dh; ++c) orow[c] = 0;
      const std::size_t visible = seg.causal ? std::min(i + 1, seg.k_len)
                                             : seg.k_len;
      T max_score = -std::numeric_limits<T>::infinity();
      bool any = false;
      for (std::size_t j = 0; j < seg.k_len; ++j) {
        if (j >= visible || !layout.valid(seg.k_begin + j)) {
          prow[j] = -std::numeric_limits<T>::infinity();
          continue;
        }
        const T* krow = k + (seg.k_begin + j) * d + h * dh;
        T score = 0;
#pragma omp simd reduction(+ : score)
        for (std::size_t c = 0; c < dh; ++c) score += qrow[c] * krow[c];
        score *= scale;
        prow[j] = score;
        max_score = any ? std::max(max_score, score) : score;
        any = true;
      }
      if (!any) {
        if (h == 0) ++empty_rows;
        for (std::size_t j = 0; j < seg.k_len; ++j) {
          prow[j] = T{1} / static_cast<T>(seg.k_len);
        }
        continue;
      }
      T total = 0;
      for (std::size_t j = 0; j < seg.k_len; ++j) {
        prow[j] = std::isinf(prow[j]) ? T{0} : std::exp(prow[j] - max_score);
        total += prow[j];
      }
      const T inv_total = T{1} / total;
      for (std::size_t j = 0; j < seg.k_len; ++j) {
        prow[j] *= inv_total;
        const T pj = prow[j];
        if (pj == T{0}) continue;
        const T* vrow = v + (seg.k_begin + j) * d + h * dh;
#pragma omp simd
        for (std::size_t c = 0; c < dh; ++c) orow[c] += pj * vrow[c];
      }
    }
  }
  return empty_rows;
}

template <class T>
void attention_backward(const T* q, const T* k, const T* v, const T* probs,
                        const T* dout, T* dq, T* dk, T* dv, std::size_t d,
                        std::size_t heads, const AttentionLayout& layout) {
  const std::size_t dh = d / heads;
  const T scale = T{1} / std::sqrt(static_cast<T>(dh));
  const auto offsets = layout.prob_offsets(heads);
  std::size_t work = 0;
  for (const auto& seg : layout.segments) work += seg.q_len * seg.k_len * d;
  const std::ptrdiff_t nheads = static_cast<std::ptrdiff_t>(heads);

  // Segments may share key rows (several beams over one memory), so work is
  // split by head: each head owns a disjoint column slice of dq, dk and dv.
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (std::ptrdiff_t h = 0; h < nheads; ++h) {
    std::vector<T> dp;
    for (std::size_t s = 0; s < layout.segments.size(); ++s) {
      const auto& seg = layout.segments[s];
      const T* p = probs + offsets[s] + h * seg.q_len * seg.k_len;
      dp.assign(seg.k_len, T{0});
      for (std::size_t i = 0; i < seg.q_len; ++i) {
        const T* prow = p + i * seg.k_len;
        const std::size_t visible = seg.causal ? std::min(i + 1, seg.k_len)
                                               : seg.k_len;
        bool any = false;
        for (std::size_t j = 0; j < visible && !any; ++j) {
          any = layout.valid(seg.k_begin + j);
        }
        if (!any) continue;
        const T* g = dout + (seg.q_begin + i) * d + h * dh;
        const T* qrow = q + (seg.q_begin + i) * d + h * dh;
        T* dqrow = dq + (seg.q_begin + i) * d + h * dh;
        T dot = 0;
        for (std::size_t j = 0; j < visible; ++j) {
          const T pj = prow[j];
          if (pj == T{0}) {
            dp[j] = 0;
            continue;
          }
          const T* vrow = v + (seg.k_begin + j) * d + h * dh;
          T* dvrow = dv + (seg.k_begin + j) * d + h * dh;
          T acc = 0;
#pragma omp simd reduction(+ : acc)
          for (std::size_t c = 0; c < dh; ++c) acc += g[c] * vrow[c];
#pragma omp simd
          for (std::size_t c = 0; c < dh; ++c) dvrow[c] += pj * g[c];
          dp[j] = acc;
          dot += pj * acc;
        }
        for (std::size_t j = 0; j < visible; ++j) {
          const T pj = prow[j];
          if (pj == T{0}) continue;
          const T ds = pj * (dp[j] - dot) * scale;
          const T* krow = k + (seg.k_begin + j) * d + h * dh;
          T* dkrow = dk + (seg.k_begin + j) * d + h * dh;
#pragma omp simd
          for (std::size_t c = 0; c < dh; ++c) {
            dqrow[c] += ds * krow[c];
            dkrow[c] += ds * qrow[c];
          }
        }
      }
    }
  }
}

#define NBRS_INSTANTIATE(T)                                                   \
  template void matmul<T>(const T*, const T*, T*, std::size_t, std::size_t,   \
                          std::size_t, bool);                                 \
  template void matmul_tn<T>(const T*, const T*, T*, std::size_t,             \
                             std::size_t, std::size_t, bool);                 \
  template void matmul_nt<T>(const T*, const T*, T*, std::size_t,             \
                             std::size_t, std::size_t, bool);                 \
  template void layer_norm<T>(const T*, const T*, const T*, T*, T*, T*,       \
                              std::size_t, std::size_t, T);                   \
  template void layer_norm_backward<T>(const T*, const T*, const T*,          \
                                       const T*, const T*, T*, T*, T*,        \
                                       std::size_t, std::size_t);             \
  template std::size_t attention<T>(const T*, const T*, const T*, T*, T*,     \
                                    std::size_t, std::size_t,                 \
                                    const AttentionLayout&);                  \
  template void attention_backward<T>(const T*, const T*, const T*, const T*, \
                                      const T*, T*, T*, T*, std::size_t,      \
                                      std::size_t, const AttentionLayout&);

NBRS_INSTANTIATE(float)
NBRS_INSTANTIATE(double)
#undef NBRS_INSTANTIATE

}  // namespace par
}  // namespace nbrs::num
