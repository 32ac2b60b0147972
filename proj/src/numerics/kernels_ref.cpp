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

#include "nbrs/numerics/kernels.hpp"

namespace nbrs::num {

std::vector<std::size_t> AttentionLayout::prob_offsets(std::size_t heads) const {
  std::vector<std::size_t> offsets(segments.size() + 1, 0);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    offsets[s + 1] =
        offsets[s] + heads * segments[s].q_len * segments[s].k_len;
  }
  return offsets;
}

std::size_t AttentionLayout::prob_count(std::size_t heads) const {
  return prob_offsets(heads).back();
}

namespace ref {

template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = accumulate ? c[i * n + j] + acc : acc;
    }
  }
}

template <class T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t i = 0; i < m; ++i) acc += a[i * k + p] * b[i * n + j];
      c[p * n + j] = accumulate ? c[p * n + j] + acc : acc;
    }
  }
}

template <class T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      T acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += a[i * n + j] * b[p * n + j];
      c[i * k + p] = accumulate ? c[i * k + p] + acc : acc;
    }
  }
}

template <class T>
void layer_norm(const T* x, const T* gain, const T* bias, T* y, T* mean,
                T* rstd, std::size_t rows, std::size_t d, T eps) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(d);
    const T rs = T{1} / std::sqrt(var + eps);
    mean[r] = mu;
    rstd[r] = rs;
    for (std::size_t j = 0; j < d; ++j) {
      y[r * d + j] = gain[j] * (xr[j] - mu) * rs + bias[j];
    }
  }
}

template <class T>
void layer_norm_backward(const T* x, const T* gain, const T* mean,
                         const T* rstd, const T* dy, T* dx, T* dgain, T* dbias,
                         std::size_t rows, std::size_t d) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * d;
    const T* dyr = dy + r * d;
    T sum_g = 0;
    T sum_gx = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const T xhat = (xr[j] - mean[r]) * rstd[r];
      const T g = dyr[j] * gain[j];
      sum_g += g;
      sum_gx += g * xhat;
      dgain[j] += dyr[j] * xhat;
      dbias[j] += dyr[j];
    }
    const T inv_d = T{1} / static_cast<T>(d);
    for (std::size_t j = 0; j < d; ++j) {
      const T xhat = (xr[j] - mean[r]) * rstd[r];
      const T g = dyr[j] * gain[j];
      dx[r * d + j] += rstd[r] * (g - sum_g * inv_d - xhat * sum_gx * inv_d);
    }
  }
}

template <class T>
std::size_t attention(const T* q, const T* k, const T* v, T* out, T* probs,
                      std::size_t d, std::size_t heads,
                      const AttentionLayout& layout) {
  const std::size_t dh = d / heads;
  const T scale = T{1} / std::sqrt(static_cast<T>(dh));
  const auto offsets = layout.prob_offsets(heads);
  std::size_t empty_rows = 0;
  for (std::size_t s = 0; s < layout.segments.size(); ++s) {
    const auto& seg = layout.segments[s];
    for (std::size_t h = 0; h < heads; ++h) {
      T* p = probs + offsets[s] + h * seg.q_len * seg.k_len;
      for (std::size_t i = 0; i < seg.q_len; ++i) {
        T* prow = p + i * seg.k_len;
        T max_score = -std::numeric_limits<T>::infinity();
        bool any = false;
        for (std::size_t j = 0; j < seg.k_len; ++j) {
          const bool ok =
              layout.valid(seg.k_begin + j) && (!seg.causal || j <= i);
          if (!ok) {
            prow[j] = 0;
            continue;
          }
          T score = 0;
          for (std::size_t c = 0; c < dh; ++c) {
            score += q[(seg.q_begin + i) * d + h * dh + c] *
                     k[(seg.k_begin + j) * d + h * dh + c];
          }
          prow[j] = score * scale;
          if (!any || prow[j] > max_score) max_score = prow[j];
          any = true;
        }
        T* orow = out + (seg.q_begin + i) * d + h * dh;
        for (std::size_t c = 0; c < dh; ++c) orow[c] = 0;
        if (!any) {
          if (h == 0) ++empty_rows;
          for (std::size_t j = 0; j < seg.k_len; ++j) {
            prow[j] = T{1} / static_cast<T>(seg.k_len);
          }
          continue;
        }
        T total = 0;
        for (std::size_t j = 0; j < seg.k_len; ++j) {
          const bool ok =
              layout.valid(seg.k_begin + j) && (!seg.causal || j <= i);
          prow[j] = ok ? std::exp(prow[j] - max_score) : T{0};
          total += prow[j];
        }
        for (std::size_t j = 0; j < seg.k_len; ++j) {
          prow[j] /= total;
          for (std::size_t c = 0; c < dh; ++c) {
            orow[c] += prow[j] * v[(seg.k_begin + j) * d + h * dh + c];
          }
        }
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
  for (std::size_t s = 0; s < layout.segments.size(); ++s) {
    const auto& seg = layout.segments[s];
    for (std::size_t h = 0; h < heads; ++h) {
      const T* p = probs + offsets[s] + h * seg.q_len * seg.k_len;
      for (std::size_t i = 0; i < seg.q_len; ++i) {
        const T* prow = p + i * seg.k_len;
        bool any = false;
        for (std::size_t j = 0; j < seg.k_len; ++j) {
          any = any ||
                (layout.valid(seg.k_begin + j) && (!seg.causal || j <= i));
        }
        if (!any) continue;
        const T* g = dout + (seg.q_begin + i) * d + h * dh;
        std::vector<T> dp(seg.k_len, 0);
        T dot = 0;
        for (std::size_t j = 0; j < seg.k_len; ++j) {
          for (std::size_t c = 0; c < dh; ++c) {
            dp[j] += g[c] * v[(seg.k_begin + j) * d + h * dh + c];
            dv[(seg.k_begin + j) * d + h * dh + c] += prow[j] * g[c];
          }
          dot += prow[j] * dp[j];
        }
        for (std::size_t j = 0; j < seg.k_len; ++j) {
          const T ds = prow[j] * (dp[j] - dot) * scale;
          for (std::size_t c = 0; c < dh; ++c) {
            dq[(seg.q_begin + i) * d + h * dh + c] +=
                ds * k[(seg.k_begin + j) * d + h * dh + c];
            dk[(seg.k_begin + j) * d + h * dh + c] +=
                ds * q[(seg.q_begin + i) * d + h * dh + c];
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

}  // namespace ref
}  // namespace nbrs::num
