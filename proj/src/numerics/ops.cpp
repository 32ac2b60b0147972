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

#include "nbrs/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nbrs::num {
namespace {

Shape with_cols(const Shape& shape, std::size_t cols) {
  Shape out = shape.empty() ? Shape{1} : shape;
  out.back() = cols;
  return out;
}

void require_same(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": shapes " + shape_string(a) +
                         " and " + shape_string(b) + " differ");
  }
}

}  // namespace

template <class T>
Var matmul(Tape<T>& t, Var x, Var w) {
  const Array<T>& xv = t.value(x);
  const Array<T>& wv = t.value(w);
  if (wv.rank() != 2 || xv.cols() != wv.dim(0)) {
    throw DimensionError("matmul: " + shape_string(xv.shape()) + " x " +
                         shape_string(wv.shape()));
  }
  const std::size_t m = xv.rows(), k = xv.cols(), n = wv.dim(1);
  Array<T> out(with_cols(xv.shape(), n));
  par::matmul(xv.data(), wv.data(), out.data(), m, k, n, false);
  return t.push(std::move(out), {x, w},
                [x, w, m, k, n](Tape<T>& t, const Array<T>& g) {
                  if (t.needs_grad(x)) {
                    par::matmul_nt(g.data(), t.value(w).data(),
                                   t.grad(x).data(), m, n, k, true);
                  }
                  if (t.needs_grad(w)) {
                    par::matmul_tn(t.value(x).data(), g.data(),
                                   t.grad(w).data(), m, k, n, true);
                  }
                });
}

template <class T>
Var add_bias(Tape<T>& t, Var x, Var b) {
  const Array<T>& xv = t.value(x);
  const Array<T>& bv = t.value(b);
  if (bv.size() != xv.cols()) {
    throw DimensionError("add_bias: bias " + shape_string(bv.shape()) +
                         " for input " + shape_string(xv.shape()));
  }
  Array<T> out = xv;
  const std::size_t rows = xv.rows(), cols = xv.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
  }
  return t.push(std::move(out), {x, b},
                [x, b, rows, cols](Tape<T>& t, const Array<T>& g) {
                  if (t.needs_grad(x)) {
                    auto& gx = t.grad(x);
                    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                  }
                  if (t.needs_grad(b)) {
                    auto& gb = t.grad(b);
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t c = 0; c < cols; ++c) {
                        gb[c] += g[r * cols + c];
                      }
                    }
                  }
                });
}

template <class T>
Var add(Tape<T>& t, Var a, Var b) {
  require_same(t.value(a).shape(), t.value(b).shape(), "add");
  Array<T> out = t.value(a);
  const Array<T>& bv = t.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape<T>& t, const Array<T>& g) {
    for (Var v : {a, b}) {
      if (!t.needs_grad(v)) continue;
      auto& gv = t.grad(v);
      for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  });
}

template <class T>
Var scale(Tape<T>& t, Var x, T factor) {
  Array<T> out = t.value(x);
  for (auto& v : out.values()) v *= factor;
  return t.push(std::move(out), {x}, [x, factor](Tape<T>& t, const Array<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

template <class T>
Var relu(Tape<T>& t, Var x) {
  Array<T> out = t.value(x);
  for (auto& v : out.values()) v = v > T{0} ? v : T{0};
  return t.push(std::move(out), {x}, [x](Tape<T>& t, const Array<T>& g) {
    const auto& xv = t.value(x);
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > T{0}) gx[i] += g[i];
    }
  });
}

template <class T>
Var dropout(Tape<T>& t, Var x, double rate, RngState& rng) {
  if (rate <= 0.0) return x;
  const Array<T>& xv = t.value(x);
  auto mask = std::make_shared<std::vector<T>>(xv.size(), T{0});
  const T keep = rate >= 1.0 ? T{0} : static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : *mask) m = rng.uniform() < rate ? T{0} : keep;
  Array<T> out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*mask)[i];
  return t.push(std::move(out), {x}, [x, mask](Tape<T>& t, const Array<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += (*mask)[i] * g[i];
  });
}

template <class T>
Var row_dropout(Tape<T>& t, Var x, double rate, RngState& rng) {
  if (rate <= 0.0) return x;
  const Array<T>& xv = t.value(x);
  const std::size_t rows = xv.rows(), cols = xv.cols();
  auto mask = std::make_shared<std::vector<T>>(rows, T{0});
  const T keep = rate >= 1.0 ? T{0} : static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : *mask) m = rng.uniform() < rate ? T{0} : keep;
  Array<T> out = xv;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= (*mask)[r];
  }
  return t.push(std::move(out), {x},
                [x, mask, cols](Tape<T>& t, const Array<T>& g) {
                  auto& gx = t.grad(x);
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    gx[i] += (*mask)[i / cols] * g[i];
                  }
                });
}

template <class T>
Var layer_norm(Tape<T>& t, Var x, Var gain, Var bias, T eps) {
  const Array<T>& xv = t.value(x);
  const std::size_t rows = xv.rows(), d = xv.cols();
  if (t.value(gain).size() != d || t.value(bias).size() != d) {
    throw DimensionError("layer_norm: gain/bias do not match width " +
                         std::to_string(d));
  }
  auto stats = std::make_shared<std::vector<T>>(2 * rows);
  Array<T> out(xv.shape());
  par::layer_norm(xv.data(), t.value(gain).data(), t.value(bias).data(),
                  out.data(), stats->data(), stats->data() + rows, rows, d,
                  eps);
  return t.push(
      std::move(out), {x, gain, bias},
      [x, gain, bias, stats, rows, d](Tape<T>& t, const Array<T>& g) {
        // dx is always materialised; the kernel accumulates gain/bias too.
        auto& gx = t.grad(x);
        auto& gg = t.grad(gain);
        auto& gb = t.grad(bias);
        par::layer_norm_backward(t.value(x).data(), t.value(gain).data(),
                                 stats->data(), stats->data() + rows, g.data(),
                                 gx.data(), gg.data(), gb.data(), rows, d);
      });
}

template <class T>
Var gather_rows(Tape<T>& t, Var x, const std::vector<int>& rows) {
  const Array<T>& xv = t.value(x);
  const std::size_t n = xv.rows(), cols = xv.cols();
  Array<T> out(Shape{rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= n) {
      throw DimensionError("gather_rows: index " + std::to_string(rows[i]) +
                           " outside [0, " + std::to_string(n) + ")");
    }
    std::copy_n(xv.data() + static_cast<std::size_t>(rows[i]) * cols, cols,
                out.data() + i * cols);
  }
  return t.push(std::move(out), {x},
                [x, rows, cols](Tape<T>& t, const Array<T>& g) {
                  auto& gx = t.grad(x);
                  for (std::size_t i = 0; i < rows.size(); ++i) {
                    T* dst = gx.data() + static_cast<std::size_t>(rows[i]) * cols;
                    const T* src = g.data() + i * cols;
                    for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
                  }
                });
}

template <class T>
Var concat_rows(Tape<T>& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: nothing to concat");
  const std::size_t cols = t.value(parts.front()).cols();
  std::size_t total = 0;
  for (Var p : parts) {
    if (t.value(p).cols() != cols) {
      throw DimensionError("concat_rows: width mismatch");
    }
    total += t.value(p).empty() ? 0 : t.value(p).rows();
  }
  Array<T> out(Shape{total, cols});
  std::size_t offset = 0;
  for (Var p : parts) {
    const auto& pv = t.value(p);
    std::copy(pv.values().begin(), pv.values().end(), out.data() + offset);
    offset += pv.size();
  }
  return t.push(std::move(out), parts, [parts](Tape<T>& t, const Array<T>& g) {
    std::size_t offset = 0;
    for (Var p : parts) {
      const std::size_t n = t.value(p).size();
      if (t.needs_grad(p)) {
        auto& gp = t.grad(p);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
      }
      offset += n;
    }
  });
}

template <class T>
Var concat_cols(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  if (av.rows() != bv.rows()) throw DimensionError("concat_cols: row mismatch");
  const std::size_t rows = av.rows(), ca = av.cols(), cb = bv.cols();
  Array<T> out(Shape{rows, ca + cb});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data() + r * ca, ca, out.data() + r * (ca + cb));
    std::copy_n(bv.data() + r * cb, cb, out.data() + r * (ca + cb) + ca);
  }
  return t.push(std::move(out), {a, b},
                [a, b, rows, ca, cb](Tape<T>& t, const Array<T>& g) {
                  for (std::size_t r = 0; r < rows; ++r) {
                    if (t.needs_grad(a)) {
                      auto& ga = t.grad(a);
                      for (std::size_t c = 0; c < ca; ++c) {
                        ga[r * ca + c] += g[r * (ca + cb) + c];
                      }
                    }
                    if (t.needs_grad(b)) {
                      auto& gb = t.grad(b);
                      for (std::size_t c = 0; c < cb; ++c) {
                        gb[r * cb + c] += g[r * (ca + cb) + ca + c];
                      }
                    }
                  }
                });
}

template <class T>
Var segment_mean(Tape<T>& t, Var x,
                 const std::vector<std::pair<std::size_t, std::size_t>>& segs) {
  const auto& xv = t.value(x);
  const std::size_t cols = xv.cols();
  Array<T> out(Shape{segs.size(), cols});
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const auto [begin, len] = segs[s];
    if (len == 0 || begin + len > xv.rows()) {
      throw DimensionError("segment_mean: bad segment");
    }
    for (std::size_t r = begin; r < begin + len; ++r) {
      for (std::size_t c = 0; c < cols; ++c) out[s * cols + c] += xv[r * cols + c];
    }
    const T inv = T{1} / static_cast<T>(len);
    for (std::size_t c = 0; c < cols; ++c) out[s * cols + c] *= inv;
  }
  return t.push(std::move(out), {x}, [x, segs, cols](Tape<T>& t, const Array<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const auto [begin, len] = segs[s];
      const T inv = T{1} / static_cast<T>(len);
      for (std::size_t r = begin; r < begin + len; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          gx[r * cols + c] += g[s * cols + c] * inv;
        }
      }
    }
  });
}

template <class T>
Var attention(Tape<T>& t, Var q, Var k, Var v, std::size_t heads,
              AttentionLayout layout,
              std::shared_ptr<const Array<T>>* probs_out,
              std::size_t* empty_rows) {
  const auto& qv = t.value(q);
  const auto& kv = t.value(k);
  const auto& vv = t.value(v);
  const std::size_t d = qv.cols();
  if (heads == 0 || d % heads != 0) {
    throw DimensionError("attention: width " + std::to_string(d) +
                         " not divisible by " + std::to_string(heads) +
                         " heads");
  }
  if (kv.cols() != d || vv.cols() != d || kv.rows() != vv.rows()) {
    throw DimensionError("attention: q/k/v shapes " +
                         shape_string(qv.shape()) + ", " +
                         shape_string(kv.shape()) + ", " +
                         shape_string(vv.shape()));
  }
  for (const auto& seg : layout.segments) {
    if (seg.q_begin + seg.q_len > qv.rows() ||
        seg.k_begin + seg.k_len > kv.rows()) {
      throw DimensionError("attention: segment outside q/k rows");
    }
  }
  if (!layout.key_valid.empty() && layout.key_valid.size() != kv.rows()) {
    throw DimensionError("attention: key mask length != key rows");
  }
  auto probs = std::make_shared<Array<T>>(Shape{layout.prob_count(heads)});
  Array<T> out(Shape{qv.rows(), d});
  const std::size_t empty = par::attention(qv.data(), kv.data(), vv.data(),
                                           out.data(), probs->data(), d,
                                           heads, layout);
  if (empty_rows) *empty_rows = empty;
  if (probs_out) *probs_out = probs;
  auto shared_layout = std::make_shared<AttentionLayout>(std::move(layout));
  return t.push(std::move(out), {q, k, v},
                [q, k, v, heads, d, probs, shared_layout](Tape<T>& t,
                                                          const Array<T>& g) {
                  auto& gq = t.grad(q);
                  auto& gk = t.grad(k);
                  auto& gv = t.grad(v);
                  par::attention_backward(t.value(q).data(), t.value(k).data(),
                                          t.value(v).data(), probs->data(),
                                          g.data(), gq.data(), gk.data(),
                                          gv.data(), d, heads, *shared_layout);
                });
}

template <class T>
Var smoothed_cross_entropy(Tape<T>& t, Var logits,
                           const std::vector<int>& targets, double epsilon,
                           int pad_id) {
  const auto& lv = t.value(logits);
  const std::size_t rows = lv.rows(), vocab = lv.cols();
  if (targets.size() != rows) {
    throw DimensionError("smoothed_cross_entropy: " +
                         std::to_string(targets.size()) + " targets for " +
                         std::to_string(rows) + " rows");
  }
  if (epsilon < 0.0 || epsilon >= 1.0) {
    throw DimensionError("smoothed_cross_entropy: epsilon outside [0, 1)");
  }
  std::size_t count = 0;
  for (int tgt : targets) {
    if (tgt == pad_id) continue;
    if (tgt < 0 || static_cast<std::size_t>(tgt) >= vocab) {
      throw DimensionError("smoothed_cross_entropy: target id " +
                           std::to_string(tgt) + " outside vocabulary");
    }
    ++count;
  }
  if (count == 0) {
    throw DimensionError("smoothed_cross_entropy: no supervised positions");
  }
  const T on = static_cast<T>(1.0 - epsilon);
  const T off = vocab > 1 ? static_cast<T>(epsilon / (vocab - 1)) : T{0};
  auto logp = std::make_shared<Array<T>>(log_softmax_rows(lv));
  T total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] == pad_id) continue;
    const T* lp = logp->data() + r * vocab;
    T row = 0;
    for (std::size_t j = 0; j < vocab; ++j) {
      row -= (static_cast<int>(j) == targets[r] ? on : off) * lp[j];
    }
    total += row;
  }
  Array<T> out(Shape{1}, total / static_cast<T>(count));
  return t.push(std::move(out), {logits},
                [logits, logp, targets, pad_id, on, off, count, vocab](
                    Tape<T>& t, const Array<T>& g) {
                  auto& gl = t.grad(logits);
                  const T s = g[0] / static_cast<T>(count);
                  for (std::size_t r = 0; r < targets.size(); ++r) {
                    if (targets[r] == pad_id) continue;
                    for (std::size_t j = 0; j < vocab; ++j) {
                      const T q = static_cast<int>(j) == targets[r] ? on : off;
                      gl[r * vocab + j] +=
                          s * (std::exp((*logp)[r * vocab + j]) - q);
                    }
                  }
                });
}

template <class T>
Var sum(Tape<T>& t, Var x) {
  T total = 0;
  for (T v : t.value(x).values()) total += v;
  return t.push(Array<T>(Shape{1}, total), {x}, [x](Tape<T>& t, const Array<T>& g) {
    auto& gx = t.grad(x);
    for (auto& v : gx.values()) v += g[0];
  });
}

template <class T>
Var weighted_sum(Tape<T>& t, Var x, const Array<T>& w) {
  require_same(t.value(x).shape(), w.shape(), "weighted_sum");
  T total = 0;
  const auto& xv = t.value(x);
  for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i] * w[i];
  return t.push(Array<T>(Shape{1}, total), {x}, [x, w](Tape<T>& t, const Array<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0] * w[i];
  });
}

template <class T>
Array<T> log_softmax_rows(const Array<T>& logits) {
  Array<T> out(logits.shape());
  const std::size_t rows = logits.rows(), cols = logits.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = logits.data() + r * cols;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < cols; ++j) mx = std::max(mx, in[j]);
    T total = 0;
    for (std::size_t j = 0; j < cols; ++j) total += std::exp(in[j] - mx);
    const T lse = mx + std::log(total);
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = in[j] - lse;
  }
  return out;
}

#define NBRS_INSTANTIATE(T)                                                    \
  template Var matmul<T>(Tape<T>&, Var, Var);                                  \
  template Var add_bias<T>(Tape<T>&, Var, Var);                                \
  template Var add<T>(Tape<T>&, Var, Var);                                     \
  template Var scale<T>(Tape<T>&, Var, T);                                     \
  template Var relu<T>(Tape<T>&, Var);                                         \
  template Var dropout<T>(Tape<T>&, Var, double, RngState&);                   \
  template Var row_dropout<T>(Tape<T>&, Var, double, RngState&);               \
  template Var layer_norm<T>(Tape<T>&, Var, Var, Var, T);                      \
  template Var gather_rows<T>(Tape<T>&, Var, const std::vector<int>&);         \
  template Var concat_rows<T>(Tape<T>&, const std::vector<Var>&);              \
  template Var concat_cols<T>(Tape<T>&, Var, Var);                             \
  template Var segment_mean<T>(                                                \
      Tape<T>&, Var,                                                           \
      const std::vector<std::pair<std::size_t, std::size_t>>&);                \
  template Var attention<T>(Tape<T>&, Var, Var, Var, std::size_t,              \
                            AttentionLayout, std::shared_ptr<const Array<T>>*, \
                            std::size_t*);                                     \
  template Var smoothed_cross_entropy<T>(Tape<T>&, Var,                        \
                                         const std::vector<int>&, double,      \
                                         int);                                 \
  template Var sum<T>(Tape<T>&, Var);                                          \
  template Var weighted_sum<T>(Tape<T>&, Var, const Array<T>&);                \
  template Array<T> log_softmax_rows<T>(const Array<T>&);

NBRS_INSTANTIATE(float)
NBRS_INSTANTIATE(double)
#undef NBRS_INSTANTIATE

}  // namespace nbrs::num
