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
#include <sstream>

#include "doctest.h"
#include "nbrs/errors.hpp"
#include "nbrs/numerics/checkpoint.hpp"
#include "nbrs/numerics/grad_check.hpp"
#include "nbrs/numerics/kernels.hpp"
#include "nbrs/numerics/layers.hpp"
#include "nbrs/numerics/ops.hpp"
#include "nbrs/numerics/optimizer.hpp"
#include "gradcheck_suite.hpp"
#include "test_util.hpp"

using namespace nbrs;
using namespace nbrs::num;
using nbrs::testing::max_abs_diff;
using nbrs::testing::random_array;

namespace {

AttentionLayout random_layout(RngState& rng, std::size_t* q_rows,
                              std::size_t* k_rows) {
  AttentionLayout layout;
  std::size_t q = 0, k = 0;
  const std::size_t segs = 1 + rng.below(4);
  for (std::size_t s = 0; s < segs; ++s) {
    AttentionSegment seg;
    seg.causal = rng.bernoulli(0.5);
    seg.q_begin = q;
    seg.q_len = 1 + rng.below(6);
    seg.k_begin = k;
    seg.k_len = seg.causal ? seg.q_len : 1 + rng.below(7);
    q += seg.q_len;
    k += seg.k_len;
    layout.segments.push_back(seg);
  }
  layout.key_valid.resize(k);
  for (auto& m : layout.key_valid) m = rng.bernoulli(0.8) ? 1 : 0;
  *q_rows = q;
  *k_rows = k;
  return layout;
}

// Softmax attention for one head with a single query, computed directly.
std::vector<double> softmax(const std::vector<double>& s) {
  double mx = *std::max_element(s.begin(), s.end());
  std::vector<double> e(s.size());
  double z = 0;
  for (std::size_t i = 0; i < s.size(); ++i) z += e[i] = std::exp(s[i] - mx);
  for (auto& x : e) x /= z;
  return e;
}

}  // namespace

TEST_CASE("serial and parallel matmul kernels agree") {
  RngState rng(7);
  for (auto [m, k, n] : {std::tuple<std::size_t, std::size_t, std::size_t>{
                             3, 5, 4},
                         {64, 48, 80},
                         {130, 257, 33}}) {
    auto a = random_array<float>({m, k}, rng);
    auto b = random_array<float>({k, n}, rng);
    Array<float> c_ref({m, n}), c_par({m, n}, 0.5f), c_acc({m, n}, 0.5f);
    ref::matmul(a.data(), b.data(), c_ref.data(), m, k, n, false);
    par::matmul(a.data(), b.data(), c_par.data(), m, k, n, false);
    CHECK(max_abs_diff(c_ref, c_par) < 1e-4);
    par::matmul(a.data(), b.data(), c_acc.data(), m, k, n, true);
    for (std::size_t i = 0; i < c_acc.size(); ++i) {
      CHECK(c_acc[i] == doctest::Approx(c_ref[i] + 0.5f).epsilon(1e-4));
    }

    // a^T b with a [m,k], b [m,n]
    auto bt = random_array<float>({m, n}, rng);
    Array<float> t_ref({k, n}), t_par({k, n});
    ref::matmul_tn(a.data(), bt.data(), t_ref.data(), m, k, n, false);
    par::matmul_tn(a.data(), bt.data(), t_par.data(), m, k, n, false);
    CHECK(max_abs_diff(t_ref, t_par) < 1e-4);

    // a b^T with a [m,k], b [n,k]
    auto bn = random_array<float>({n, k}, rng);
    Array<float> n_ref({m, n}), n_par({m, n});
    ref::matmul_nt(a.data(), bn.data(), n_ref.data(), m, k, n, false);
    par::matmul_nt(a.data(), bn.data(), n_par.data(), m, k, n, false);
    CHECK(max_abs_diff(n_ref, n_par) < 1e-4);
  }
}

TEST_CASE("serial and parallel layer norm kernels agree") {
  RngState rng(8);
  const std::size_t rows = 300, d = 24;
  auto x = random_array<double>({rows, d}, rng);
  auto g = random_array<double>({d}, rng);
  auto b = random_array<double>({d}, rng);
  auto dy = random_array<double>({rows, d}, rng);
  Array<double> y1({rows, d}), y2({rows, d}), m1({rows}), m2({rows}),
      r1({rows}), r2({rows});
  ref::layer_norm(x.data(), g.data(), b.data(), y1.data(), m1.data(),
                  r1.data(), rows, d, 1e-6);
  par::layer_norm(x.data(), g.data(), b.data(), y2.data(), m2.data(),
                  r2.data(), rows, d, 1e-6);
  CHECK(max_abs_diff(y1, y2) < 1e-12);
  Array<double> dx1({rows, d}), dx2({rows, d}), dg1({d}), dg2({d}), db1({d}),
      db2({d});
  ref::layer_norm_backward(x.data(), g.data(), m1.data(), r1.data(), dy.data(),
                           dx1.data(), dg1.data(), db1.data(), rows, d);
  par::layer_norm_backward(x.data(), g.data(), m1.data(), r1.data(), dy.data(),
                           dx2.data(), dg2.data(), db2.data(), rows, d);
  CHECK(max_abs_diff(dx1, dx2) < 1e-12);
  CHECK(max_abs_diff(dg1, dg2) < 1e-10);
  CHECK(max_abs_diff(db1, db2) < 1e-10);
}

TEST_CASE("serial and parallel attention kernels agree on random layouts") {
  RngState rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t qr = 0, kr = 0;
    const auto layout = random_layout(rng, &qr, &kr);
    const std::size_t heads = 1 + rng.below(3), d = heads * (1 + rng.below(4));
    auto q = random_array<double>({qr, d}, rng, -2, 2);
    auto k = random_array<double>({kr, d}, rng, -2, 2);
    auto v = random_array<double>({kr, d}, rng);
    auto dout = random_array<double>({qr, d}, rng);
    const std::size_t np = layout.prob_count(heads);
    Array<double> o1({qr, d}), o2({qr, d}), p1({np}), p2({np});
    const auto e1 = ref::attention(q.data(), k.data(), v.data(), o1.data(),
                                   p1.data(), d, heads, layout);
    const auto e2 = par::attention(q.data(), k.data(), v.data(), o2.data(),
                                   p2.data(), d, heads, layout);
    CHECK(e1 == e2);
    CHECK(max_abs_diff(o1, o2) < 1e-12);
    CHECK(max_abs_diff(p1, p2) < 1e-12);
    Array<double> dq1({qr, d}), dk1({kr, d}), dv1({kr, d});
    Array<double> dq2({qr, d}), dk2({kr, d}), dv2({kr, d});
    ref::attention_backward(q.data(), k.data(), v.data(), p1.data(),
                            dout.data(), dq1.data(), dk1.data(), dv1.data(), d,
                            heads, layout);
    par::attention_backward(q.data(), k.data(), v.data(), p1.data(),
                            dout.data(), dq2.data(), dk2.data(), dv2.data(), d,
                            heads, layout);
    CHECK(max_abs_diff(dq1, dq2) < 1e-12);
    CHECK(max_abs_diff(dk1, dk2) < 1e-12);
    CHECK(max_abs_diff(dv1, dv2) < 1e-12);

    // Each attention row is a distribution over attendable keys.
    const auto offsets = layout.prob_offsets(heads);
    for (std::size_t s = 0; s < layout.segments.size(); ++s) {
      const auto& seg = layout.segments[s];
      for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < seg.q_len; ++i) {
          const double* row =
              p1.data() + offsets[s] + (h * seg.q_len + i) * seg.k_len;
          double total = 0.0;
          for (std::size_t j = 0; j < seg.k_len; ++j) {
            CHECK(row[j] >= 0.0);
            total += row[j];
            const bool visible = layout.valid(seg.k_begin + j) &&
                                 (!seg.causal || j <= i);
            bool any_visible = false;
            for (std::size_t jj = 0; jj < seg.k_len; ++jj) {
              any_visible |= layout.valid(seg.k_begin + jj) &&
                             (!seg.causal || jj <= i);
            }
            if (any_visible && !visible) CHECK(row[j] == 0.0);
          }
          CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("attention worked examples") {
  Tape<double> t(false);
  SUBCASE("identical keys and values give that value for any query") {
    RngState rng(1);
    auto q = random_array<double>({3, 4}, rng);
    Array<double> kv({5, 4});
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 4; ++c) kv.at(r, c) = 0.25 * (c + 1);
    }
    AttentionLayout layout{{{0, 3, 0, 5, false}}, {}};
    Var o = attention(t, t.constant(q), t.constant(kv), t.constant(kv), 2,
                      layout);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(t.value(o).at(r, c) == doctest::Approx(0.25 * (c + 1)));
      }
    }
  }
  SUBCASE("a query aligned with one of two orthogonal keys picks its value") {
    const double s = 10.0;
    Array<double> q({1, 2}, std::vector<double>{s, 0});
    Array<double> k({2, 2}, std::vector<double>{s, 0, 0, s});
    Array<double> v({2, 2}, std::vector<double>{1, 2, 3, 4});
    AttentionLayout layout{{{0, 1, 0, 2, false}}, {}};
    Var o = attention(t, t.constant(q), t.constant(k), t.constant(v), 1,
                      layout);
    // Scores are q.k / sqrt(2): [s^2/sqrt2, 0].
    const auto p = softmax({s * s / std::sqrt(2.0), 0.0});
    CHECK(t.value(o)[0] == doctest::Approx(p[0] * 1 + p[1] * 3));
    CHECK(t.value(o)[1] == doctest::Approx(p[0] * 2 + p[1] * 4));
    CHECK(t.value(o)[0] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("masked key gets exactly zero weight") {
    RngState rng(2);
    auto q = random_array<double>({2, 4}, rng);
    auto k = random_array<double>({3, 4}, rng);
    auto v = random_array<double>({3, 4}, rng);
    AttentionLayout layout{{{0, 2, 0, 3, false}}, {1, 0, 1}};
    std::shared_ptr<const Array<double>> probs;
    attention(t, t.constant(q), t.constant(k), t.constant(v), 2, layout,
              &probs);
    for (std::size_t h = 0; h < 2; ++h) {
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK((*probs)[(h * 2 + i) * 3 + 1] == 0.0);
      }
    }
  }
  SUBCASE("fully masked query row is uniform with zero output and flagged") {
    RngState rng(3);
    auto q = random_array<double>({1, 2}, rng);
    auto k = random_array<double>({2, 2}, rng);
    auto v = random_array<double>({2, 2}, rng);
    AttentionLayout layout{{{0, 1, 0, 2, false}}, {0, 0}};
    std::shared_ptr<const Array<double>> probs;
    std::size_t empty = 0;
    Var o = attention(t, t.constant(q), t.constant(k), t.constant(v), 1,
                      layout, &probs, &empty);
    CHECK(empty == 1);
    CHECK(t.value(o)[0] == 0.0);
    CHECK(t.value(o)[1] == 0.0);
    CHECK((*probs)[0] == doctest::Approx(0.5));
    CHECK((*probs)[1] == doctest::Approx(0.5));
  }
  SUBCASE("heads must divide the width") {
    Array<double> q({1, 3});
    AttentionLayout layout{{{0, 1, 0, 1, false}}, {}};
    CHECK_THROWS_AS(attention(t, t.constant(q), t.constant(q), t.constant(q),
                              2, layout),
                    DimensionError);
  }
}

TEST_CASE("layer norm worked examples") {
  Tape<double> t(false);
  Var gain = t.constant(Array<double>({2}, 1.0));
  Var bias = t.constant(Array<double>({2}, 0.0));
  SUBCASE("constant row normalizes to zeros") {
    Var y = layer_norm(t, t.constant(Array<double>({1, 2}, 3.0)), gain, bias);
    CHECK(t.value(y)[0] == 0.0);
    CHECK(t.value(y)[1] == 0.0);
  }
  SUBCASE("zero-mean unit-variance row is unchanged") {
    Var y = layer_norm(t, t.constant(Array<double>({1, 2}, {1.0, -1.0})),
                       gain, bias);
    CHECK(t.value(y)[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(t.value(y)[1] == doctest::Approx(-1.0).epsilon(1e-5));
  }
  SUBCASE("random rows get mean 0 and variance 1") {
    RngState rng(4);
    const std::size_t d = 32;
    auto x = random_array<double>({10, d}, rng, -5, 7);
    Var y = layer_norm(t, t.constant(x), t.constant(Array<double>({d}, 1.0)),
                       t.constant(Array<double>({d}, 0.0)));
    for (std::size_t r = 0; r < 10; ++r) {
      double mean = 0, var = 0;
      for (double v : t.value(y).row(r)) mean += v;
      mean /= d;
      for (double v : t.value(y).row(r)) var += (v - mean) * (v - mean);
      var /= d;
      CHECK(std::abs(mean) < 1e-5);
      CHECK(std::abs(var - 1.0) < 1e-4);
    }
  }
}

TEST_CASE("feed-forward worked examples") {
  RngState rng(5);
  ParamStore<double> store;
  auto ff = add_feed_forward(store, "ff", 4, 8, rng);
  SUBCASE("zero input and zero bias give zero output") {
    Tape<double> t(false);
    BoundParams<double> p(t, store);
    Var y = feed_forward(p, ff, t.constant(Array<double>({3, 4})), 0.0,
                         nullptr);
    for (double v : t.value(y).values()) CHECK(v == 0.0);
  }
  SUBCASE("dropout rate 0 is deterministic") {
    auto x = random_array<double>({3, 4}, rng);
    Tape<double> t(false);
    BoundParams<double> p(t, store);
    RngState r1(1), r2(2);
    Var y1 = feed_forward(p, ff, t.constant(x), 0.0, &r1);
    Var y2 = feed_forward(p, ff, t.constant(x), 0.0, &r2);
    CHECK(t.value(y1) == t.value(y2));
  }
  SUBCASE("dropout rate 1 leaves only the output bias") {
    store.value(ff.b2) = Array<double>({4}, {0.5, -1.0, 2.0, 0.0});
    store.value(ff.b1) = Array<double>({8}, 0.3);
    auto x = random_array<double>({3, 4}, rng);
    Tape<double> t(false);
    BoundParams<double> p(t, store);
    RngState r(3);
    Var y = feed_forward(p, ff, t.constant(x), 1.0, &r);
    for (std::size_t row = 0; row < 3; ++row) {
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(t.value(y).at(row, c) == store.value(ff.b2)[c]);
      }
    }
  }
}

TEST_CASE("dropout is the identity at rate 0") {
  RngState rng(6);
  auto x = random_array<float>({4, 5}, rng);
  Tape<float> t;
  Var v = t.variable(x);
  CHECK(dropout(t, v, 0.0, rng).id == v.id);
  CHECK(row_dropout(t, v, 0.0, rng).id == v.id);
}

TEST_CASE("smoothed cross entropy") {
  Tape<double> t(false);
  SUBCASE("uniform logits give ln V for any epsilon") {
    for (double eps : {0.0, 0.2, 0.7}) {
      Var l = smoothed_cross_entropy(t, t.constant(Array<double>({3, 7}, 0.4)),
                                     {1, 5, 6}, eps, 0);
      CHECK(t.value(l)[0] == doctest::Approx(std::log(7.0)));
    }
  }
  SUBCASE("epsilon 0 and a huge margin give near-zero loss") {
    Array<double> logits({2, 4});
    logits.at(0, 2) = 100.0;
    logits.at(1, 3) = 100.0;
    Var l = smoothed_cross_entropy(t, t.constant(logits), {2, 3}, 0.0, 0);
    CHECK(t.value(l)[0] < 1e-30);
  }
  SUBCASE("V=4, epsilon 0.2 matches a direct computation") {
    Array<double> logits({3, 4}, {0.5, -1.0, 2.0, 0.25,   //
                                  1.0, 1.0, 0.0, -3.0,    //
                                  9.0, 9.0, 9.0, 9.0});
    const std::vector<int> targets{2, 0, 1};  // last row is pad
    Var l = smoothed_cross_entropy(t, t.constant(logits), targets, 0.2, 1);
    // Oracle: -sum_c q_c log softmax(z)_c with q = 0.8 on target, 0.2/3 else.
    long double total = 0;
    for (std::size_t r = 0; r < 2; ++r) {
      long double z = 0;
      for (std::size_t c = 0; c < 4; ++c) z += std::exp((long double)logits.at(r, c));
      for (std::size_t c = 0; c < 4; ++c) {
        const long double q = (int)c == targets[r] ? 0.8L : 0.2L / 3;
        total -= q * std::log(std::exp((long double)logits.at(r, c)) / z);
      }
    }
    const double expected = static_cast<double>(total / 2);
    CHECK(t.value(l)[0] == doctest::Approx(expected).epsilon(1e-12));
    // Frozen from an independent numpy evaluation.
    CHECK(t.value(l)[0] == doctest::Approx(0.9944895395376195).epsilon(1e-12));
  }
  SUBCASE("loss is bounded below by the smoothed target entropy") {
    RngState rng(11);
    const double eps = 0.2;
    const double q_other = eps / 4;
    const double entropy =
        -(1 - eps) * std::log(1 - eps) - 4 * q_other * std::log(q_other);
    for (int trial = 0; trial < 20; ++trial) {
      auto logits = random_array<double>({3, 5}, rng, -10, 10);
      Var l = smoothed_cross_entropy(t, t.constant(logits), {1, 2, 4}, eps, 0);
      CHECK(t.value(l)[0] >= entropy - 1e-12);
    }
  }
  SUBCASE("all-pad targets are rejected") {
    CHECK_THROWS_AS(smoothed_cross_entropy(
                        t, t.constant(Array<double>({2, 4})), {0, 0}, 0.1, 0),
                    DimensionError);
  }
}

TEST_CASE("adam") {
  const LrSchedule constant_lr = [](std::uint64_t) { return 0.01; };
  SUBCASE("zero gradients leave parameters untouched") {
    RngState rng(1);
    ParamStore<float> store;
    store.add("a", random_array<float>({3, 3}, rng));
    const auto before = store.value(0);
    adam_step(store, store.zero_gradients(), constant_lr);
    CHECK(store.value(0) == before);
    CHECK(store.step() == 1);
  }
  SUBCASE("closed-form first step on a scalar") {
    ParamStore<double> store;
    store.add("w", Array<double>({1}, 2.0));
    Gradients<double> g{Array<double>({1}, 0.5)};
    AdamConfig cfg;
    adam_step(store, g, constant_lr, cfg);
    // m_hat = g and v_hat = g^2 after bias correction.
    CHECK(store.value(0)[0] ==
          doctest::Approx(2.0 - 0.01 * 0.5 / (0.5 + cfg.epsilon)).epsilon(1e-12));
  }
  SUBCASE("non-finite gradient is rejected and nothing changes") {
    ParamStore<float> store;
    store.add("ok", Array<float>({2}, 1.0f));
    store.add("bad", Array<float>({2}, 1.0f));
    Gradients<float> g{Array<float>({2}, 1.0f),
                       Array<float>({2}, {0.0f, std::nanf("")})};
    try {
      adam_step(store, g, constant_lr);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("bad") != std::string::npos);
    }
    CHECK(store.value(0)[0] == 1.0f);
    CHECK(store.step() == 0);
  }
  SUBCASE("identical runs give bitwise-identical parameters") {
    auto run = [&] {
      RngState rng(99);
      ParamStore<float> store;
      store.add("w", random_array<float>({4, 4}, rng));
      for (int s = 0; s < 10; ++s) {
        Gradients<float> g{random_array<float>({4, 4}, rng)};
        adam_step(store, g, WarmupRsqrtSchedule{1.0, 4, 16});
      }
      return store.value(0);
    };
    CHECK(run() == run());
  }
  SUBCASE("warmup schedule peaks at the warmup step") {
    WarmupRsqrtSchedule s{2.0, 100, 64};
    CHECK(s(100) == doctest::Approx(2.0 / 8.0 / 10.0));
    CHECK(s(50) < s(100));
    CHECK(s(400) == doctest::Approx(2.0 / 8.0 / 20.0));
  }
}

TEST_CASE("rng stream is reproducible") {
  RngState a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.normal() == b.normal());
    CHECK(a.below(17) == b.below(17));
  }
  CHECK(a.position() == b.position());
  RngState c(43);
  CHECK(RngState(42).next_u64() != c.next_u64());
}

namespace {

double check(const ObjectiveFn& f, const ParamStore<double>& store,
             std::uint64_t seed = 1) {
  RngState rng(seed);
  return grad_check(f, store, 1e-5, 20, rng).max_relative_error;
}

}  // namespace

TEST_CASE("gradient check of a hand-written gradient") {
  RngState rng(21);
  ParamStore<double> store;
  store.add("x", random_array<double>({3, 4}, rng));
  auto f = [](const ParamStore<double>& s, Gradients<double>* g) {
    double v = 0;
    for (double x : s.value(0).values()) v += x * x;
    if (g) {
      *g = s.zero_gradients();
      for (std::size_t i = 0; i < s.value(0).size(); ++i) {
        (*g)[0][i] = 2 * s.value(0)[i];
      }
    }
    return v;
  };
  CHECK(check(f, store) < 1e-6);
  // A wrong gradient is caught.
  auto wrong = [&](const ParamStore<double>& s, Gradients<double>* g) {
    const double v = f(s, g);
    if (g) (*g)[0][0] *= 1.01;
    return v;
  };
  CHECK(grad_check(wrong, store, 1e-5, 12, rng).max_relative_error > 1e-3);
}

TEST_CASE("gradient checks per operation") {
  for (const auto& c : nbrs::testing::layer_grad_checks()) {
    INFO(c.name << " worst=" << c.worst_parameter);
    CHECK(c.max_relative_error < 1e-4);
  }
}

TEST_CASE("checkpoint round-trip is byte exact") {
  RngState rng(31);
  ParamStore<float> store;
  store.add("enc.w", random_array<float>({3, 5}, rng));
  store.add("scalar", Array<float>({1}, {-0.0f}));
  store.add("odd", Array<float>({2, 1, 3}, {1e-38f, 3.4e38f, -1.5f, 0.1f, 7, 8}));
  store.set_step(1234);
  nlohmann::json header{{"step", 1234}, {"config", {{"emb_size", 16}}}};
  std::ostringstream first;
  write_checkpoint(first, header, store);
  std::istringstream in(first.str());
  const Checkpoint ck = read_checkpoint(in);
  CHECK(ck.header == header);
  CHECK(ck.params.step() == 1234);
  REQUIRE(ck.params.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ck.params.at(i).name == store.at(i).name);
    CHECK(ck.params.value(i) == store.value(i));
  }
  std::ostringstream second;
  write_checkpoint(second, ck.header, ck.params);
  CHECK(second.str() == first.str());
  CHECK(first.str().rfind("NBRS1\n", 0) == 0);

  std::istringstream bad("NBRS2\n{}\n");
  CHECK_THROWS_AS(read_checkpoint(bad), DataError);
  std::string truncated = first.str();
  truncated.resize(truncated.size() - 3);
  std::istringstream cut(truncated);
  CHECK_THROWS_AS(read_checkpoint(cut), DataError);
}
