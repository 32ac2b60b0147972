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


// Serial reference kernels against their OpenMP counterparts. Thread count
// follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <random>
#include <vector>

#include "nbrs/numerics/kernels.hpp"

namespace {

using nbrs::num::AttentionLayout;
using nbrs::num::AttentionSegment;

std::vector<float> random_vector(std::size_t n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

enum class Impl { kRef, kPar };

// Square products of side `range(0)`.
template <Impl I>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1), b = random_vector(n * n, 2);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    if constexpr (I == Impl::kRef) {
      nbrs::num::ref::matmul(a.data(), b.data(), c.data(), n, n, n, false);
    } else {
      nbrs::num::par::matmul(a.data(), b.data(), c.data(), n, n, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <Impl I>
void BM_MatmulNT(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 3), b = random_vector(n * n, 4);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    if constexpr (I == Impl::kRef) {
      nbrs::num::ref::matmul_nt(a.data(), b.data(), c.data(), n, n, n, false);
    } else {
      nbrs::num::par::matmul_nt(a.data(), b.data(), c.data(), n, n, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <Impl I>
void BM_MatmulTN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 5), b = random_vector(n * n, 6);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    if constexpr (I == Impl::kRef) {
      nbrs::num::ref::matmul_tn(a.data(), b.data(), c.data(), n, n, n, false);
    } else {
      nbrs::num::par::matmul_tn(a.data(), b.data(), c.data(), n, n, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

// `range(0)` rows of width 256.
template <Impl I>
void BM_LayerNorm(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 256;
  const auto x = random_vector(rows * d, 7), gain = random_vector(d, 8),
             bias = random_vector(d, 9);
  std::vector<float> y(rows * d), mean(rows), rstd(rows);
  for (auto _ : state) {
    if constexpr (I == Impl::kRef) {
      nbrs::num::ref::layer_norm(x.data(), gain.data(), bias.data(), y.data(), mean.data(),
                                 rstd.data(), rows, d, 1e-6f);
    } else {
      nbrs::num::par::layer_norm(x.data(), gain.data(), bias.data(), y.data(), mean.data(),
                                 rstd.data(), rows, d, 1e-6f);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * d));
}

// `range(0)` batch segments of 20 queries over 60 keys, width 256, 8 heads.
template <Impl I>
void BM_Attention(benchmark::State& state) {
  const auto segments = static_cast<std::size_t>(state.range(0));
  const std::size_t q_len = 20, k_len = 60, d = 256, heads = 8;
  AttentionLayout layout;
  for (std::size_t s = 0; s < segments; ++s) {
    layout.segments.push_back({s * q_len, q_len, s * k_len, k_len, false});
  }
  const auto q = random_vector(segments * q_len * d, 10);
  const auto k = random_vector(segments * k_len * d, 11);
  const auto v = random_vector(segments * k_len * d, 12);
  std::vector<float> out(segments * q_len * d), probs(layout.prob_count(heads));
  for (auto _ : state) {
    if constexpr (I == Impl::kRef) {
      nbrs::num::ref::attention(q.data(), k.data(), v.data(), out.data(), probs.data(), d,
                                heads, layout);
    } else {
      nbrs::num::par::attention(q.data(), k.data(), v.data(), out.data(), probs.data(), d,
                                heads, layout);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(segments * q_len * k_len * d));
}

}  // namespace

BENCHMARK(BM_Matmul<Impl::kRef>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Matmul<Impl::kPar>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_MatmulNT<Impl::kRef>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_MatmulNT<Impl::kPar>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_MatmulTN<Impl::kRef>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_MatmulTN<Impl::kPar>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_LayerNorm<Impl::kRef>)->Arg(64)->Arg(1024)->Arg(8192);
BENCHMARK(BM_LayerNorm<Impl::kPar>)->Arg(64)->Arg(1024)->Arg(8192);
BENCHMARK(BM_Attention<Impl::kRef>)->Arg(4)->Arg(32);
BENCHMARK(BM_Attention<Impl::kPar>)->Arg(4)->Arg(32);

BENCHMARK_MAIN();
