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

// Exhaustive reference values for the paired significance tests.

#include <cstdint>
#include <cstdlib>
#include <vector>

#include "nbrs/evaluation/stats.hpp"

namespace nbrs::testing {

// With the squared differences fixed under sign flips, |t| grows with
// |sum|, so counting sums needs no floating point.
inline double exhaustive_permutation_p(const eval::PairedOutcomes& o) {
  const std::size_t n = o.a.size();
  std::vector<int> d(n);
  long observed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = int(o.a[i]) - int(o.b[i]);
    observed += d[i];
  }
  std::uint64_t extreme = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    long s = 0;
    for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1) ? -d[i] : d[i];
    extreme += std::labs(s) >= std::labs(observed);
  }
  return double(extreme) / double(total);
}

// Enumerates every index sequence of length k.
inline double exhaustive_bootstrap_p(const eval::PairedOutcomes& o,
                                     std::size_t k) {
  const std::size_t n = o.a.size();
  const double ea = o.error_a(), eb = o.error_b();
  const bool a_better = ea < eb, tie = ea == eb;
  std::vector<std::size_t> idx(k, 0);
  std::uint64_t total = 0, not_better = 0;
  for (;;) {
    long wa = 0, wb = 0;
    for (auto i : idx) {
      wa += o.a[i] == 0;
      wb += o.b[i] == 0;
    }
    ++total;
    not_better += tie || !(a_better ? wa < wb : wb < wa);
    std::size_t pos = 0;
    while (pos < k && ++idx[pos] == n) idx[pos++] = 0;
    if (pos == k) break;
  }
  return double(not_better) / double(total);
}

}  // namespace nbrs::testing
