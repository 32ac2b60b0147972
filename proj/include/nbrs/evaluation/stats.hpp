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
#include <cstdint>
#include <span>
#include <vector>

namespace nbrs::eval {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// p -/+ sqrt(p (1 - p) / n).
Interval normal_ci(double p, std::size_t n);

// Per-example correctness of two systems on the same test set.
struct PairedOutcomes {
  std::vector<std::uint8_t> a;
  std::vector<std::uint8_t> b;

  // Throws UsageError on a length mismatch or an empty set.
  void validate() const;
  double error_a() const;
  double error_b() const;
};

struct BootstrapResult {
  double p_value = 1.0;  // fraction of trials where the better system is not better
  bool a_is_better = false;
  Interval ci_a;         // 95% percentile interval of the error rate
  Interval ci_b;
};

// sample == 0 draws n / 2 indices per trial (at least one).
BootstrapResult paired_bootstrap(const PairedOutcomes& o,
                                 std::size_t trials = 10000,
                                 std::size_t sample = 0,
                                 std::uint64_t seed = 1);

// Paired t statistic of a - b; 0 when the differences have no spread and
// zero mean, +/-inf when they have no spread and nonzero mean.
double paired_t(std::span<const double> diffs);

// Sign-flip permutation test on the paired t statistic. Zero-variance
// observed differences give p = 1.
double paired_permutation(const PairedOutcomes& o, std::size_t perms = 5000,
                          std::uint64_t seed = 1);

}  // namespace nbrs::eval
