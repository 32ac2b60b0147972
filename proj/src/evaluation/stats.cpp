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

#include "nbrs/evaluation/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nbrs/errors.hpp"
#include "nbrs/numerics/rng.hpp"

namespace nbrs::eval {

namespace {

double error_of(const std::vector<std::uint8_t>& correct) {
  std::size_t wrong = 0;
  for (auto c : correct) wrong += c == 0;
  return static_cast<double>(wrong) / static_cast<double>(correct.size());
}

// Nearest-rank percentile of sorted values.
double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  return sorted[static_cast<std::size_t>(std::llround(pos))];
}

}  // namespace

Interval normal_ci(double p, std::size_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("normal_ci: p must lie in [0, 1]");
  if (n == 0) throw UsageError("normal_ci: n must be positive");
  const double d = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return {p - d, p + d};
}

void PairedOutcomes::validate() const {
  if (a.size() != b.size()) {
    throw UsageError("paired outcomes differ in length: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
  if (a.empty()) throw UsageError("paired outcomes are empty");
}

double PairedOutcomes::error_a() const { return error_of(a); }
double PairedOutcomes::error_b() const { return error_of(b); }

BootstrapResult paired_bootstrap(const PairedOutcomes& o, std::size_t trials,
                                 std::size_t sample, std::uint64_t seed) {
  o.validate();
  if (trials == 0) throw UsageError("bootstrap needs at least one trial");
  const std::size_t n = o.a.size();
  if (sample == 0) sample = std::max<std::size_t>(1, n / 2);
  BootstrapResult r;
  r.a_is_better = o.error_a() < o.error_b();
  const bool tie = o.error_a() == o.error_b();
  num::RngState rng(seed);
  std::vector<double> ea(trials), eb(trials);
  std::size_t not_better = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t wa = 0, wb = 0;
    for (std::size_t k = 0; k < sample; ++k) {
      const auto i = rng.below(n);
      wa += o.a[i] == 0;
      wb += o.b[i] == 0;
    }
    ea[t] = static_cast<double>(wa) / static_cast<double>(sample);
    eb[t] = static_cast<double>(wb) / static_cast<double>(sample);
    const bool better = r.a_is_better ? wa < wb : wb < wa;
    not_better += tie || !better;
  }
  r.p_value = static_cast<double>(not_better) / static_cast<double>(trials);
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  r.ci_a = {percentile(ea, 0.025), percentile(ea, 0.975)};
  r.ci_b = {percentile(eb, 0.025), percentile(eb, 0.975)};
  return r;
}

double paired_t(std::span<const double> d) {
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = d.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  if (sd == 0.0) {
    if (mean == 0.0) return 0.0;
    return mean > 0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
  }
  return mean / (sd / std::sqrt(n));
}

double paired_permutation(const PairedOutcomes& o, std::size_t perms,
                          std::uint64_t seed) {
  o.validate();
  if (perms == 0) throw UsageError("permutation test needs at least one permutation");
  std::vector<double> d(o.a.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = static_cast<double>(o.a[i]) - static_cast<double>(o.b[i]);
  }
  const double mean = [&] {
    double s = 0.0;
    for (double x : d) s += x;
    return s / static_cast<double>(d.size());
  }();
  if (std::all_of(d.begin(), d.end(), [&](double x) { return x == mean; })) return 1.0;
  // Rounding differs between summation orders; equal statistics must tie.
  const double observed = std::abs(paired_t(d)) * (1.0 - 1e-12);
  num::RngState rng(seed);
  std::vector<double> flipped(d.size());
  std::size_t extreme = 0;
  for (std::size_t p = 0; p < perms; ++p) {
    for (std::size_t i = 0; i < d.size(); ++i) flipped[i] = rng.bernoulli(0.5) ? -d[i] : d[i];
    extreme += std::abs(paired_t(flipped)) >= observed;
  }
  return static_cast<double>(extreme) / static_cast<double>(perms);
}

}  // namespace nbrs::eval
