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

#include "nbrs/decoding/roc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "nbrs/errors.hpp"

namespace nbrs::decoding {

RocPr roc_pr(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw UsageError("roc_pr: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (int l : labels) pos += l ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw UsageError("roc_pr needs at least one positive and one negative");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocPr r;
  r.points.push_back({std::numeric_limits<double>::infinity(), 0, 0, 0.0, 0.0, 1.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n;) {
    const double thr = scores[order[i]];
    while (i < n && scores[order[i]] == thr) {
      (labels[order[i]] ? tp : fp) += 1;
      ++i;
    }
    OperatingPoint p;
    p.threshold = thr;
    p.tp = tp;
    p.fp = fp;
    p.tpr = static_cast<double>(tp) / static_cast<double>(pos);
    p.fpr = static_cast<double>(fp) / static_cast<double>(neg);
    p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.points.push_back(p);
  }
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    const auto& a = r.points[i - 1];
    const auto& b = r.points[i];
    r.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return r;
}

double best_precision_at_recall(const RocPr& r, double min_recall) {
  double best = -1.0;
  for (const auto& p : r.points) {
    if (p.tp + p.fp > 0 && p.tpr >= min_recall) best = std::max(best, p.precision);
  }
  return best;
}

}  // namespace nbrs::decoding
