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

#include <span>
#include <vector>

namespace nbrs::decoding {

// One operating point: cases with score >= threshold are predicted positive.
struct OperatingPoint {
  double threshold = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  double tpr = 0.0;        // recall
  double fpr = 0.0;
  double precision = 1.0;  // 1 when nothing is predicted positive
};

struct RocPr {
  // Starts at (0, 0) with threshold +infinity, then one point per distinct
  // score in descending order, ending at (1, 1).
  std::vector<OperatingPoint> points;
  double auc = 0.0;  // trapezoidal area under the ROC points
};

// Throws UsageError unless both classes are present.
RocPr roc_pr(std::span<const double> scores, std::span<const int> labels);

// Highest precision among points with recall >= min_recall; -1 if none.
double best_precision_at_recall(const RocPr& r, double min_recall);

}  // namespace nbrs::decoding
