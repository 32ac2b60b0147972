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

#include <cstdint>
#include <functional>

#include "nbrs/numerics/param_store.hpp"

namespace nbrs::num {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
};

// Inverse square root decay after linear warmup:
//   lr(step) = scale * emb_size^-0.5 * min(step^-0.5, step * warmup^-1.5)
struct WarmupRsqrtSchedule {
  double scale = 1.0;
  double warmup_steps = 4000.0;
  double emb_size = 256.0;

  double operator()(std::uint64_t step) const;
};

using LrSchedule = std::function<double(std::uint64_t step)>;

// One Adam update using lr = schedule(store.step() + 1). A parameter whose
// gradient is entirely zero is left untouched, moments included. A
// non-finite gradient aborts the whole step with a NumericError naming the
// parameter; nothing is modified in that case.
template <class T>
void adam_step(ParamStore<T>& store, const Gradients<T>& grads,
               const LrSchedule& schedule, const AdamConfig& config = {});

}  // namespace nbrs::num
