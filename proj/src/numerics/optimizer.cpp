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

#include "nbrs/numerics/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace nbrs::num {

double WarmupRsqrtSchedule::operator()(std::uint64_t step) const {
  const double s = static_cast<double>(std::max<std::uint64_t>(step, 1));
  return scale / std::sqrt(emb_size) *
         std::min(1.0 / std::sqrt(s), s * std::pow(warmup_steps, -1.5));
}

template <class T>
void adam_step(ParamStore<T>& store, const Gradients<T>& grads,
               const LrSchedule& schedule, const AdamConfig& config) {
  if (grads.size() != store.size()) {
    throw DimensionError("adam_step: " + std::to_string(grads.size()) +
                         " gradients for " + std::to_string(store.size()) +
                         " parameters");
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    require_shape(grads[i], store.value(i).shape(), store.at(i).name.c_str());
    if (!all_finite<T>(grads[i].values())) {
      throw NumericError("non-finite gradient for parameter '" +
                         store.at(i).name + "'");
    }
  }
  const std::uint64_t step = store.step() + 1;
  const double lr = schedule(step);
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& g = grads[i];
    if (std::all_of(g.values().begin(), g.values().end(),
                    [](T v) { return v == T{0}; })) {
      continue;
    }
    auto& p = store.at(i);
    for (std::size_t j = 0; j < g.size(); ++j) {
      p.first_moment[j] = b1 * p.first_moment[j] + (T{1} - b1) * g[j];
      p.second_moment[j] = b2 * p.second_moment[j] + (T{1} - b2) * g[j] * g[j];
      const double mhat = static_cast<double>(p.first_moment[j]) / c1;
      const double vhat = static_cast<double>(p.second_moment[j]) / c2;
      p.value[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + config.epsilon));
    }
  }
  store.set_step(step);
}

template void adam_step<float>(ParamStore<float>&, const Gradients<float>&,
                               const LrSchedule&, const AdamConfig&);
template void adam_step<double>(ParamStore<double>&, const Gradients<double>&,
                                const LrSchedule&, const AdamConfig&);

}  // namespace nbrs::num
