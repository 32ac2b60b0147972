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

#include "nbrs/numerics/grad_check.hpp"

#include <cmath>

namespace nbrs::num {

GradCheckResult grad_check(const ObjectiveFn& f, ParamStore<double> params,
                           double h, std::size_t samples_per_param,
                           RngState& rng) {
  Gradients<double> analytic = params.zero_gradients();
  f(params, &analytic);
  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = params.value(i);
    std::vector<std::size_t> coords;
    if (value.size() <= samples_per_param) {
      for (std::size_t j = 0; j < value.size(); ++j) coords.push_back(j);
    } else {
      for (std::size_t s = 0; s < samples_per_param; ++s) {
        coords.push_back(rng.below(value.size()));
      }
    }
    for (std::size_t j : coords) {
      const double saved = value[j];
      value[j] = saved + h;
      const double up = f(params, nullptr);
      value[j] = saved - h;
      const double down = f(params, nullptr);
      value[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[i][j];
      const double err = std::abs(a - numeric) / (std::abs(a) + 1e-8);
      ++result.coordinates;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = params.at(i).name;
        result.worst_index = j;
      }
    }
  }
  return result;
}

}  // namespace nbrs::num
