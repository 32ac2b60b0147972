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

#include <functional>
#include <string>

#include "nbrs/numerics/param_store.hpp"

namespace nbrs::num {

// Scalar objective over a parameter store. When `grads` is non-null the
// function must also fill it with the analytic gradient.
using ObjectiveFn =
    std::function<double(const ParamStore<double>&, Gradients<double>* grads)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
};

// Compares analytic gradients against central differences on up to
// `samples_per_param` randomly chosen coordinates of each parameter.
// Error per coordinate: |analytic - numeric| / (|analytic| + 1e-8).
GradCheckResult grad_check(const ObjectiveFn& f, ParamStore<double> params,
                           double h, std::size_t samples_per_param,
                           RngState& rng);

}  // namespace nbrs::num
