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

#include "nbrs/numerics/array.hpp"

#include <cmath>

namespace nbrs::num {

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <class T>
bool all_finite(std::span<const T> values) {
  for (T v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <class T>
void require_shape(const Array<T>& a, const Shape& shape, const char* what) {
  if (a.shape() != shape) {
    throw DimensionError(std::string(what) + ": expected shape " +
                         shape_string(shape) + ", got " +
                         shape_string(a.shape()));
  }
}

template bool all_finite<float>(std::span<const float>);
template bool all_finite<double>(std::span<const double>);
template void require_shape<float>(const Array<float>&, const Shape&,
                                   const char*);
template void require_shape<double>(const Array<double>&, const Shape&,
                                    const char*);

}  // namespace nbrs::num
