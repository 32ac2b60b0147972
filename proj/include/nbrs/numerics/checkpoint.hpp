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

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "nbrs/numerics/param_store.hpp"

namespace nbrs::num {

// Checkpoint layout:
//   "NBRS1\n"
//   one line of compact JSON (configuration and metadata) + "\n"
//   per parameter, in store order:
//     "<name> <rank> <d0> ... <dk>\n" followed by the row-major values as
//     little-endian IEEE-754 binary32.
// Only parameter values are stored; optimizer moments are not.
struct Checkpoint {
  nlohmann::json header;
  ParamStore<float> params;
};

void write_checkpoint(std::ostream& out, const nlohmann::json& header,
                      const ParamStore<float>& params);
void save_checkpoint(const std::string& path, const nlohmann::json& header,
                     const ParamStore<float>& params);

Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace nbrs::num
