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
#include <string>
#include <vector>

#include "nbrs/cognate/cognate.hpp"

namespace nbrs::synth {

struct CognateSynthConfig {
  std::size_t sets = 300;
  double missing = 0.1;  // per-language chance a reflex is absent
  std::size_t min_syllables = 2;
  std::size_t max_syllables = 3;
  std::uint64_t seed = 1;
};

inline constexpr std::size_t kFamilySize = 5;

// Reflex of a protoform in daughter language `language` (0-based), by an
// ordered list of conditioned sound changes.
cognate::Form sound_change(const cognate::Form& proto, std::size_t language);

struct CognateFamily {
  std::vector<std::string> languages;
  std::vector<cognate::CognateSet> sets;  // no designated targets
  std::vector<cognate::Form> protoforms;  // parallel to sets
};

// At least three reflexes survive in every set.
CognateFamily generate_family(const CognateSynthConfig& cfg);

}  // namespace nbrs::synth
