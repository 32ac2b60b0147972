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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace nbrs::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kData = 2;
inline constexpr int kNumeric = 3;

// Shipped defaults, one JSON object per section.
nlohmann::json default_config();

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Process environment.
EnvLookup process_env();

// Overrides `cfg` from NBRS_<KEY> for top-level scalars and
// NBRS_<SECTION>_<KEY> for section scalars (names upper-cased).
void apply_env(nlohmann::json& cfg, const EnvLookup& env);

// Applies "a.b.c=value". The path must exist; the value is parsed as JSON,
// or kept as a string when it does not parse, and must match the type of
// the value it replaces.
void apply_assignment(nlohmann::json& cfg, std::string_view assignment);

// Resolution order, later wins: defaults, config file, environment, flags.
nlohmann::json resolve_config(const std::string& config_path, const EnvLookup& env,
                              const std::vector<std::string>& assignments);

// Runs one command line. Diagnostics go to `err`, summaries to `out`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const EnvLookup& env);

int dispatch(int argc, char** argv);

}  // namespace nbrs::cli
