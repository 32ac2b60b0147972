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

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "nbrs/cli/cli.hpp"
#include "nbrs/errors.hpp"
#include "nbrs/model/config.hpp"
#include "nbrs/training/train.hpp"

namespace nbrs::cli {

nlohmann::json default_config() {
  using nlohmann::json;
  return {
      {"seed", 1},
      {"workers", 0},  // 0: available parallelism
      {"model", model::to_json(model::ModelConfig{})},
      {"train", training::to_json(training::TrainConfig{})},
      {"data",
       {{"radius_km", 10.0},
        {"max_neighbors", 30},
        {"max_plain", 5},
        {"split", "shuffled"},
        {"test_fraction", 0.1},
        {"region_deg", 0.5}}},
      {"decode", {{"beam", 8}}},
      {"detect", {{"beam", 8}, {"min_spelling", 2}, {"min_pron", 2}, {"min_gap", 0.0}}},
      {"stats", {{"trials", 10000}, {"sample", 0}, {"perms", 5000}}},
      {"ablation",
       {{"neighbors", json::array({0, 1, 5, 10, 20, 30})},
        {"latlong", json::array({false, true})},
        {"beam", 1}}},
      {"synth",
       {{"areas", 300},
        {"p1_share", 0.5},
        {"rule", "per_area"},
        {"unpronounced", 0.0},
        {"sets", 300},
        {"missing", 0.1}}},
      {"cognate",
       {{"steps", 30000},
        {"drop_copies", 0},
        {"ngram_order", 3},
        {"ngram_count", 0},
        {"beam", 8},
        {"model", json::object()}}},
  };
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Integer slots reject fractional values; float slots take any number.
bool same_kind(const nlohmann::json& slot, const nlohmann::json& v) {
  if (slot.is_number_float()) return v.is_number();
  if (slot.is_number_integer()) return v.is_number_integer();
  return slot.type() == v.type();
}

void assign(nlohmann::json& slot, const std::string& name, const std::string& text) {
  nlohmann::json v;
  try {
    v = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    v = text;
  }
  if (slot.is_string() && !v.is_string()) v = text;
  if (slot.is_object() && v.is_object()) {
    slot.merge_patch(v);
    return;
  }
  if (!same_kind(slot, v)) {
    throw UsageError("'" + name + "' expects a " + std::string(slot.type_name()) +
                     ", got '" + text + "'");
  }
  slot = std::move(v);
}

}  // namespace

void apply_env(nlohmann::json& cfg, const EnvLookup& env) {
  for (auto& [key, value] : cfg.items()) {
    if (value.is_object()) {
      for (auto& [sub, slot] : value.items()) {
        if (slot.is_object()) continue;
        const std::string name = "NBRS_" + upper(key) + "_" + upper(sub);
        if (auto v = env(name)) assign(slot, name, *v);
      }
    } else {
      const std::string name = "NBRS_" + upper(key);
      if (auto v = env(name)) assign(value, name, *v);
    }
  }
}

void apply_assignment(nlohmann::json& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw UsageError("expected key=value, got '" + std::string(assignment) + "'");
  }
  const std::string path(assignment.substr(0, eq));
  nlohmann::json* slot = &cfg;
  std::size_t from = 0;
  while (true) {
    const auto dot = path.find('.', from);
    const std::string part = path.substr(from, dot == std::string::npos ? dot : dot - from);
    if (!slot->is_object() || !slot->contains(part)) {
      throw UsageError("unknown config key '" + path + "'");
    }
    slot = &(*slot)[part];
    if (dot == std::string::npos) break;
    from = dot + 1;
  }
  assign(*slot, path, std::string(assignment.substr(eq + 1)));
}

nlohmann::json resolve_config(const std::string& config_path, const EnvLookup& env,
                              const std::vector<std::string>& assignments) {
  auto cfg = default_config();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw DataError("cannot open config file '" + config_path + "'");
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("config file '" + config_path + "': " + e.what());
    }
    if (!file.is_object()) throw DataError("config file '" + config_path + "' is not an object");
    for (const auto& [key, value] : file.items()) {
      if (!cfg.contains(key)) throw UsageError("unknown config key '" + key + "' in " + config_path);
      if (cfg[key].is_object()) {
        if (!value.is_object()) throw UsageError("config section '" + key + "' must be an object");
        cfg[key].merge_patch(value);
      } else {
        assign(cfg[key], key, value.dump());
      }
    }
  }
  apply_env(cfg, env);
  for (const auto& a : assignments) apply_assignment(cfg, a);
  return cfg;
}

}  // namespace nbrs::cli
