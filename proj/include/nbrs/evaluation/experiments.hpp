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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nbrs/baseline/baseline.hpp"
#include "nbrs/evaluation/stats.hpp"
#include "nbrs/geodata/neighborhood.hpp"
#include "nbrs/model/model.hpp"
#include "nbrs/training/train.hpp"

namespace nbrs::eval {

struct TrainedModel {
  model::ModelConfig config;
  model::Vocabs vocabs;
  std::optional<model::Model<float>> model;
  training::TrainResult result;
};

// Builds vocabularies from `train`, initializes with tc.seed and trains.
TrainedModel fit(const model::ModelConfig& cfg,
                 std::span<const geo::Neighborhood> train,
                 std::span<const geo::Neighborhood> golden,
                 const training::TrainConfig& tc, const std::string& out_dir = "");

// Top beam hypothesis per neighborhood, as output strings.
std::vector<std::string> predict_strings(const model::Model<float>& m,
                                         const model::Vocabs& v,
                                         std::span<const geo::Neighborhood> data,
                                         std::size_t beam = 1);

std::vector<std::string> references(std::span<const geo::Neighborhood> data);

PairedOutcomes paired_outcomes(std::span<const std::string> a,
                               std::span<const std::string> b,
                               std::span<const std::string> refs);

// Neighbor-reading manipulation.

enum class Condition { kOriginal, kForceP1, kForceP2 };
std::string_view to_string(Condition c);

struct ManipulationSpec {
  std::string spelling;
  std::string p1;
  std::string p2;

  // Throws UsageError when P1 equals P2 or a field is empty.
  void validate() const;
};

// Kana span read for the first occurrence of the spelling in `name`. A
// split at P1 or P2 is preferred when the pron contains either; nullopt
// when neither appears and the alignment does not put the spelling on unit
// boundaries.
std::optional<std::string> reading_of(const baseline::Aligner& al,
                                      std::string_view name, std::string_view pron,
                                      const ManipulationSpec& spec);

// Rewrites, inside every neighbor pron, the reading of each occurrence of
// the spelling. The target is left untouched.
geo::Neighborhood manipulate(const geo::Neighborhood& n,
                             const ManipulationSpec& spec, Condition c,
                             const baseline::Aligner& al,
                             std::size_t* unlocated = nullptr);

struct ManipulationRow {
  std::string spelling;
  Condition condition = Condition::kOriginal;
  std::size_t targets = 0;         // targets containing the spelling
  std::size_t skipped = 0;         // targets without it
  std::size_t unlocated = 0;       // neighbor occurrences left unrewritten
  std::size_t p1_decodings = 0;
  double proportion = 0.0;         // p1_decodings / targets
};

std::vector<ManipulationRow> manipulation_experiment(
    const model::Model<float>& m, const model::Vocabs& v,
    std::span<const geo::Neighborhood> data,
    std::span<const ManipulationSpec> specs, const baseline::Aligner& al,
    std::size_t beam = 1);

void write_manipulation_csv(std::ostream& out,
                            std::span<const ManipulationRow> rows);

// Cross attention for one neighborhood, averaged over layers and heads.

struct AttentionMatrix {
  std::vector<std::string> output_tokens;  // decoded tokens plus "</s>"
  std::vector<std::string> memory_labels;
  num::Array<double> weights;  // [output_tokens, memory_labels]
};

// Decodes with `beam` when `output` is empty, then teacher-forces it.
AttentionMatrix attention_export(const model::Model<float>& m,
                                 const model::Vocabs& v,
                                 const geo::Neighborhood& n,
                                 std::size_t beam = 1,
                                 std::optional<std::string> output = std::nullopt);

nlohmann::json to_json(const AttentionMatrix& a);

// Neighbor-count and lat-long ablation.

struct AblationConfig {
  std::vector<std::size_t> neighbor_counts{0, 1, 5, 10, 20, 30};
  std::vector<bool> latlong{false, true};
  model::ModelConfig base;
  training::TrainConfig train;
  std::size_t beam = 1;
};

struct AblationCell {
  std::size_t neighbors = 0;
  bool latlong = false;
  double error = 0.0;
  std::size_t test_size = 0;
};

// One model per cell; zero neighbors means the neighbor-free model.
std::vector<AblationCell> ablation_sweep(std::span<const geo::Neighborhood> train,
                                         std::span<const geo::Neighborhood> test,
                                         const AblationConfig& cfg);

void write_ablation_csv(std::ostream& out, std::span<const AblationCell> cells);

}  // namespace nbrs::eval
