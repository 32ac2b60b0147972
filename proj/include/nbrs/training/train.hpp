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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbrs/geodata/neighborhood.hpp"
#include "nbrs/model/example.hpp"
#include "nbrs/model/model.hpp"
#include "nbrs/numerics/optimizer.hpp"

namespace nbrs::training {

struct TrainConfig {
  std::uint64_t steps = 20000;
  std::size_t batch = 64;
  std::uint64_t seed = 1;
  std::uint64_t eval_every = 1000;
  std::string golden_path;
  double lr_scale = 1.0;
  double warmup_steps = 4000.0;
  num::AdamConfig adam;
  std::size_t golden_beam = 1;
  // Older interval checkpoints are removed unless this is set.
  bool keep_checkpoints = false;

  // Throws UsageError on inconsistent settings.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j,
                                   TrainConfig base = {});

// Held-out neighborhoods whose target pronunciation is trusted.
struct GoldenSet {
  std::vector<geo::Neighborhood> items;

  // Throws DataError when an item lacks a pronunciation.
  void validate() const;
};

GoldenSet load_golden(const std::string& path);

// Everything needed to rebuild a trained model.
struct ModelBundle {
  model::ModelConfig config;
  model::Vocabs vocabs;
  num::ParamStore<float> params;

  model::Model<float> build() const;
};

nlohmann::json bundle_header(const model::ModelConfig& cfg,
                             const model::Vocabs& v, std::uint64_t step);
void save_bundle(const std::string& path, const model::ModelConfig& cfg,
                 const model::Vocabs& v, const model::Model<float>& m);
ModelBundle load_bundle(const std::string& path);

// Fraction of hypotheses that differ from their reference string.
double error_rate(std::span<const std::string> hyps,
                  std::span<const std::string> refs);

// Error rate of the top beam hypothesis against each example's target.
double exact_match_error(const model::Model<float>& m,
                         std::span<const model::Example> data,
                         std::size_t beam, std::size_t max_len);

struct MetricsRow {
  std::uint64_t step = 0;
  double loss = 0.0;        // mean training loss since the previous row
  double golden_err = 0.0;  // NaN without a golden set
};

void write_metrics_csv(const std::string& path,
                       std::span<const MetricsRow> rows);

struct TrainResult {
  std::vector<MetricsRow> metrics;
  std::string final_checkpoint;
};

// Runs cfg.steps Adam updates. With a nonempty out_dir the metrics log and
// checkpoints go there. A non-finite loss or gradient throws NumericError
// naming the last checkpoint written.
TrainResult train(model::Model<float>& m, const model::Vocabs& vocabs,
                  std::span<const model::Example> data,
                  std::span<const model::Example> golden,
                  const TrainConfig& cfg, const std::string& out_dir,
                  const std::function<void(const MetricsRow&)>& on_eval = {});

}  // namespace nbrs::training
