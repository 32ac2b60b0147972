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

#include "nbrs/training/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "nbrs/decoding/beam.hpp"
#include "nbrs/errors.hpp"
#include "nbrs/numerics/checkpoint.hpp"
#include "nbrs/textdata/escape.hpp"

namespace nbrs::training {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (steps == 0) throw UsageError("steps must be positive");
  if (batch == 0) throw UsageError("batch size must be positive");
  if (eval_every == 0) throw UsageError("eval-every must be positive");
  if (!(lr_scale > 0.0)) throw UsageError("lr scale must be positive");
  if (!(warmup_steps > 0.0)) throw UsageError("warmup steps must be positive");
  if (golden_beam == 0) throw UsageError("golden beam must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"steps", c.steps},
          {"batch", c.batch},
          {"seed", c.seed},
          {"eval_every", c.eval_every},
          {"golden_path", c.golden_path},
          {"lr_scale", c.lr_scale},
          {"warmup_steps", c.warmup_steps},
          {"adam_beta1", c.adam.beta1},
          {"adam_beta2", c.adam.beta2},
          {"adam_epsilon", c.adam.epsilon},
          {"golden_beam", c.golden_beam},
          {"keep_checkpoints", c.keep_checkpoints}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  try {
    c.steps = j.value("steps", c.steps);
    c.batch = j.value("batch", c.batch);
    c.seed = j.value("seed", c.seed);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.golden_path = j.value("golden_path", c.golden_path);
    c.lr_scale = j.value("lr_scale", c.lr_scale);
    c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
    c.adam.beta1 = j.value("adam_beta1", c.adam.beta1);
    c.adam.beta2 = j.value("adam_beta2", c.adam.beta2);
    c.adam.epsilon = j.value("adam_epsilon", c.adam.epsilon);
    c.golden_beam = j.value("golden_beam", c.golden_beam);
    c.keep_checkpoints = j.value("keep_checkpoints", c.keep_checkpoints);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("train config: ") + e.what());
  }
  return c;
}

void GoldenSet::validate() const {
  for (const auto& n : items) {
    if (n.target.pron.empty()) {
      throw DataError("golden item " + n.target.id + " has no pronunciation");
    }
  }
}

GoldenSet load_golden(const std::string& path) {
  GoldenSet g;
  g.items = geo::load_neighborhoods(path);
  g.validate();
  return g;
}

model::Model<float> ModelBundle::build() const {
  return model::Model<float>(config, params);
}

nlohmann::json bundle_header(const model::ModelConfig& cfg,
                             const model::Vocabs& v, std::uint64_t step) {
  return {{"format", "nbrs-model"},
          {"config", model::to_json(cfg)},
          {"vocabs", v.to_json()},
          {"step", step}};
}

void save_bundle(const std::string& path, const model::ModelConfig& cfg,
                 const model::Vocabs& v, const model::Model<float>& m) {
  num::save_checkpoint(path, bundle_header(cfg, v, m.params().step()),
                       m.params());
}

ModelBundle load_bundle(const std::string& path) {
  auto ckpt = num::load_checkpoint(path);
  const auto& h = ckpt.header;
  if (!h.contains("config") || !h.contains("vocabs")) {
    throw DataError(path + ": checkpoint header lacks config or vocabularies");
  }
  ModelBundle b;
  b.config = model::config_from_json(h["config"]);
  b.vocabs = model::Vocabs::from_json(h["vocabs"]);
  b.params = std::move(ckpt.params);
  return b;
}

double error_rate(std::span<const std::string> hyps,
                  std::span<const std::string> refs) {
  if (hyps.size() != refs.size()) {
    throw UsageError("error_rate: " + std::to_string(hyps.size()) +
                     " hypotheses for " + std::to_string(refs.size()) +
                     " references");
  }
  if (hyps.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) wrong += hyps[i] != refs[i];
  return static_cast<double>(wrong) / static_cast<double>(hyps.size());
}

double exact_match_error(const model::Model<float>& m,
                         std::span<const model::Example> data,
                         std::size_t beam, std::size_t max_len) {
  if (data.empty()) return 0.0;
  const auto hyps = decoding::decode_all(m, data, beam, max_len);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    wrong += hyps[i].empty() || hyps[i][0].tokens != data[i].target;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

void write_metrics_csv(const std::string& path,
                       std::span<const MetricsRow> rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "step,loss,golden_err\n";
  for (const auto& r : rows) {
    out << r.step << ',' << text::format_double(r.loss) << ','
        << text::format_double(r.golden_err) << '\n';
  }
}

TrainResult train(model::Model<float>& m, const model::Vocabs& vocabs,
                  std::span<const model::Example> data,
                  std::span<const model::Example> golden,
                  const TrainConfig& cfg, const std::string& out_dir,
                  const std::function<void(const MetricsRow&)>& on_eval) {
  cfg.validate();
  if (data.empty()) throw DataError("no training examples");
  for (const auto& ex : golden) {
    if (ex.target.empty()) throw DataError("golden example without a reference");
  }
  const bool write = !out_dir.empty();
  if (write) fs::create_directories(out_dir);

  // Independent streams: batch order, dropout, neighbor order and dropout.
  num::RngState data_rng(cfg.seed);
  num::RngState main_rng(cfg.seed ^ 0x5851F42D4C957F2DULL);
  num::RngState neighbor_rng(cfg.seed ^ 0x2545F4914F6CDD1DULL);

  const num::WarmupRsqrtSchedule schedule{
      cfg.lr_scale, cfg.warmup_steps,
      static_cast<double>(m.config().emb_size)};
  const std::size_t max_len = m.config().pron_len;
  const std::size_t batch = std::min(cfg.batch, data.size());

  TrainResult result;
  std::string last_good;
  auto checkpoint = [&](std::uint64_t step) {
    if (!write) return;
    const std::string path =
        (fs::path(out_dir) / ("checkpoint-" + std::to_string(step) + ".nbrs"))
            .string();
    save_bundle(path, m.config(), vocabs, m);
    if (!cfg.keep_checkpoints && !last_good.empty()) fs::remove(last_good);
    last_good = path;
  };
  auto fail = [&](std::uint64_t step, const std::string& what) {
    throw NumericError(what + " at step " + std::to_string(step) +
                       "; last good checkpoint: " +
                       (last_good.empty() ? "none" : last_good));
  };

  checkpoint(m.params().step());

  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::vector<model::Example> batch_examples;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  for (std::uint64_t s = 1; s <= cfg.steps; ++s) {
    batch_examples.clear();
    while (batch_examples.size() < batch) {
      if (cursor == order.size()) {
        order = data_rng.permutation(data.size());
        cursor = 0;
      }
      batch_examples.push_back(data[order[cursor++]]);
    }
    num::Gradients<float> grads;
    const double loss =
        m.batch_loss(batch_examples, {&main_rng, &neighbor_rng}, &grads);
    const std::uint64_t step = m.params().step() + 1;
    if (!std::isfinite(loss)) fail(step, "non-finite loss");
    try {
      num::adam_step(m.params(), grads, schedule, cfg.adam);
    } catch (const NumericError& e) {
      fail(step, e.what());
    }
    loss_sum += loss;
    ++loss_count;

    if (s % cfg.eval_every == 0 || s == cfg.steps) {
      MetricsRow row;
      row.step = m.params().step();
      row.loss = loss_sum / static_cast<double>(loss_count);
      row.golden_err = golden.empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : exact_match_error(m, golden, cfg.golden_beam, max_len);
      loss_sum = 0.0;
      loss_count = 0;
      result.metrics.push_back(row);
      checkpoint(row.step);
      if (write) {
        write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(),
                          result.metrics);
      }
      if (on_eval) on_eval(row);
    }
  }
  if (write) {
    result.final_checkpoint = (fs::path(out_dir) / "model.nbrs").string();
    save_bundle(result.final_checkpoint, m.config(), vocabs, m);
  }
  return result;
}

}  // namespace nbrs::training
