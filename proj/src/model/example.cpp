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

#include "nbrs/model/example.hpp"

#include "nbrs/errors.hpp"

namespace nbrs::model {
namespace {

std::vector<int> ids_of(const text::Vocabulary& v, const std::string& s,
                        std::size_t max_len, bool token_level,
                        PrepareStats* stats) {
  text::TokenSeq seq;
  if (token_level) {
    const auto tokens = text::split_tokens(s);
    seq = text::encode_tokens(v, tokens, max_len, false);
  } else {
    seq = text::encode(v, s, max_len, false);
  }
  auto ids = seq.unpadded();
  if (stats) {
    if (seq.truncated) ++stats->truncated;
    for (int id : ids) {
      if (id == text::Vocabulary::kUnk) ++stats->unk_tokens;
    }
  }
  return ids;
}

}  // namespace

nlohmann::json Vocabs::to_json() const {
  return {{"input", input.to_json()},
          {"output", output.to_json()},
          {"token_level", token_level}};
}

Vocabs Vocabs::from_json(const nlohmann::json& j) {
  Vocabs v;
  v.input = text::Vocabulary::from_json(j.at("input"));
  v.output = text::Vocabulary::from_json(j.at("output"));
  v.token_level = j.value("token_level", false);
  return v;
}

Vocabs build_vocabs(std::span<const geo::Neighborhood> data,
                    const ModelConfig& cfg) {
  Vocabs v;
  v.token_level = cfg.token_level;
  if (cfg.token_level) {
    std::vector<std::vector<std::string>> names, prons;
    for (const auto& n : data) {
      names.push_back(text::split_tokens(n.target.name));
      prons.push_back(text::split_tokens(n.target.pron));
      for (const auto& nb : n.neighbors) {
        names.push_back(text::split_tokens(nb.name));
        prons.push_back(text::split_tokens(nb.pron));
      }
    }
    v.input = text::build_token_vocab(names, cfg.input_vocab);
    v.output = text::build_token_vocab(prons, cfg.output_vocab);
  } else {
    std::vector<std::string> names, prons;
    for (const auto& n : data) {
      names.push_back(n.target.name);
      prons.push_back(n.target.pron);
      for (const auto& nb : n.neighbors) {
        names.push_back(nb.name);
        prons.push_back(nb.pron);
      }
    }
    v.input = text::build_vocab(names, cfg.input_vocab);
    v.output = text::build_vocab(prons, cfg.output_vocab);
  }
  return v;
}

Example prepare_example(const geo::Neighborhood& n, const Vocabs& v,
                        const ModelConfig& cfg, PrepareStats* stats) {
  Example ex;
  const bool tok = v.token_level;
  ex.inp = ids_of(v.input, n.target.name, cfg.name_len, tok, stats);
  if (ex.inp.empty()) throw DataError("target '" + n.target.id + "' has an empty name");
  if (n.target.has_pron()) {
    ex.target = ids_of(v.output, n.target.pron, cfg.pron_len - 1, tok, stats);
  }
  if (cfg.use_neighbors) {
    const std::size_t keep = std::min(n.neighbors.size(), cfg.nneigh);
    if (stats) stats->dropped_neighbors += n.neighbors.size() - keep;
    for (std::size_t i = 0; i < keep; ++i) {
      auto name = ids_of(v.input, n.neighbors[i].name, cfg.name_len, tok, stats);
      auto pron = ids_of(v.output, n.neighbors[i].pron, cfg.pron_len, tok, stats);
      if (name.empty() || pron.empty()) continue;
      ex.nb_name.push_back(std::move(name));
      ex.nb_pron.push_back(std::move(pron));
    }
  }
  if (cfg.use_latlong) {
    const auto cell = latlong_cell(n.target.pos.lat, n.target.pos.lon,
                                   cfg.bounds, cfg.latlong_grid_n);
    ex.lat_cell = cell.lat;
    ex.lon_cell = cell.lon;
    if (stats && cell.clamped) ++stats->clamped_coords;
  }
  return ex;
}

std::vector<Example> prepare_examples(std::span<const geo::Neighborhood> data,
                                      const Vocabs& v, const ModelConfig& cfg,
                                      PrepareStats* stats) {
  std::vector<Example> out;
  out.reserve(data.size());
  for (const auto& n : data) out.push_back(prepare_example(n, v, cfg, stats));
  return out;
}

std::string output_string(const Vocabs& v, std::span<const int> ids) {
  if (v.token_level) return text::join_tokens(text::decode_tokens(v.output, ids));
  return text::decode(v.output, ids);
}

}  // namespace nbrs::model
