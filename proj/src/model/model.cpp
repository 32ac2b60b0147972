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

#include "nbrs/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nbrs/errors.hpp"
#include "nbrs/textdata/vocab.hpp"

namespace nbrs::model {

using num::Array;
using num::AttentionLayout;
using num::AttentionSegment;
using num::BoundParams;
using num::RngState;
using num::Shape;
using num::Tape;
using num::Var;
using Segments = std::vector<std::pair<std::size_t, std::size_t>>;

namespace {

constexpr std::uint64_t kNeighborStream = 0x9E3779B97F4A7C15ull;
constexpr std::size_t kMinPositions = 256;

// Ragged concatenation of id sequences.
struct Ragged {
  std::vector<int> ids;
  std::vector<std::size_t> positions;
  Segments segs;

  void add(std::span<const int> seq) {
    segs.emplace_back(ids.size(), seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
      ids.push_back(seq[i]);
      positions.push_back(i);
    }
  }
};

AttentionLayout self_layout(const Segments& segs, bool causal) {
  AttentionLayout l;
  for (const auto& [b, n] : segs) l.segments.push_back({b, n, b, n, causal});
  return l;
}

std::vector<int> strip_pad(std::span<const int> ids) {
  std::vector<int> out;
  for (int id : ids) {
    if (id != text::Vocabulary::kPad) out.push_back(id);
  }
  return out;
}

template <class T>
EncoderRef add_encoder(num::ParamStore<T>& s, const std::string& prefix,
                       const ModelConfig& c, RngState& rng) {
  EncoderRef e;
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string p = prefix + ".l" + std::to_string(l);
    EncoderLayerRef r;
    r.norm1 = num::add_norm(s, p + ".norm1", c.emb_size);
    r.att = num::add_attention(s, p + ".att", c.emb_size, rng);
    r.norm2 = num::add_norm(s, p + ".norm2", c.emb_size);
    r.ff = num::add_feed_forward(s, p + ".ff", c.emb_size, c.hidden, rng);
    e.layers.push_back(r);
  }
  e.final_norm = num::add_norm(s, prefix + ".final_norm", c.emb_size);
  return e;
}

}  // namespace

std::string label_string(const MemoryLabel& l) {
  switch (l.kind) {
    case MemoryLabel::Kind::kTarget:
      return "target[" + std::to_string(l.position) + "]";
    case MemoryLabel::Kind::kNeighborName:
      return "neighbor" + std::to_string(l.neighbor) + ".name[" +
             std::to_string(l.position) + "]";
    case MemoryLabel::Kind::kNeighborPron:
      return "neighbor" + std::to_string(l.neighbor) + ".pron[" +
             std::to_string(l.position) + "]";
    case MemoryLabel::Kind::kLatLong:
      return "latlong";
  }
  return "?";
}

template <class T>
Array<T> sinusoidal_positions(std::size_t positions, std::size_t d) {
  Array<T> pe(Shape{positions, d});
  for (std::size_t pos = 0; pos < positions; ++pos) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double angle =
          static_cast<double>(pos) /
          std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d));
      pe.at(pos, i) = static_cast<T>(std::sin(angle));
      if (i + 1 < d) pe.at(pos, i + 1) = static_cast<T>(std::cos(angle));
    }
  }
  return pe;
}

template <class T>
Model<T>::Model(const ModelConfig& cfg, std::size_t input_vocab,
                std::size_t output_vocab, std::uint64_t init_seed)
    : cfg_(cfg), input_vocab_(input_vocab), output_vocab_(output_vocab) {
  cfg_.validate();
  if (input_vocab <= text::Vocabulary::kReserved ||
      output_vocab <= text::Vocabulary::kReserved) {
    throw UsageError("vocabularies must hold at least one real symbol");
  }
  RngState rng(init_seed);
  RngState neighbor_rng(init_seed ^ kNeighborStream);
  register_params(rng, neighbor_rng);
}

template <class T>
Model<T>::Model(const ModelConfig& cfg, num::ParamStore<T> params)
    : cfg_(cfg) {
  cfg_.validate();
  if (!params.contains("embed_name") || !params.contains("embed_pron")) {
    throw DataError("parameters lack embedding tables");
  }
  input_vocab_ = params.value("embed_name").dim(0);
  output_vocab_ = params.value("embed_pron").dim(0);
  RngState rng(0), neighbor_rng(0);
  register_params(rng, neighbor_rng);
  if (params.size() != params_.size()) {
    throw DataError("checkpoint has " + std::to_string(params.size()) +
                    " parameters, configuration expects " +
                    std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& name = params_.at(i).name;
    if (!params.contains(name)) {
      throw DataError("checkpoint lacks parameter '" + name + "'");
    }
    const auto& src = params.at(params.index(name));
    if (src.value.shape() != params_.value(i).shape()) {
      throw DataError("parameter '" + name + "' has shape " +
                      num::shape_string(src.value.shape()) + ", expected " +
                      num::shape_string(params_.value(i).shape()));
    }
    params_.at(i) = src;
  }
  params_.set_step(params.step());
}

template <class T>
void Model<T>::register_params(RngState& rng, RngState& neighbor_rng) {
  const std::size_t d = cfg_.emb_size;
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  auto& s = params_;
  embed_name_ = s.add("embed_name",
                      num::normal_init<T>(Shape{input_vocab_, d}, sd, rng));
  embed_pron_ = s.add("embed_pron",
                      num::normal_init<T>(Shape{output_vocab_, d}, sd, rng));
  enc_inp_ = add_encoder(s, "enc_inp", cfg_, rng);
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const std::string p = "dec.l" + std::to_string(l);
    DecoderLayerRef r;
    r.norm1 = num::add_norm(s, p + ".norm1", d);
    r.self_att = num::add_attention(s, p + ".self", d, rng);
    r.norm2 = num::add_norm(s, p + ".norm2", d);
    r.cross_att = num::add_attention(s, p + ".cross", d, rng);
    r.norm3 = num::add_norm(s, p + ".norm3", d);
    r.ff = num::add_feed_forward(s, p + ".ff", d, cfg_.hidden, rng);
    dec_.layers.push_back(r);
  }
  dec_.final_norm = num::add_norm(s, "dec.final_norm", d);
  out_w_ = s.add("out.w", num::glorot_uniform<T>(d, output_vocab_, rng));
  out_b_ = s.add("out.b", Array<T>(Shape{output_vocab_}));

  if (cfg_.use_neighbors) {
    enc_name_ = add_encoder(s, "enc_name", cfg_, neighbor_rng);
    enc_pron_ = add_encoder(s, "enc_pron", cfg_, neighbor_rng);
    source_tokens_ = s.add(
        "source_tokens", num::normal_init<T>(Shape{cfg_.nneigh, d}, sd,
                                             neighbor_rng));
  }
  if (cfg_.use_latlong) {
    lat_table_ = s.add("latlong.lat",
                       num::normal_init<T>(Shape{cfg_.latlong_grid_n, d / 2},
                                           sd, neighbor_rng));
    lon_table_ = s.add("latlong.lon",
                       num::normal_init<T>(Shape{cfg_.latlong_grid_n, d / 2},
                                           sd, neighbor_rng));
  }
  positional_ = sinusoidal_positions<T>(
      std::max({kMinPositions, cfg_.name_len + 2, cfg_.pron_len + 2}), d);
}

template <class T>
Var Model<T>::sublayer_dropout(Tape<T>& t, Var x, RngState* rng) const {
  if (!rng || cfg_.dropout <= 0.0) return x;
  return num::dropout(t, x, cfg_.dropout, *rng);
}

template <class T>
Var Model<T>::embed(BoundParams<T>& p, std::size_t table,
                    const std::vector<int>& ids,
                    const std::vector<std::size_t>& positions,
                    RngState* rng) const {
  auto& t = p.tape();
  const std::size_t d = cfg_.emb_size;
  Array<T> pe(Shape{ids.size(), d});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (positions[r] >= positional_.rows()) {
      throw DimensionError("sequence position " + std::to_string(positions[r]) +
                           " exceeds the positional table");
    }
    std::copy_n(positional_.row(positions[r]).data(), d, pe.row(r).data());
  }
  Var x = num::gather_rows(t, p(table), ids);
  x = num::scale(t, x, static_cast<T>(std::sqrt(static_cast<double>(d))));
  x = num::add(t, x, t.constant(std::move(pe)));
  if (rng && cfg_.dropout > 0.0) x = num::row_dropout(t, x, cfg_.dropout, *rng);
  return x;
}

template <class T>
Var Model<T>::run_encoder(BoundParams<T>& p, const EncoderRef& enc, Var x,
                          const Segments& segs, RngState* rng) const {
  auto& t = p.tape();
  const AttentionLayout layout = self_layout(segs, false);
  const double relu_rate = rng ? cfg_.dropout : 0.0;
  for (const auto& layer : enc.layers) {
    Var h = num::layer_norm(p, layer.norm1, x);
    Var a = num::multi_head_attention(p, layer.att, h, h, cfg_.heads, layout);
    x = num::add(t, x, sublayer_dropout(t, a, rng));
    h = num::layer_norm(p, layer.norm2, x);
    x = num::add(t, x, num::feed_forward(p, layer.ff, h, relu_rate, rng));
  }
  return num::layer_norm(p, enc.final_norm, x);
}

template <class T>
typename Model<T>::MemoryVar Model<T>::assemble(BoundParams<T>& p,
                                                std::span<const Example> batch,
                                                ForwardRng rng,
                                                bool with_labels) const {
  auto& t = p.tape();
  const std::size_t B = batch.size();
  using Kind = MemoryLabel::Kind;

  Ragged inp;
  for (const auto& ex : batch) {
    auto ids = strip_pad(ex.inp);
    if (ids.empty()) throw DataError("target name has no non-PAD tokens");
    if (ids.size() > cfg_.name_len) ids.resize(cfg_.name_len);
    inp.add(ids);
  }
  Var h_inp = run_encoder(p, enc_inp_,
                          embed(p, embed_name_, inp.ids, inp.positions, rng.main),
                          inp.segs, rng.main);
  std::vector<Var> parts{h_inp};
  std::size_t rows_so_far = inp.ids.size();

  // Neighbor order per example; order[b][k] is the neighbor placed k-th.
  std::vector<std::vector<std::size_t>> order(B);
  std::vector<std::size_t> nb_base(B, 0);
  Ragged names, prons;
  std::size_t name_off = 0, pron_off = 0;
  const bool neighbors = cfg_.use_neighbors;
  if (neighbors) {
    std::size_t g = 0;
    for (std::size_t b = 0; b < B; ++b) {
      const auto& ex = batch[b];
      if (ex.nb_name.size() != ex.nb_pron.size()) {
        throw DimensionError("neighbor name/pron counts differ");
      }
      const std::size_t n = std::min(ex.nb_name.size(), cfg_.nneigh);
      nb_base[b] = g;
      order[b].resize(n);
      std::iota(order[b].begin(), order[b].end(), std::size_t{0});
      if (rng.neighbor && cfg_.shuffle_neighbors) rng.neighbor->shuffle(order[b]);
      for (std::size_t j = 0; j < n; ++j) {
        const auto name = strip_pad(ex.nb_name[j]);
        const auto pron = strip_pad(ex.nb_pron[j]);
        if (name.empty() || pron.empty()) {
          throw DataError("neighbor with an empty name or pronunciation");
        }
        names.add(name);
        prons.add(pron);
      }
      g += n;
    }
  }
  const std::size_t total_nb = names.segs.size();
  if (total_nb > 0) {
    // Source id of each global neighbor = its slot in the shuffled order.
    std::vector<int> src(total_nb, 0);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t k = 0; k < order[b].size(); ++k) {
        src[nb_base[b] + order[b][k]] = static_cast<int>(k);
      }
    }
    Var e_name = run_encoder(
        p, enc_name_,
        embed(p, embed_name_, names.ids, names.positions, rng.neighbor),
        names.segs, rng.neighbor);
    Var e_pron = run_encoder(
        p, enc_pron_,
        embed(p, embed_pron_, prons.ids, prons.positions, rng.neighbor),
        prons.segs, rng.neighbor);
    if (cfg_.interleave) {
      std::vector<int> name_src, pron_src;
      for (std::size_t g = 0; g < total_nb; ++g) {
        name_src.insert(name_src.end(), names.segs[g].second, src[g]);
        pron_src.insert(pron_src.end(), prons.segs[g].second, src[g]);
      }
      e_name = num::add(t, e_name, num::gather_rows(t, p(source_tokens_), name_src));
      e_pron = num::add(t, e_pron, num::gather_rows(t, p(source_tokens_), pron_src));
    } else {
      Var src_rows = num::gather_rows(t, p(source_tokens_), src);
      e_name = num::add(t, num::segment_mean(t, e_name, names.segs), src_rows);
      e_pron = num::add(t, num::segment_mean(t, e_pron, prons.segs), src_rows);
    }
    name_off = rows_so_far;
    rows_so_far += t.value(e_name).rows();
    pron_off = rows_so_far;
    rows_so_far += t.value(e_pron).rows();
    parts.push_back(e_name);
    parts.push_back(e_pron);
  }
  std::size_t ll_off = 0;
  if (cfg_.use_latlong) {
    std::vector<int> lat, lon;
    for (const auto& ex : batch) {
      if (ex.lat_cell >= cfg_.latlong_grid_n || ex.lon_cell >= cfg_.latlong_grid_n) {
        throw DimensionError("lat-long cell outside the grid");
      }
      lat.push_back(static_cast<int>(ex.lat_cell));
      lon.push_back(static_cast<int>(ex.lon_cell));
    }
    ll_off = rows_so_far;
    parts.push_back(num::concat_cols(t, num::gather_rows(t, p(lat_table_), lat),
                                     num::gather_rows(t, p(lon_table_), lon)));
  }
  Var source = parts.size() == 1 ? parts[0] : num::concat_rows(t, parts);

  MemoryVar m;
  std::vector<int> idx;
  const double nd = cfg_.neighbor_dropout;
  auto keep = [&]() -> std::uint8_t {
    if (!rng.neighbor || nd <= 0.0) return 1;
    return rng.neighbor->bernoulli(nd) ? 0 : 1;
  };
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t begin = idx.size();
    const auto [ib, il] = inp.segs[b];
    for (std::size_t i = 0; i < il; ++i) {
      idx.push_back(static_cast<int>(ib + i));
      m.valid.push_back(1);
      if (with_labels) m.labels.push_back({Kind::kTarget, 0, i});
    }
    for (std::size_t k = 0; k < order[b].size(); ++k) {
      const std::size_t j = order[b][k];
      const std::size_t g = nb_base[b] + j;
      if (cfg_.interleave) {
        const std::uint8_t name_ok = keep();
        const std::uint8_t pron_ok = keep();
        for (std::size_t i = 0; i < names.segs[g].second; ++i) {
          idx.push_back(static_cast<int>(name_off + names.segs[g].first + i));
          m.valid.push_back(name_ok);
          if (with_labels) m.labels.push_back({Kind::kNeighborName, j, i});
        }
        for (std::size_t i = 0; i < prons.segs[g].second; ++i) {
          idx.push_back(static_cast<int>(pron_off + prons.segs[g].first + i));
          m.valid.push_back(pron_ok);
          if (with_labels) m.labels.push_back({Kind::kNeighborPron, j, i});
        }
      } else {
        idx.push_back(static_cast<int>(name_off + g));
        m.valid.push_back(keep());
        idx.push_back(static_cast<int>(pron_off + g));
        m.valid.push_back(keep());
        if (with_labels) {
          m.labels.push_back({Kind::kNeighborName, j, 0});
          m.labels.push_back({Kind::kNeighborPron, j, 0});
        }
      }
    }
    if (cfg_.use_latlong) {
      idx.push_back(static_cast<int>(ll_off + b));
      m.valid.push_back(keep());
      if (with_labels) m.labels.push_back({Kind::kLatLong, 0, 0});
    }
    const std::size_t len = idx.size() - begin;
    if (cfg_.interleave && len > cfg_.max_memory) {
      throw DimensionError("interleaved memory of " + std::to_string(len) +
                           " rows exceeds the cap of " +
                           std::to_string(cfg_.max_memory));
    }
    m.begin.push_back(begin);
    m.len.push_back(len);
  }
  m.rows = num::gather_rows(t, source, idx);
  return m;
}

template <class T>
Var Model<T>::run_decoder(
    BoundParams<T>& p, Var x, const AttentionLayout& self_l,
    const AttentionLayout& cross_l, Var memory, RngState* rng,
    std::vector<std::shared_ptr<const Array<T>>>* cross_probs) const {
  auto& t = p.tape();
  const double relu_rate = rng ? cfg_.dropout : 0.0;
  for (const auto& layer : dec_.layers) {
    Var h = num::layer_norm(p, layer.norm1, x);
    Var a = num::multi_head_attention(p, layer.self_att, h, h, cfg_.heads, self_l);
    x = num::add(t, x, sublayer_dropout(t, a, rng));
    h = num::layer_norm(p, layer.norm2, x);
    std::shared_ptr<const Array<T>> probs;
    Var c = num::multi_head_attention(p, layer.cross_att, h, memory, cfg_.heads,
                                      cross_l, cross_probs ? &probs : nullptr);
    if (cross_probs) cross_probs->push_back(probs);
    x = num::add(t, x, sublayer_dropout(t, c, rng));
    h = num::layer_norm(p, layer.norm3, x);
    x = num::add(t, x, num::feed_forward(p, layer.ff, h, relu_rate, rng));
  }
  return num::layer_norm(p, dec_.final_norm, x);
}

template <class T>
Var Model<T>::loss(BoundParams<T>& p, std::span<const Example> batch,
                   ForwardRng rng) const {
  if (batch.empty()) throw DataError("empty batch");
  auto& t = p.tape();
  MemoryVar m = assemble(p, batch, rng, false);

  Ragged dec;
  std::vector<int> targets;
  for (const auto& ex : batch) {
    if (ex.target.empty()) throw DataError("training target has no pronunciation");
    std::vector<int> in{text::Vocabulary::kBos};
    const std::size_t n = std::min(ex.target.size(), cfg_.pron_len - 1);
    in.insert(in.end(), ex.target.begin(), ex.target.begin() + n);
    dec.add(in);
    targets.insert(targets.end(), ex.target.begin(), ex.target.begin() + n);
    targets.push_back(text::Vocabulary::kEos);
  }
  AttentionLayout cross;
  cross.key_valid = m.valid;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    cross.segments.push_back(
        {dec.segs[b].first, dec.segs[b].second, m.begin[b], m.len[b], false});
  }
  Var x = embed(p, embed_pron_, dec.ids, dec.positions, rng.main);
  Var y = run_decoder(p, x, self_layout(dec.segs, true), cross, m.rows,
                      rng.main, nullptr);
  Var logits = num::add_bias(t, num::matmul(t, y, p(out_w_)), p(out_b_));
  return num::smoothed_cross_entropy(t, logits, targets, cfg_.label_smoothing,
                                     -1);
}

template <class T>
double Model<T>::batch_loss(std::span<const Example> batch, ForwardRng rng,
                            num::Gradients<T>* grads) const {
  Tape<T> t(grads != nullptr);
  BoundParams<T> p(t, params_);
  Var l = loss(p, batch, rng);
  if (grads) {
    t.backward(l);
    *grads = p.gradients();
  }
  return static_cast<double>(t.value(l)[0]);
}

template <class T>
Array<T> Model<T>::encode_target(std::span<const int> inp) const {
  Tape<T> t(false);
  BoundParams<T> p(t, params_);
  auto ids = strip_pad(inp);
  if (ids.empty()) throw DataError("target name has no non-PAD tokens");
  Ragged r;
  r.add(ids);
  Var h = run_encoder(p, enc_inp_, embed(p, embed_name_, r.ids, r.positions, nullptr),
                      r.segs, nullptr);
  return t.value(h);
}

template <class T>
typename Model<T>::Memory Model<T>::encode(const Example& ex) const {
  Tape<T> t(false);
  BoundParams<T> p(t, params_);
  MemoryVar mv = assemble(p, std::span<const Example>(&ex, 1), {}, true);
  return {t.value(mv.rows), std::move(mv.valid), std::move(mv.labels)};
}

template <class T>
Array<double> Model<T>::next_log_probs(
    const Memory& m, const std::vector<std::vector<int>>& prefixes) const {
  Tape<T> t(false);
  BoundParams<T> p(t, params_);
  Ragged dec;
  AttentionLayout cross;
  cross.key_valid = m.valid;
  std::vector<int> last;
  for (const auto& prefix : prefixes) {
    std::vector<int> in{text::Vocabulary::kBos};
    in.insert(in.end(), prefix.begin(), prefix.end());
    dec.add(in);
    const auto& [b, n] = dec.segs.back();
    cross.segments.push_back({b, n, 0, m.rows.rows(), false});
    last.push_back(static_cast<int>(b + n - 1));
  }
  Var mem = t.constant(m.rows);
  Var x = embed(p, embed_pron_, dec.ids, dec.positions, nullptr);
  Var y = run_decoder(p, x, self_layout(dec.segs, true), cross, mem, nullptr,
                      nullptr);
  y = num::gather_rows(t, y, last);
  Var logits = num::add_bias(t, num::matmul(t, y, p(out_w_)), p(out_b_));
  return num::log_softmax_rows(t.value(logits).template cast<double>());
}

template <class T>
Array<double> Model<T>::cross_attention(const Memory& m,
                                        std::span<const int> output) const {
  Tape<T> t(false);
  BoundParams<T> p(t, params_);
  Ragged dec;
  std::vector<int> in{text::Vocabulary::kBos};
  in.insert(in.end(), output.begin(), output.end());
  dec.add(in);
  const std::size_t q = in.size(), k = m.rows.rows();
  AttentionLayout cross;
  cross.key_valid = m.valid;
  cross.segments.push_back({0, q, 0, k, false});
  std::vector<std::shared_ptr<const Array<T>>> probs;
  Var x = embed(p, embed_pron_, dec.ids, dec.positions, nullptr);
  run_decoder(p, x, self_layout(dec.segs, true), cross, t.constant(m.rows),
              nullptr, &probs);
  Array<double> avg(Shape{q, k});
  const double w = 1.0 / static_cast<double>(probs.size() * cfg_.heads);
  for (const auto& layer : probs) {
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          avg.at(i, j) += w * static_cast<double>((*layer)[(h * q + i) * k + j]);
        }
      }
    }
  }
  return avg;
}

template class Model<float>;
template class Model<double>;
template Array<float> sinusoidal_positions<float>(std::size_t, std::size_t);
template Array<double> sinusoidal_positions<double>(std::size_t, std::size_t);

}  // namespace nbrs::model
