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
#include <span>
#include <string>
#include <vector>

#include "nbrs/model/config.hpp"
#include "nbrs/model/example.hpp"
#include "nbrs/numerics/layers.hpp"
#include "nbrs/numerics/param_store.hpp"

namespace nbrs::model {

struct EncoderLayerRef {
  num::NormRef norm1;
  num::AttentionRef att;
  num::NormRef norm2;
  num::FeedForwardRef ff;
};

struct EncoderRef {
  std::vector<EncoderLayerRef> layers;
  num::NormRef final_norm;
};

struct DecoderLayerRef {
  num::NormRef norm1;
  num::AttentionRef self_att;
  num::NormRef norm2;
  num::AttentionRef cross_att;
  num::NormRef norm3;
  num::FeedForwardRef ff;
};

struct DecoderRef {
  std::vector<DecoderLayerRef> layers;
  num::NormRef final_norm;
};

// What a memory row holds.
struct MemoryLabel {
  enum class Kind { kTarget, kNeighborName, kNeighborPron, kLatLong };
  Kind kind = Kind::kTarget;
  std::size_t neighbor = 0;  // neighbor index for neighbor rows
  std::size_t position = 0;  // token position (target rows, interleaved rows)
};

std::string label_string(const MemoryLabel& l);

// Randomness for a training forward pass. Neighbor shuffling, neighbor
// dropout and dropout inside the neighbor encoders draw from `neighbor`;
// everything else draws from `main`. Null `main` means evaluation mode.
struct ForwardRng {
  num::RngState* main = nullptr;
  num::RngState* neighbor = nullptr;
};

// Encoder-decoder with three unshared encoders (target name, neighbor
// names, neighbor prons), one name embedding table shared by the target and
// neighbor-name encoders and one pron embedding table shared by the
// neighbor-pron encoder and the decoder.
template <class T>
class Model {
 public:
  Model(const ModelConfig& cfg, std::size_t input_vocab,
        std::size_t output_vocab, std::uint64_t init_seed);
  // Adopts existing parameters; throws DataError when names or shapes do
  // not match the configuration.
  Model(const ModelConfig& cfg, num::ParamStore<T> params);

  const ModelConfig& config() const { return cfg_; }
  num::ParamStore<T>& params() { return params_; }
  const num::ParamStore<T>& params() const { return params_; }
  std::size_t input_vocab() const { return input_vocab_; }
  std::size_t output_vocab() const { return output_vocab_; }

  // Mean label-smoothed cross entropy over all target tokens (plus EOS).
  num::Var loss(num::BoundParams<T>& p, std::span<const Example> batch,
                ForwardRng rng) const;
  // Loss value; fills `grads` when given.
  double batch_loss(std::span<const Example> batch, ForwardRng rng,
                    num::Gradients<T>* grads) const;

  // Target-name encoder output in evaluation mode.
  num::Array<T> encode_target(std::span<const int> inp) const;

  struct Memory {
    num::Array<T> rows;
    std::vector<std::uint8_t> valid;
    std::vector<MemoryLabel> labels;
  };
  Memory encode(const Example& ex) const;

  // Log-probabilities of the next output token after each prefix of
  // generated ids (BOS is implicit). Rows are [prefixes, output_vocab].
  num::Array<double> next_log_probs(
      const Memory& m, const std::vector<std::vector<int>>& prefixes) const;

  // Teacher-forced cross attention for `output` (EOS appended internally),
  // averaged over layers and heads: [output.size() + 1, memory rows].
  num::Array<double> cross_attention(const Memory& m,
                                     std::span<const int> output) const;

 private:
  struct Batch;
  struct MemoryVar {
    num::Var rows;
    std::vector<std::uint8_t> valid;
    std::vector<std::size_t> begin, len;  // per example
    std::vector<MemoryLabel> labels;      // filled for single examples
  };

  void register_params(num::RngState& rng, num::RngState& neighbor_rng);
  num::Var embed(num::BoundParams<T>& p, std::size_t table,
                 const std::vector<int>& ids,
                 const std::vector<std::size_t>& positions,
                 num::RngState* rng) const;
  num::Var run_encoder(num::BoundParams<T>& p, const EncoderRef& enc,
                       num::Var x,
                       const std::vector<std::pair<std::size_t, std::size_t>>& segs,
                       num::RngState* rng) const;
  MemoryVar assemble(num::BoundParams<T>& p, std::span<const Example> batch,
                     ForwardRng rng, bool with_labels) const;
  num::Var run_decoder(num::BoundParams<T>& p, num::Var x,
                       const num::AttentionLayout& self_layout,
                       const num::AttentionLayout& cross_layout,
                       num::Var memory, num::RngState* rng,
                       std::vector<std::shared_ptr<const num::Array<T>>>*
                           cross_probs) const;
  num::Var sublayer_dropout(num::Tape<T>& t, num::Var x,
                            num::RngState* rng) const;

  ModelConfig cfg_;
  std::size_t input_vocab_ = 0;
  std::size_t output_vocab_ = 0;
  num::ParamStore<T> params_;

  std::size_t embed_name_ = 0;
  std::size_t embed_pron_ = 0;
  EncoderRef enc_inp_;
  EncoderRef enc_name_;
  EncoderRef enc_pron_;
  std::size_t source_tokens_ = 0;
  std::size_t lat_table_ = 0;
  std::size_t lon_table_ = 0;
  DecoderRef dec_;
  std::size_t out_w_ = 0;
  std::size_t out_b_ = 0;
  num::Array<T> positional_;  // [max positions, emb_size]
};

// Fixed sinusoidal table: even columns sin, odd columns cos.
template <class T>
num::Array<T> sinusoidal_positions(std::size_t positions, std::size_t d);

}  // namespace nbrs::model
