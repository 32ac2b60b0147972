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

#include "nbrs/decoding/beam.hpp"

#include <algorithm>
#include <limits>

#include "nbrs/errors.hpp"
#include "nbrs/numerics/parallel.hpp"

namespace nbrs::decoding {
namespace {

double score_of(const BeamHypothesis& h, const BeamOptions& o) {
  if (!o.length_normalize) return h.log_likelihood;
  const double n = static_cast<double>(h.tokens.size() + (h.finished ? 1 : 0));
  return h.log_likelihood / std::max(1.0, n);
}

void rank(std::vector<BeamHypothesis>& v, const BeamOptions& o) {
  std::stable_sort(v.begin(), v.end(),
                   [&](const BeamHypothesis& a, const BeamHypothesis& b) {
                     const double sa = score_of(a, o), sb = score_of(b, o);
                     if (sa != sb) return sa > sb;
                     return a.tokens < b.tokens;
                   });
}

}  // namespace

std::vector<BeamHypothesis> beam_search(StepScorer& scorer,
                                        const BeamOptions& opts) {
  if (opts.beam == 0) throw UsageError("beam must be >= 1");
  if (opts.max_len == 0) throw UsageError("max_len must be >= 1");
  const std::size_t V = scorer.vocab_size();
  std::vector<char> allowed(V, 1);
  for (int b : opts.banned) {
    if (b >= 0 && static_cast<std::size_t>(b) < V) allowed[b] = 0;
  }

  std::vector<BeamHypothesis> alive{BeamHypothesis{}};
  std::vector<BeamHypothesis> finished;
  for (std::size_t step = 0; step < opts.max_len && !alive.empty(); ++step) {
    std::vector<std::vector<int>> prefixes;
    prefixes.reserve(alive.size());
    for (const auto& h : alive) prefixes.push_back(h.tokens);
    const num::Array<double> lp = scorer.next_log_probs(prefixes);
    if (lp.rows() != alive.size() || lp.cols() != V) {
      throw DimensionError("scorer returned " + num::shape_string(lp.shape()));
    }

    // Alive and finished extensions compete for the same `beam` slots.
    std::vector<BeamHypothesis> cands;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      for (std::size_t v = 0; v < V; ++v) {
        if (!allowed[v]) continue;
        BeamHypothesis h;
        h.log_likelihood = alive[i].log_likelihood + lp.at(i, v);
        h.tokens = alive[i].tokens;
        if (static_cast<int>(v) == opts.eos) {
          h.finished = true;
        } else {
          h.tokens.push_back(static_cast<int>(v));
          h.finished = h.tokens.size() >= opts.max_len;
        }
        cands.push_back(std::move(h));
      }
    }
    rank(cands, opts);
    if (cands.size() > opts.beam) cands.resize(opts.beam);
    alive.clear();
    for (auto& h : cands) (h.finished ? finished : alive).push_back(std::move(h));
    rank(finished, opts);
    if (finished.size() > opts.beam) finished.resize(opts.beam);

    // Extending a hypothesis never raises its raw log-likelihood.
    if (!opts.length_normalize && finished.size() == opts.beam &&
        !alive.empty() &&
        alive.front().log_likelihood <= finished.back().log_likelihood) {
      break;
    }
  }
  return finished;
}

BeamHypothesis greedy_decode(StepScorer& scorer, const BeamOptions& opts) {
  if (opts.max_len == 0) throw UsageError("max_len must be >= 1");
  const std::size_t V = scorer.vocab_size();
  std::vector<char> allowed(V, 1);
  for (int b : opts.banned) {
    if (b >= 0 && static_cast<std::size_t>(b) < V) allowed[b] = 0;
  }
  BeamHypothesis h;
  while (!h.finished) {
    const num::Array<double> lp = scorer.next_log_probs({h.tokens});
    int best = -1;
    for (std::size_t v = 0; v < V; ++v) {
      if (allowed[v] && (best < 0 || lp[v] > lp[static_cast<std::size_t>(best)])) {
        best = static_cast<int>(v);
      }
    }
    if (best < 0) throw UsageError("every output symbol is banned");
    h.log_likelihood += lp[static_cast<std::size_t>(best)];
    if (best == opts.eos) {
      h.finished = true;
    } else {
      h.tokens.push_back(best);
      h.finished = h.tokens.size() >= opts.max_len;
    }
  }
  return h;
}

double confidence_gap(std::span<const BeamHypothesis> hyps) {
  if (hyps.empty()) throw UsageError("confidence_gap needs a hypothesis");
  if (hyps.size() == 1) return std::numeric_limits<double>::infinity();
  return std::max(0.0, hyps[0].log_likelihood - hyps[1].log_likelihood);
}

template <class T>
std::vector<std::vector<BeamHypothesis>> decode_all(
    const model::Model<T>& m, std::span<const model::Example> examples,
    std::size_t beam, std::size_t max_len) {
  std::vector<std::vector<BeamHypothesis>> out(examples.size());
  BeamOptions opts;
  opts.beam = beam;
  opts.max_len = max_len;
  num::parallel_for(examples.size(), [&](std::size_t i) {
    ModelScorer<T> scorer(m, examples[i]);
    out[i] = beam_search(scorer, opts);
  });
  return out;
}

template std::vector<std::vector<BeamHypothesis>> decode_all<float>(
    const model::Model<float>&, std::span<const model::Example>, std::size_t,
    std::size_t);
template std::vector<std::vector<BeamHypothesis>> decode_all<double>(
    const model::Model<double>&, std::span<const model::Example>, std::size_t,
    std::size_t);

}  // namespace nbrs::decoding
