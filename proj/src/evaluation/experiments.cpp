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

#include "nbrs/evaluation/experiments.hpp"

#include <limits>
#include <ostream>

#include "nbrs/decoding/beam.hpp"
#include "nbrs/errors.hpp"
#include "nbrs/numerics/parallel.hpp"
#include "nbrs/textdata/escape.hpp"
#include "nbrs/textdata/unicode.hpp"

namespace nbrs::eval {

TrainedModel fit(const model::ModelConfig& cfg,
                 std::span<const geo::Neighborhood> train,
                 std::span<const geo::Neighborhood> golden,
                 const training::TrainConfig& tc, const std::string& out_dir) {
  cfg.validate();
  TrainedModel t;
  t.config = cfg;
  t.vocabs = model::build_vocabs(train, cfg);
  const auto examples = model::prepare_examples(train, t.vocabs, cfg);
  const auto gold = model::prepare_examples(golden, t.vocabs, cfg);
  t.model.emplace(cfg, t.vocabs.input.size(), t.vocabs.output.size(), tc.seed);
  t.result = training::train(*t.model, t.vocabs, examples, gold, tc, out_dir);
  return t;
}

std::vector<std::string> predict_strings(const model::Model<float>& m,
                                         const model::Vocabs& v,
                                         std::span<const geo::Neighborhood> data,
                                         std::size_t beam) {
  const auto examples = model::prepare_examples(data, v, m.config());
  const auto hyps = decoding::decode_all(m, std::span<const model::Example>(examples), beam,
                                         m.config().pron_len);
  std::vector<std::string> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!hyps[i].empty()) out[i] = model::output_string(v, hyps[i][0].tokens);
  }
  return out;
}

std::vector<std::string> references(std::span<const geo::Neighborhood> data) {
  std::vector<std::string> out;
  out.reserve(data.size());
  for (const auto& n : data) out.push_back(n.target.pron);
  return out;
}

PairedOutcomes paired_outcomes(std::span<const std::string> a,
                               std::span<const std::string> b,
                               std::span<const std::string> refs) {
  if (a.size() != refs.size() || b.size() != refs.size()) {
    throw UsageError("paired outcomes need equally long prediction lists");
  }
  PairedOutcomes o;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    o.a.push_back(a[i] == refs[i]);
    o.b.push_back(b[i] == refs[i]);
  }
  return o;
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::kOriginal: return "original";
    case Condition::kForceP1: return "force_P1";
    case Condition::kForceP2: return "force_P2";
  }
  return "?";
}

void ManipulationSpec::validate() const {
  if (spelling.empty() || p1.empty() || p2.empty()) {
    throw UsageError("manipulation spec needs a spelling and two readings");
  }
  if (p1 == p2) throw UsageError("manipulation spec for " + spelling + ": P1 equals P2");
}

namespace {

// Code-point offsets of every occurrence of `needle` in `hay`.
std::vector<std::size_t> occurrences(const std::u32string& hay, const std::u32string& needle) {
  std::vector<std::size_t> out;
  for (auto pos = hay.find(needle); pos != std::u32string::npos;
       pos = hay.find(needle, pos + needle.size())) {
    out.push_back(pos);
  }
  return out;
}

// Unit index starting at code point `at`, or SIZE_MAX.
std::size_t unit_starting_at(const std::vector<std::size_t>& starts, std::size_t at) {
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (starts[i] == at) return i;
  }
  return SIZE_MAX;
}

constexpr double kImpossible = -std::numeric_limits<double>::infinity();

double part_log_prob(const baseline::Aligner& al, const std::u32string& name,
                     const std::u32string& pron) {
  if (name.empty()) return pron.empty() ? 0.0 : kImpossible;
  const auto a = al.align(text::encode_utf8(name), text::encode_utf8(pron));
  return a ? a->log_prob : kImpossible;
}

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Pron code-point span read for the spelling at name offset `at`. Splits
// at candidate readings are tried first, scored by aligning the name parts
// around the spelling; otherwise the span must fall on unit boundaries.
std::optional<Span> locate(const baseline::Aligner& al, const std::u32string& name,
                           const std::u32string& pron, std::size_t at, std::size_t len,
                           const std::vector<std::u32string>& candidates) {
  const auto left = name.substr(0, at);
  const auto right = name.substr(at + len);
  double best = kImpossible;
  std::optional<Span> out;
  for (const auto& c : candidates) {
    for (std::size_t k = pron.find(c); k != std::u32string::npos; k = pron.find(c, k + 1)) {
      const double lp = part_log_prob(al, left, pron.substr(0, k)) +
                        part_log_prob(al, right, pron.substr(k + c.size()));
      if (lp > best) {
        best = lp;
        out = Span{k, k + c.size()};
      }
    }
  }
  if (out) return out;

  const auto a = al.align(text::encode_utf8(name), text::encode_utf8(pron));
  if (!a) return std::nullopt;
  std::vector<std::size_t> starts{0}, kana_starts{0};
  for (const auto& u : a->units) {
    starts.push_back(starts.back() + text::decode_utf8(u.spelling).size());
    kana_starts.push_back(kana_starts.back() + text::decode_utf8(u.kana).size());
  }
  const auto i0 = unit_starting_at(starts, at);
  const auto i1 = unit_starting_at(starts, at + len);
  if (i0 == SIZE_MAX || i1 == SIZE_MAX) return std::nullopt;
  return Span{kana_starts[i0], kana_starts[i1]};
}

std::vector<std::u32string> candidates_of(const ManipulationSpec& spec) {
  return {text::decode_utf8(spec.p1), text::decode_utf8(spec.p2)};
}

}  // namespace

std::optional<std::string> reading_of(const baseline::Aligner& al,
                                      std::string_view name, std::string_view pron,
                                      const ManipulationSpec& spec) {
  const auto n = text::decode_utf8(name);
  const auto p = text::decode_utf8(pron);
  const auto needle = text::decode_utf8(spec.spelling);
  const auto occ = occurrences(n, needle);
  if (occ.empty()) return std::nullopt;
  const auto span = locate(al, n, p, occ[0], needle.size(), candidates_of(spec));
  if (!span) return std::nullopt;
  return text::encode_utf8(p.substr(span->begin, span->end - span->begin));
}

geo::Neighborhood manipulate(const geo::Neighborhood& n,
                             const ManipulationSpec& spec, Condition c,
                             const baseline::Aligner& al, std::size_t* unlocated) {
  geo::Neighborhood out = n;
  if (c == Condition::kOriginal) return out;
  const auto forced = text::decode_utf8(c == Condition::kForceP1 ? spec.p1 : spec.p2);
  const auto needle = text::decode_utf8(spec.spelling);
  const auto candidates = candidates_of(spec);
  for (auto& nb : out.neighbors) {
    const auto name = text::decode_utf8(nb.name);
    const auto occ = occurrences(name, needle);
    if (occ.empty() || nb.pron.empty()) continue;
    auto pron = text::decode_utf8(nb.pron);
    // Last occurrence first so earlier offsets stay valid.
    for (auto it = occ.rbegin(); it != occ.rend(); ++it) {
      const auto span = locate(al, name, pron, *it, needle.size(), candidates);
      if (!span) {
        if (unlocated) ++*unlocated;
        continue;
      }
      pron.replace(span->begin, span->end - span->begin, forced);
    }
    nb.pron = text::encode_utf8(pron);
  }
  return out;
}

std::vector<ManipulationRow> manipulation_experiment(
    const model::Model<float>& m, const model::Vocabs& v,
    std::span<const geo::Neighborhood> data,
    std::span<const ManipulationSpec> specs, const baseline::Aligner& al,
    std::size_t beam) {
  std::vector<ManipulationRow> rows;
  for (const auto& spec : specs) {
    spec.validate();
    std::vector<const geo::Neighborhood*> targets;
    for (const auto& n : data) {
      if (n.target.name.find(spec.spelling) != std::string::npos) targets.push_back(&n);
    }
    for (Condition c : {Condition::kOriginal, Condition::kForceP1, Condition::kForceP2}) {
      ManipulationRow row;
      row.spelling = spec.spelling;
      row.condition = c;
      row.targets = targets.size();
      row.skipped = data.size() - targets.size();
      std::vector<geo::Neighborhood> edited;
      for (const auto* n : targets) edited.push_back(manipulate(*n, spec, c, al, &row.unlocated));
      const auto hyps = predict_strings(m, v, edited, beam);
      for (std::size_t i = 0; i < hyps.size(); ++i) {
        const auto r = reading_of(al, edited[i].target.name, hyps[i], spec);
        // A span that is neither reading (missing or misaligned) falls back to containment.
        const bool aligned = r && (*r == spec.p1 || *r == spec.p2);
        const bool p1 = aligned ? *r == spec.p1
                                : hyps[i].find(spec.p1) != std::string::npos &&
                                      hyps[i].find(spec.p2) == std::string::npos;
        row.p1_decodings += p1;
      }
      row.proportion = targets.empty() ? 0.0
                                       : static_cast<double>(row.p1_decodings) /
                                             static_cast<double>(targets.size());
      rows.push_back(row);
    }
  }
  return rows;
}

void write_manipulation_csv(std::ostream& out, std::span<const ManipulationRow> rows) {
  out << "spelling,condition,targets,skipped,unlocated,p1_decodings,proportion\n";
  for (const auto& r : rows) {
    out << text::csv_field(r.spelling) << ',' << to_string(r.condition) << ',' << r.targets
        << ',' << r.skipped << ',' << r.unlocated << ',' << r.p1_decodings << ','
        << text::format_double(r.proportion) << '\n';
  }
}

AttentionMatrix attention_export(const model::Model<float>& m, const model::Vocabs& v,
                                 const geo::Neighborhood& n, std::size_t beam,
                                 std::optional<std::string> output) {
  const auto& cfg = m.config();
  geo::Neighborhood copy = n;
  std::vector<int> ids;
  if (output) {
    copy.target.pron = *output;
    ids = model::prepare_example(copy, v, cfg).target;
  } else {
    copy.target.pron.clear();
    const auto ex = model::prepare_example(copy, v, cfg);
    decoding::ModelScorer<float> scorer(m, ex);
    decoding::BeamOptions o;
    o.beam = beam;
    o.max_len = cfg.pron_len;
    ids = decoding::beam_search(scorer, o).at(0).tokens;
  }
  const auto ex = model::prepare_example(copy, v, cfg);
  const auto memory = m.encode(ex);

  // Neighbors kept by prepare_example, in order.
  std::vector<const geo::Neighbor*> kept;
  if (cfg.use_neighbors) {
    for (std::size_t i = 0; i < std::min(n.neighbors.size(), cfg.nneigh); ++i) {
      if (!n.neighbors[i].name.empty() && !n.neighbors[i].pron.empty()) {
        kept.push_back(&n.neighbors[i]);
      }
    }
  }
  const auto name_symbols = v.token_level ? text::split_tokens(n.target.name)
                                          : text::utf8_chars(n.target.name);
  AttentionMatrix a;
  for (int id : ids) a.output_tokens.push_back(v.output.symbol(id));
  a.output_tokens.push_back("</s>");
  for (const auto& l : memory.labels) {
    std::string label = model::label_string(l);
    using K = model::MemoryLabel::Kind;
    if (l.kind == K::kTarget && l.position < name_symbols.size()) {
      label += ' ' + name_symbols[l.position];
    } else if ((l.kind == K::kNeighborName || l.kind == K::kNeighborPron) &&
               l.neighbor < kept.size()) {
      label += ' ' + (l.kind == K::kNeighborName ? kept[l.neighbor]->name
                                                 : kept[l.neighbor]->pron);
    }
    a.memory_labels.push_back(std::move(label));
  }
  a.weights = m.cross_attention(memory, ids);
  return a;
}

nlohmann::json to_json(const AttentionMatrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < a.weights.shape()[0]; ++i) {
    const auto r = a.weights.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"output_tokens", a.output_tokens},
          {"memory_labels", a.memory_labels},
          {"weights", rows}};
}

std::vector<AblationCell> ablation_sweep(std::span<const geo::Neighborhood> train,
                                         std::span<const geo::Neighborhood> test,
                                         const AblationConfig& cfg) {
  std::vector<AblationCell> cells;
  for (std::size_t k : cfg.neighbor_counts) {
    for (bool ll : cfg.latlong) cells.push_back({k, ll, 0.0, test.size()});
  }
  const auto refs = references(test);
  num::parallel_for(cells.size(), [&](std::size_t i) {
    auto mc = cfg.base;
    mc.use_neighbors = cells[i].neighbors > 0;
    mc.nneigh = std::max<std::size_t>(cells[i].neighbors, 1);
    mc.use_latlong = cells[i].latlong;
    const auto t = fit(mc, train, {}, cfg.train);
    const auto hyps = predict_strings(*t.model, t.vocabs, test, cfg.beam);
    cells[i].error = training::error_rate(hyps, refs);
  });
  return cells;
}

void write_ablation_csv(std::ostream& out, std::span<const AblationCell> cells) {
  out << "neighbors,latlong,error,accuracy,test_size\n";
  for (const auto& c : cells) {
    out << c.neighbors << ',' << (c.latlong ? 1 : 0) << ',' << text::format_double(c.error)
        << ',' << text::format_double(1.0 - c.error) << ',' << c.test_size << '\n';
  }
}

}  // namespace nbrs::eval
