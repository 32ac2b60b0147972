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

#include "nbrs/baseline/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "nbrs/errors.hpp"
#include "nbrs/numerics/parallel.hpp"
#include "nbrs/textdata/unicode.hpp"

namespace nbrs::baseline {

namespace {

std::u32string fold(std::u32string s) {
  for (auto& c : s) c = text::katakana_to_hiragana(c);
  return s;
}

std::u32string pair_key(std::u32string_view x, std::u32string_view y) {
  std::u32string k(x);
  k.push_back(U'\0');
  k.append(y);
  return k;
}

bool has_kana(std::u32string_view s) {
  return std::any_of(s.begin(), s.end(), [](char32_t c) { return text::is_kana(c); });
}

// One lattice edge between nodes i * (m + 1) + j.
struct Edge {
  std::size_t from, to;
  std::size_t a, b;        // spelling and kana lengths
  std::int64_t param;      // -1 for anchors
  double factor;           // penalty factor
};

// Edges in order of ascending source node, then spelling and kana length.
template <class ParamOf>
std::vector<Edge> lattice(std::u32string_view name, std::u32string_view pron,
                          const AlignerConfig& cfg, ParamOf&& param_of) {
  const std::size_t n = name.size(), m = pron.size();
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      const std::size_t from = i * (m + 1) + j;
      if (text::is_kana(name[i])) {
        if (j < m && text::katakana_to_hiragana(name[i]) == pron[j]) {
          edges.push_back({from, (i + 1) * (m + 1) + j + 1, 1, 1, -1, 1.0});
        }
        continue;
      }
      for (std::size_t a = 1; a <= cfg.max_spelling && i + a <= n; ++a) {
        const auto x = name.substr(i, a);
        if (has_kana(x)) break;
        for (std::size_t b = 0; b <= cfg.max_kana && j + b <= m; ++b) {
          const std::int64_t p = param_of(x, pron.substr(j, b));
          if (p == -2) continue;
          const double f = std::pow(cfg.extra_char_penalty, static_cast<double>(a - 1)) *
                           (b == 0 ? cfg.empty_penalty : 1.0);
          edges.push_back({from, (i + a) * (m + 1) + j + b, a, b, p, f});
        }
      }
    }
  }
  return edges;
}

std::size_t kana_count(std::u32string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char32_t c) { return text::is_kana(c); }));
}

}  // namespace

std::string Alignment::spelling() const {
  std::string s;
  for (const auto& u : units) s += u.spelling;
  return s;
}

std::string Alignment::reading() const {
  std::string s;
  for (const auto& u : units) s += u.kana;
  return s;
}

Aligner Aligner::train(std::span<const Pair> pairs, const AlignerConfig& cfg,
                       std::vector<geo::Diagnostic>* diagnostics) {
  if (pairs.empty()) throw DataError("aligner needs at least one pair");
  if (cfg.max_spelling == 0) throw UsageError("max spelling span must be positive");
  Aligner al;
  al.cfg_ = cfg;

  struct Lattice {
    std::vector<Edge> edges;
    std::size_t nodes = 0;
  };
  std::map<std::u32string, std::int64_t> ids;
  std::vector<std::u32string> keys;
  std::vector<Lattice> lattices;
  auto diag = [&](std::size_t i, std::string msg) {
    if (diagnostics) diagnostics->push_back({i, std::move(msg)});
  };
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto name = text::decode_utf8(pairs[k].first);
    const auto pron = fold(text::decode_utf8(pairs[k].second));
    if (name.empty() || pron.size() < kana_count(name)) {
      diag(k, "pronunciation shorter than the kana in '" + pairs[k].first + "'");
      continue;
    }
    Lattice lat;
    lat.nodes = (name.size() + 1) * (pron.size() + 1);
    lat.edges = lattice(name, pron, cfg, [&](std::u32string_view x, std::u32string_view y) {
      const auto key = pair_key(x, y);
      auto [it, fresh] = ids.emplace(key, static_cast<std::int64_t>(keys.size()));
      if (fresh) keys.push_back(key);
      return it->second;
    });
    // Reachability of the final node.
    std::vector<std::uint8_t> reach(lat.nodes, 0);
    reach[0] = 1;
    for (const auto& e : lat.edges) {
      if (reach[e.from]) reach[e.to] = 1;
    }
    if (!reach.back()) {
      diag(k, "no monotone alignment for '" + pairs[k].first + "'");
      continue;
    }
    lattices.push_back(std::move(lat));
  }
  al.trained_pairs_ = lattices.size();
  if (lattices.empty()) throw DataError("no alignable pairs");

  std::vector<double> p(keys.size(), 1.0 / static_cast<double>(std::max<std::size_t>(keys.size(), 1)));
  std::vector<double> counts(keys.size());
  std::vector<double> alpha, beta;
  auto weight = [&](const Edge& e) {
    return e.param < 0 ? 1.0 : p[static_cast<std::size_t>(e.param)] * e.factor;
  };
  for (al.iterations_ = 0; al.iterations_ < cfg.max_iterations;) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (const auto& lat : lattices) {
      alpha.assign(lat.nodes, 0.0);
      beta.assign(lat.nodes, 0.0);
      alpha[0] = 1.0;
      beta.back() = 1.0;
      for (const auto& e : lat.edges) alpha[e.to] += alpha[e.from] * weight(e);
      for (auto it = lat.edges.rbegin(); it != lat.edges.rend(); ++it) {
        beta[it->from] += weight(*it) * beta[it->to];
      }
      const double z = alpha.back();
      if (!(z > 0.0)) continue;
      for (const auto& e : lat.edges) {
        if (e.param < 0) continue;
        counts[static_cast<std::size_t>(e.param)] += alpha[e.from] * weight(e) * beta[e.to] / z;
      }
    }
    double total = 0.0;
    for (double c : counts) total += c;
    double change = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double next = total > 0.0 ? counts[i] / total : 0.0;
      change = std::max(change, std::abs(next - p[i]));
      p[i] = next;
    }
    ++al.iterations_;
    if (change < cfg.tolerance) {
      al.converged_ = true;
      break;
    }
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (p[i] > 0.0) al.prob_[keys[i]] = p[i];
  }
  return al;
}

double Aligner::probability(std::string_view spelling, std::string_view kana) const {
  auto it = prob_.find(pair_key(text::decode_utf8(spelling), fold(text::decode_utf8(kana))));
  return it == prob_.end() ? 0.0 : it->second;
}

std::optional<Alignment> Aligner::align(std::string_view name_utf8,
                                        std::string_view pron_utf8) const {
  const auto name = text::decode_utf8(name_utf8);
  const auto pron = fold(text::decode_utf8(pron_utf8));
  if (name.empty() || pron.size() < kana_count(name)) return std::nullopt;
  std::vector<double> logw;
  const auto edges = lattice(name, pron, cfg_, [&](std::u32string_view x, std::u32string_view y) {
    auto it = prob_.find(pair_key(x, y));
    logw.push_back(std::log(it == prob_.end() ? cfg_.unseen_floor : it->second));
    return static_cast<std::int64_t>(logw.size() - 1);
  });
  const std::size_t nodes = (name.size() + 1) * (pron.size() + 1);
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> best(nodes, kNone);
  std::vector<std::size_t> back(nodes, SIZE_MAX);
  best[0] = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (best[e.from] == kNone) continue;
    const double w = e.param < 0 ? 0.0 : logw[static_cast<std::size_t>(e.param)] + std::log(e.factor);
    if (best[e.from] + w > best[e.to]) {
      best[e.to] = best[e.from] + w;
      back[e.to] = k;
    }
  }
  if (best.back() == kNone) return std::nullopt;
  Alignment out;
  out.log_prob = best.back();
  const std::size_t m1 = pron.size() + 1;
  for (std::size_t node = nodes - 1; node != 0;) {
    const auto& e = edges[back[node]];
    const std::size_t i = e.from / m1, j = e.from % m1;
    out.units.push_back({text::encode_utf8(name.substr(i, e.a)),
                         text::encode_utf8(pron.substr(j, e.b))});
    node = e.from;
  }
  std::reverse(out.units.begin(), out.units.end());
  return out;
}

void ReadingLexicon::add(const std::string& key, const std::string& kana,
                         std::size_t count) {
  if (count == 0 || !text::contains_kanji(key)) return;
  auto& rs = entries_[key];
  max_key_chars_ = std::max(max_key_chars_, text::decode_utf8(key).size());
  for (auto& r : rs) {
    if (r.kana == kana) {
      r.count += count;
      return;
    }
  }
  rs.push_back({kana, count, next_seen_++});
}

void ReadingLexicon::add_alignment(const Alignment& a, std::size_t max_key_chars) {
  for (std::size_t s = 0; s < a.units.size(); ++s) {
    std::string key, kana;
    std::size_t chars = 0;
    for (std::size_t e = s; e < a.units.size(); ++e) {
      chars += text::decode_utf8(a.units[e].spelling).size();
      if (chars > max_key_chars) break;
      key += a.units[e].spelling;
      kana += a.units[e].kana;
      add(key, kana);
    }
  }
}

std::optional<std::string> ReadingLexicon::top(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.empty()) return std::nullopt;
  const Reading* best = &it->second.front();
  for (const auto& r : it->second) {
    if (r.count > best->count || (r.count == best->count && r.first_seen < best->first_seen)) {
      best = &r;
    }
  }
  return best->kana;
}

const std::vector<ReadingLexicon::Reading>& ReadingLexicon::readings(
    const std::string& key) const {
  static const std::vector<Reading> kEmpty;
  auto it = entries_.find(key);
  return it == entries_.end() ? kEmpty : it->second;
}

void ReadingLexicon::write_tsv(std::ostream& out) const {
  for (const auto& [key, rs] : entries_) {
    auto sorted = rs;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Reading& a, const Reading& b) {
      if (a.count != b.count) return a.count > b.count;
      return a.first_seen < b.first_seen;
    });
    for (const auto& r : sorted) out << key << '\t' << r.kana << '\t' << r.count << '\n';
  }
}

ReadingLexicon build_lexicon(std::span<const Aligner::Pair> pairs,
                             const Aligner& aligner) {
  ReadingLexicon lex;
  for (const auto& [name, pron] : pairs) {
    if (auto a = aligner.align(name, pron)) lex.add_alignment(*a);
  }
  return lex;
}

Alignment base_reading(std::string_view name_utf8, const ReadingLexicon& lex) {
  const auto name = text::decode_utf8(name_utf8);
  Alignment out;
  for (std::size_t i = 0; i < name.size();) {
    if (text::is_kana(name[i])) {
      out.units.push_back({text::encode_utf8(name[i]),
                           text::encode_utf8(text::katakana_to_hiragana(name[i]))});
      ++i;
      continue;
    }
    bool matched = false;
    for (std::size_t len = std::min(lex.max_key_chars(), name.size() - i); len > 0; --len) {
      const auto key = text::encode_utf8(name.substr(i, len));
      if (auto r = lex.top(key)) {
        out.units.push_back({key, *r});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.units.push_back({text::encode_utf8(name[i]), std::string(kUnknownReading)});
      ++i;
    }
  }
  return out;
}

ReadingLexicon neighbor_lexicon(const geo::Neighborhood& n, const Aligner& aligner) {
  std::vector<const geo::Neighbor*> order;
  for (const auto& nb : n.neighbors) {
    if (!nb.pron.empty()) order.push_back(&nb);
  }
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->distance_km < b->distance_km;
  });
  ReadingLexicon lex;
  for (const auto* nb : order) {
    if (auto a = aligner.align(nb->name, nb->pron)) lex.add_alignment(*a);
  }
  return lex;
}

Alignment substitute(const Alignment& base, const ReadingLexicon& lex) {
  const std::size_t k = base.units.size();
  std::vector<std::size_t> chars(k);
  for (std::size_t i = 0; i < k; ++i) chars[i] = text::decode_utf8(base.units[i].spelling).size();
  std::vector<std::uint8_t> used(k, 0);
  std::vector<std::size_t> span_end(k, 0);  // nonzero at chosen span starts
  for (;;) {
    std::size_t best_s = 0, best_e = 0, best_len = 0;
    for (std::size_t s = 0; s < k; ++s) {
      std::size_t len = 0;
      std::string key;
      for (std::size_t e = s; e < k && !used[e]; ++e) {
        len += chars[e];
        if (len > lex.max_key_chars()) break;
        key += base.units[e].spelling;
        if (len > best_len && lex.contains(key)) {
          best_s = s;
          best_e = e + 1;
          best_len = len;
        }
      }
    }
    if (best_len == 0) break;
    for (std::size_t i = best_s; i < best_e; ++i) used[i] = 1;
    span_end[best_s] = best_e;
  }
  Alignment out;
  out.log_prob = base.log_prob;
  for (std::size_t i = 0; i < k;) {
    if (span_end[i] == 0) {
      out.units.push_back(base.units[i]);
      ++i;
      continue;
    }
    std::string key;
    for (std::size_t e = i; e < span_end[i]; ++e) key += base.units[e].spelling;
    out.units.push_back({key, *lex.top(key)});
    i = span_end[i];
  }
  return out;
}

std::vector<BaselinePrediction> predict(std::span<const geo::Neighborhood> data,
                                        const ReadingLexicon& lex,
                                        const Aligner& aligner) {
  std::vector<BaselinePrediction> out(data.size());
  num::parallel_for(data.size(), [&](std::size_t i) {
    const auto base = base_reading(data[i].target.name, lex);
    out[i].base = base.reading();
    out[i].with_neighbors = substitute(base, neighbor_lexicon(data[i], aligner)).reading();
  });
  return out;
}

}  // namespace nbrs::baseline
