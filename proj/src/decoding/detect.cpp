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

#include "nbrs/decoding/detect.hpp"

#include <algorithm>
#include <ostream>

#include "nbrs/numerics/parallel.hpp"
#include "nbrs/textdata/escape.hpp"
#include "nbrs/textdata/unicode.hpp"

namespace nbrs::decoding {

std::string longest_shared_substring(std::string_view a, std::string_view b,
                                     std::size_t min_len, bool need_kanji) {
  const std::u32string ua = text::decode_utf8(a);
  const std::u32string ub = text::decode_utf8(b);
  for (std::size_t len = std::min(ua.size(), ub.size()); len >= std::max<std::size_t>(min_len, 1);
       --len) {
    for (std::size_t i = 0; i + len <= ua.size(); ++i) {
      const std::u32string_view sub(ua.data() + i, len);
      if (need_kanji && !text::contains_kanji(sub)) continue;
      if (ub.find(sub) != std::u32string::npos) return text::encode_utf8(sub);
    }
  }
  return {};
}

std::optional<std::vector<Evidence>> discrepancy_evidence(
    const geo::Neighborhood& n, const std::string& hypothesis,
    const DetectOptions& opts) {
  if (hypothesis == n.target.pron) return std::nullopt;
  std::vector<Evidence> ev;
  for (const auto& nb : n.neighbors) {
    std::string spell =
        longest_shared_substring(n.target.name, nb.name, opts.min_spelling, true);
    if (spell.empty()) continue;
    std::string pron =
        longest_shared_substring(nb.pron, hypothesis, opts.min_pron, false);
    if (pron.empty()) continue;
    ev.push_back({nb.id, nb.name, nb.pron, std::move(spell), std::move(pron)});
  }
  if (ev.empty()) return std::nullopt;
  return ev;
}

std::vector<Decoded> decode_neighborhoods(
    const model::Model<float>& m, const model::Vocabs& v,
    std::span<const geo::Neighborhood> data, std::size_t beam) {
  std::vector<Decoded> out(data.size());
  BeamOptions opts;
  opts.beam = beam;
  opts.max_len = m.config().pron_len;
  num::parallel_for(data.size(), [&](std::size_t i) {
    const model::Example ex = model::prepare_example(data[i], v, m.config());
    ModelScorer<float> scorer(m, ex);
    Decoded d;
    d.hyps = beam_search(scorer, opts);
    d.best = model::output_string(v, d.hyps.front().tokens);
    d.gap = confidence_gap(d.hyps);
    out[i] = std::move(d);
  });
  return out;
}

std::vector<DiscrepancyReport> filter_discrepancies(
    std::span<const geo::Neighborhood> data, std::span<const Decoded> decoded,
    const DetectOptions& opts) {
  std::vector<DiscrepancyReport> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& d = decoded[i];
    if (d.gap < opts.min_gap) continue;
    auto ev = discrepancy_evidence(data[i], d.best, opts);
    if (!ev) continue;
    out.push_back({data[i].target.id, data[i].target.name, data[i].target.pron,
                   d.best, d.gap, std::move(*ev)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DiscrepancyReport& a, const DiscrepancyReport& b) {
                     if (a.gap != b.gap) return a.gap > b.gap;
                     return a.feature_id < b.feature_id;
                   });
  return out;
}

std::vector<DiscrepancyReport> detect_discrepancies(
    const model::Model<float>& m, const model::Vocabs& v,
    std::span<const geo::Neighborhood> data, const DetectOptions& opts) {
  const auto decoded = decode_neighborhoods(m, v, data, opts.beam);
  return filter_discrepancies(data, decoded, opts);
}

void write_reports_csv(std::ostream& out,
                       std::span<const DiscrepancyReport> reports) {
  using text::csv_field;
  out << "feature_id,name,reference,hypothesis,gap,evidence\n";
  for (const auto& r : reports) {
    std::string ev;
    for (const auto& e : r.evidence) {
      if (!ev.empty()) ev += "; ";
      ev += e.neighbor_id + ":" + e.neighbor_name + "/" + e.neighbor_pron + " [" +
            e.shared_spelling + "|" + e.shared_pron + "]";
    }
    out << csv_field(r.feature_id) << ',' << csv_field(r.name) << ','
        << csv_field(r.reference) << ',' << csv_field(r.hypothesis) << ','
        << text::format_double(r.gap) << ',' << csv_field(ev) << '\n';
  }
}

void write_reports_html(std::ostream& out,
                        std::span<const DiscrepancyReport> reports) {
  using text::html_escape;
  out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
         "<title>Pronunciation discrepancies</title>"
         "<style>body{font-family:sans-serif}table{border-collapse:collapse}"
         "td,th{border:1px solid #ccc;padding:4px 8px}</style></head><body>\n"
      << "<h1>Pronunciation discrepancies</h1>\n<p>" << reports.size()
      << " cases, sorted by confidence gap.</p>\n<table>\n"
      << "<tr><th>id</th><th>name</th><th>reference</th><th>hypothesis</th>"
         "<th>gap</th><th>evidence</th></tr>\n";
  for (const auto& r : reports) {
    out << "<tr><td>" << html_escape(r.feature_id) << "</td><td>"
        << html_escape(r.name) << "</td><td>" << html_escape(r.reference)
        << "</td><td>" << html_escape(r.hypothesis) << "</td><td>"
        << text::format_double(r.gap, 3) << "</td><td>";
    for (const auto& e : r.evidence) {
      out << html_escape(e.neighbor_name) << " / " << html_escape(e.neighbor_pron)
          << "<br>";
    }
    out << "</td></tr>\n";
  }
  out << "</table></body></html>\n";
}

}  // namespace nbrs::decoding
