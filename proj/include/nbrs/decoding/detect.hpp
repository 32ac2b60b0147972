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

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nbrs/decoding/beam.hpp"
#include "nbrs/geodata/neighborhood.hpp"
#include "nbrs/model/example.hpp"
#include "nbrs/model/model.hpp"

namespace nbrs::decoding {

struct Evidence {
  std::string neighbor_id;
  std::string neighbor_name;
  std::string neighbor_pron;
  std::string shared_spelling;  // common substring of the two names
  std::string shared_pron;      // common substring of neighbor pron and hypothesis
};

struct DiscrepancyReport {
  std::string feature_id;
  std::string name;
  std::string reference;
  std::string hypothesis;
  double gap = 0.0;  // +infinity when only one hypothesis survived
  std::vector<Evidence> evidence;
};

struct DetectOptions {
  std::size_t beam = 8;
  std::size_t min_spelling = 2;  // shared spelling length, with >= 1 kanji
  std::size_t min_pron = 2;
  double min_gap = 0.0;
};

// Longest common substring (in code points) of at least `min_len`
// characters; with `need_kanji` it must contain a kanji. Empty if none.
std::string longest_shared_substring(std::string_view a, std::string_view b,
                                     std::size_t min_len, bool need_kanji);

// Evidence supporting `hypothesis` for this neighborhood, or nullopt when
// the hypothesis equals the reference or no neighbor supports it.
std::optional<std::vector<Evidence>> discrepancy_evidence(
    const geo::Neighborhood& n, const std::string& hypothesis,
    const DetectOptions& opts);

// Decoded hypothesis lists for neighborhoods (parallel over inputs).
struct Decoded {
  std::vector<BeamHypothesis> hyps;
  std::string best;  // output string of hyps[0]
  double gap = 0.0;
};

std::vector<Decoded> decode_neighborhoods(
    const model::Model<float>& m, const model::Vocabs& v,
    std::span<const geo::Neighborhood> data, std::size_t beam);

// Reports sorted by gap descending, then feature id.
std::vector<DiscrepancyReport> detect_discrepancies(
    const model::Model<float>& m, const model::Vocabs& v,
    std::span<const geo::Neighborhood> data, const DetectOptions& opts);
std::vector<DiscrepancyReport> filter_discrepancies(
    std::span<const geo::Neighborhood> data, std::span<const Decoded> decoded,
    const DetectOptions& opts);

void write_reports_csv(std::ostream& out,
                       std::span<const DiscrepancyReport> reports);
void write_reports_html(std::ostream& out,
                        std::span<const DiscrepancyReport> reports);

}  // namespace nbrs::decoding
