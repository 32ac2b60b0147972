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

#include <sstream>

#include "doctest.h"
#include "nbrs/baseline/baseline.hpp"
#include "nbrs/errors.hpp"
#include "nbrs/numerics/rng.hpp"
#include "nbrs/textdata/unicode.hpp"

using namespace nbrs;
using namespace nbrs::baseline;
using Pairs = std::vector<Aligner::Pair>;

namespace {

Pairs deer_corpus() {
  return {{"鹿", "しか"},         {"飼", "がい"},         {"道", "みち"},
          {"下", "した"},         {"野", "の"},           {"鹿野", "しかの"},
          {"道野", "みちの"},     {"飼道", "がいみち"},   {"道下", "みちした"},
          {"野鹿", "のしか"},     {"下野", "したの"},     {"鹿飼", "しかがい"},
          {"鹿飼道下", "しかがいみちした"}};
}

geo::Neighbor nb(const std::string& name, const std::string& pron, double d) {
  return {"n" + name, name, pron, d, false};
}

std::vector<AlignedUnit> units_of(
    std::initializer_list<std::pair<const char*, const char*>> u) {
  std::vector<AlignedUnit> out;
  for (auto [s, k] : u) out.push_back({s, k});
  return out;
}

}  // namespace

TEST_CASE("kana names align to themselves with probability one") {
  const Pairs pairs{{"さくら", "さくら"}, {"カワ", "かわ"}};
  const auto al = Aligner::train(pairs);
  const auto a = al.align("さくら", "さくら");
  REQUIRE(a);
  CHECK(a->units == units_of({{"さ", "さ"}, {"く", "く"}, {"ら", "ら"}}));
  CHECK(a->log_prob == 0.0);
  CHECK(al.align("カワ", "かわ")->units == units_of({{"カ", "か"}, {"ワ", "わ"}}));
  CHECK_FALSE(al.align("さくら", "さくま").has_value());
}

TEST_CASE("a repeated singleton learns its reading") {
  const Pairs pairs(50, {"山", "やま"});
  const auto al = Aligner::train(pairs);
  CHECK(al.converged());
  CHECK(al.probability("山", "やま") > 0.99);
  CHECK(al.align("山", "やま")->units == units_of({{"山", "やま"}}));
}

TEST_CASE("per-character alignment of the deer-road example") {
  const auto al = Aligner::train(deer_corpus());
  CHECK(al.converged());
  const auto a = al.align("鹿飼道下", "しかがいみちした");
  REQUIRE(a);
  CHECK(a->units == units_of({{"鹿", "しか"}, {"飼", "がい"}, {"道", "みち"}, {"下", "した"}}));
}

TEST_CASE("pairs with too short a reading are skipped with a diagnostic") {
  const Pairs pairs{{"山", "やま"}, {"あいう", "あ"}};
  std::vector<geo::Diagnostic> diags;
  const auto al = Aligner::train(pairs, {}, &diags);
  CHECK(al.trained_pairs() == 1);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].line == 1);
  CHECK_THROWS_AS(Aligner::train(Pairs{}), DataError);
}

TEST_CASE("alignments are monotone partitions") {
  num::RngState rng(11);
  const std::vector<std::string> kanji{"山", "川", "田", "中", "本", "上", "下"};
  const std::vector<std::string> kana{"や", "ま", "か", "わ", "た", "な", "ほ", "ん", "う", "え"};
  Pairs pairs;
  for (int i = 0; i < 200; ++i) {
    std::string name, pron;
    const auto n = 1 + rng.below(4), m = n + rng.below(5);
    for (std::size_t k = 0; k < n; ++k) {
      name += rng.bernoulli(0.2) ? kana[rng.below(kana.size())] : kanji[rng.below(kanji.size())];
    }
    for (std::size_t k = 0; k < m; ++k) pron += kana[rng.below(kana.size())];
    pairs.emplace_back(name, pron);
  }
  AlignerConfig cfg;
  cfg.max_iterations = 30;
  const auto al = Aligner::train(pairs, cfg);
  std::size_t aligned = 0;
  for (const auto& [name, pron] : pairs) {
    const auto a = al.align(name, pron);
    if (!a) continue;
    ++aligned;
    CHECK(a->spelling() == name);
    CHECK(a->reading() == pron);
    for (const auto& u : a->units) {
      const auto s = text::decode_utf8(u.spelling).size();
      CHECK(s >= 1);
      CHECK(s <= cfg.max_spelling);
      CHECK(text::decode_utf8(u.kana).size() <= cfg.max_kana);
    }
  }
  CHECK(aligned > 100);
}

TEST_CASE("lexicon counts and ties") {
  ReadingLexicon lex;
  lex.add("上", "うえ");
  lex.add("上", "かみ");
  CHECK(*lex.top("上") == "うえ");
  lex.add("上", "かみ");
  CHECK(*lex.top("上") == "かみ");
  lex.add("あい", "あい");
  CHECK_FALSE(lex.contains("あい"));
  std::ostringstream tsv;
  lex.write_tsv(tsv);
  CHECK(tsv.str() == "上\tかみ\t2\n上\tうえ\t1\n");
}

TEST_CASE("base reading") {
  ReadingLexicon lex;
  lex.add("鹿", "しし");
  lex.add("飼", "かい");
  lex.add("道", "みち");
  lex.add("上", "うえ");
  lex.add("上野", "うえの");
  CHECK(base_reading("さくらカワ", lex).reading() == "さくらかわ");
  CHECK(base_reading("上野", lex).reading() == "うえの");
  CHECK(base_reading("鹿飼道上", lex).reading() == "ししかいみちうえ");
  CHECK(base_reading("鹿森", lex).reading() == "しし?");
}

TEST_CASE("neighbor lexicon") {
  const auto al = Aligner::train(deer_corpus());
  geo::Neighborhood n;
  SUBCASE("empty neighborhood") { CHECK(neighbor_lexicon(n, al).empty()); }
  SUBCASE("single neighbor contributes its whole-name reading") {
    n.neighbors = {nb("反町", "たんまち", 1.0)};
    CHECK(*neighbor_lexicon(n, al).top("反町") == "たんまち");
  }
  SUBCASE("majority reading wins") {
    n.neighbors = {nb("鹿", "しし", 0.1), nb("鹿", "しか", 0.5), nb("鹿", "しか", 0.9)};
    CHECK(*neighbor_lexicon(n, al).top("鹿") == "しか");
  }
  SUBCASE("ties go to the nearest neighbor") {
    n.neighbors = {nb("鹿", "しし", 0.9), nb("鹿", "しか", 0.2)};
    CHECK(*neighbor_lexicon(n, al).top("鹿") == "しか");
  }
}

TEST_CASE("substitution") {
  const auto al = Aligner::train(deer_corpus());
  ReadingLexicon base_lex;
  base_lex.add("鹿", "しし");
  base_lex.add("飼", "かい");
  base_lex.add("道", "みち");
  base_lex.add("上", "うえ");
  const auto base = base_reading("鹿飼道上", base_lex);
  geo::Neighborhood n;
  n.neighbors = {nb("鹿飼道下", "しかがいみちした", 0.4)};
  const auto lex = neighbor_lexicon(n, al);
  CHECK(*lex.top("鹿飼道") == "しかがいみち");
  const auto fixed = substitute(base, lex);
  CHECK(fixed.reading() == "しかがいみちうえ");
  CHECK(substitute(fixed, lex).reading() == fixed.reading());
  CHECK(substitute(base, ReadingLexicon{}).reading() == base.reading());
  ReadingLexicon whole;
  whole.add("鹿飼道上", "かがみ");
  CHECK(substitute(base, whole).reading() == "かがみ");
}

TEST_CASE("substitution is idempotent on random lexicons") {
  num::RngState rng(5);
  const std::vector<std::string> kanji{"山", "川", "田", "中", "本"};
  const std::vector<std::string> kana{"や", "ま", "か", "わ", "た"};
  for (int trial = 0; trial < 200; ++trial) {
    ReadingLexicon base_lex, lex;
    for (const auto& k : kanji) base_lex.add(k, kana[rng.below(kana.size())]);
    std::string name;
    for (std::size_t i = 0, n = 1 + rng.below(6); i < n; ++i) name += kanji[rng.below(kanji.size())];
    for (int e = 0; e < 6; ++e) {
      std::string key;
      for (std::size_t i = 0, n = 1 + rng.below(3); i < n; ++i) key += kanji[rng.below(kanji.size())];
      lex.add(key, kana[rng.below(kana.size())] + kana[rng.below(kana.size())]);
    }
    const auto once = substitute(base_reading(name, base_lex), lex);
    const auto twice = substitute(once, lex);
    CHECK(once.units == twice.units);
    CHECK(once.spelling() == name);
  }
}

TEST_CASE("neighbors never hurt when their readings agree with the targets") {
  // Each kanji has a common reading and a local one; targets and their
  // neighbors use the local reading, training pairs mostly the common one.
  const std::vector<std::string> kanji{"鹿", "飼", "道", "森", "川", "谷", "原", "沢"};
  const std::vector<std::string> common{"しし", "かい", "みち", "もり", "かわ", "たに", "はら", "さわ"};
  const std::vector<std::string> local{"しか", "がい", "どう", "しん", "がわ", "や", "ばる", "ざわ"};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    num::RngState rng(seed);
    auto word = [&](bool loc, std::string* pron) {
      std::string name;
      for (std::size_t i = 0, n = 1 + rng.below(3); i < n; ++i) {
        const auto k = rng.below(kanji.size());
        name += kanji[k];
        *pron += loc ? local[k] : common[k];
      }
      return name;
    };
    Pairs train;
    for (int i = 0; i < 300; ++i) {
      std::string pron;
      const bool loc = rng.bernoulli(0.2);
      auto name = word(loc, &pron);
      train.emplace_back(name, pron);
    }
    for (std::size_t k = 0; k < kanji.size(); ++k) {
      train.emplace_back(kanji[k], common[k]);
      train.emplace_back(kanji[k], local[k]);
    }
    const auto al = Aligner::train(train);
    const auto lex = build_lexicon(train, al);
    std::vector<geo::Neighborhood> data;
    for (int i = 0; i < 60; ++i) {
      geo::Neighborhood n;
      std::string pron;
      n.target.name = word(true, &pron);
      n.target.pron = pron;
      for (int j = 0; j < 4; ++j) {
        std::string np;
        auto name = word(true, &np);
        n.neighbors.push_back(nb(name, np, 0.1 * (j + 1)));
      }
      data.push_back(n);
    }
    std::size_t err_base = 0, err_nb = 0;
    const auto preds = predict(data, lex, al);
    for (std::size_t i = 0; i < data.size(); ++i) {
      err_base += preds[i].base != data[i].target.pron;
      err_nb += preds[i].with_neighbors != data[i].target.pron;
    }
    CAPTURE(seed);
    CHECK(err_nb <= err_base);
    CHECK(err_nb < err_base);
  }
}
