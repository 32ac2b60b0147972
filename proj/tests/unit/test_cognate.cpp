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

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "cognate_oracles.hpp"
#include "doctest.h"
#include "nbrs/cognate/cognate.hpp"
#include "nbrs/errors.hpp"
#include "nbrs/model/model.hpp"
#include "nbrs/synth/cognate_synth.hpp"
#include "nbrs/textdata/vocab.hpp"

using namespace nbrs;
using namespace nbrs::cognate;

namespace {

Form f(const std::string& s) { return text::split_tokens(s); }

std::map<std::string, Form> as_map(const CognateSet& s) {
  return {s.forms.begin(), s.forms.end()};
}

}  // namespace

TEST_CASE("table loading") {
  SUBCASE("a marked target") {
    std::istringstream in("id\tL1\tL2\tL3\nc1\t?\tθ a r u\td a i\n");
    const auto table = read_table(in);
    REQUIRE(table.sets.size() == 1);
    const auto& s = table.sets[0];
    CHECK(s.target == "L1");
    CHECK(s.related() == 2);
    CHECK(*s.form("L2") == Form{"θ", "a", "r", "u"});
  }
  SUBCASE("the shared-task pattern") {
    std::istringstream in("id\tL1\tL2\tL3\tL4\nc9\td a r e\tθ a r u\td a r e\td a i\n");
    const auto table = read_table(in, "L1");
    REQUIRE(table.sets.size() == 1);
    const auto n = to_neighborhood(table.sets[0]);
    CHECK(n.target.name == "L1");
    CHECK(n.target.pron == "d a r e");
    REQUIRE(n.neighbors.size() == 3);
    CHECK(n.neighbors[0].name == "L2");
    CHECK(n.neighbors[0].pron == "θ a r u");
  }
  SUBCASE("header only") {
    std::istringstream in("id\tA\tB\n");
    CHECK(read_table(in).sets.empty());
  }
  SUBCASE("rows with fewer than two forms are skipped") {
    std::istringstream in("id\tA\tB\tC\nc1\ta\t\t?\nc2\ta\tb\t\n");
    const auto table = read_table(in);
    CHECK(table.sets.size() == 1);
    REQUIRE(table.diagnostics.size() == 1);
    CHECK(table.diagnostics[0].line == 2);
  }
  CHECK_THROWS_AS(load_table("/nonexistent/cognates.tsv"), DataError);
}

TEST_CASE("tables round-trip with predictions filled in") {
  std::istringstream in("id\tA\tB\tC\nc1\t?\tb a\tk a\nc2\tm i\t\tn i\n");
  const auto table = read_table(in);
  std::ostringstream out;
  const std::vector<std::string> preds{"p a", ""};
  write_table(out, table.languages, table.sets, preds);
  CHECK(out.str() == "id\tA\tB\tC\nc1\tp a\tb a\tk a\nc2\tm i\t\tn i\n");
}

TEST_CASE("neighborhood mapping preserves the set") {
  const auto fam = synth::generate_family({});
  for (const auto& s : expand_targets(fam.sets)) {
    const auto n = to_neighborhood(s);
    CHECK(n.neighbors.size() == s.related());
    const auto back = from_neighborhood(n);
    CHECK(back.id == s.id);
    CHECK(back.target == s.target);
    CHECK(as_map(back) == as_map(s));
  }
}

TEST_CASE("interleaved memory has one row per token") {
  CognateSet s{"c1", {{"A", f("d a r e")}, {"B", f("θ a r u")}}, "A", false};
  const auto n = to_neighborhood(s);
  auto cfg = cognate_model_config(2);
  cfg.emb_size = 16;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.layers = 1;
  const std::vector<geo::Neighborhood> data{n};
  const auto v = model::build_vocabs(data, cfg);
  const auto ex = model::prepare_example(n, v, cfg);
  CHECK(ex.inp.size() == 1);
  model::Model<float> m(cfg, v.input.size(), v.output.size(), 1);
  const auto mem = m.encode(ex);
  // Target language id, then language id and four phonemes.
  CHECK(mem.rows.shape()[0] == 1 + 1 + 4);
  auto longer = s;
  longer.forms[1].second = f("θ a r u r u r u");
  const auto mem2 = m.encode(model::prepare_example(to_neighborhood(longer), v, cfg));
  CHECK(mem2.rows.shape()[0] == 1 + 1 + 8);
}

TEST_CASE("drop augmentation") {
  CognateSet three{"c1", {{"A", f("a")}, {"B", f("b")}, {"C", f("c")}, {"D", f("d")}}, "A", false};
  CognateSet one{"c2", {{"A", f("a")}, {"B", f("b")}}, "A", false};
  const std::vector<CognateSet> sets{three, one};
  CHECK(augment_drop(sets, 0, 1).size() == 2);
  const auto out = augment_drop(sets, 4, 1);
  REQUIRE(out.size() == 2 + 8);
  std::set<std::size_t> seen_sizes;
  for (std::size_t i = 2; i < 6; ++i) {
    CHECK(out[i].form("A") != nullptr);
    CHECK(out[i].related() >= 1);
    CHECK(out[i].related() <= 2);
    seen_sizes.insert(out[i].related());
  }
  for (std::size_t i = 6; i < 10; ++i) CHECK(as_map(out[i]) == as_map(one));
  CHECK(as_map(out[0]) == as_map(three));
  const auto again = augment_drop(sets, 4, 1);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(as_map(again[i]) == as_map(out[i]));

  SUBCASE("kept subsets are uniform over the allowed ones") {
    std::map<std::string, std::size_t> counts;
    const auto many = augment_drop(std::vector<CognateSet>{three}, 6000, 2);
    for (std::size_t i = 1; i < many.size(); ++i) {
      std::string key;
      for (const auto& [l, form] : many[i].forms) key += l;
      ++counts[key];
    }
    CHECK(counts.size() == 6);  // 2^3 - 2
    for (const auto& [k, c] : counts) CHECK(std::abs(double(c) - 1000.0) < 120.0);
  }
}

TEST_CASE("n-gram augmentation") {
  SUBCASE("single-token forms stay single tokens from the alphabet") {
    std::vector<CognateSet> sets;
    for (const char* t : {"a", "b", "c"}) {
      sets.push_back({std::string("s") + t, {{"A", f(t)}, {"B", f(t)}}, "A", false});
    }
    NgramModel m(3, std::vector<Form>{f("a"), f("b"), f("c")});
    CHECK(m.alphabet() == std::vector<std::string>{"a", "b", "c"});
    const auto out = augment_ngram(sets, 3, 50, 4);
    REQUIRE(out.size() == 53);
    for (std::size_t i = 3; i < out.size(); ++i) {
      CHECK(out[i].synthetic);
      for (const auto& [l, form] : out[i].forms) {
        for (const auto& t : form) CHECK((t == "a" || t == "b" || t == "c"));
      }
    }
    const auto again = augment_ngram(sets, 3, 50, 4);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(as_map(again[i]) == as_map(out[i]));
  }
  SUBCASE("sampled unigram frequencies follow the training data") {
    // Add-one smoothing is negligible only when counts dwarf the contexts.
    synth::CognateSynthConfig big;
    big.sets = 30000;
    const auto fam = synth::generate_family(big);
    std::vector<Form> forms;
    for (const auto& s : fam.sets) {
      if (const Form* x = s.form("L1")) forms.push_back(*x);
    }
    std::map<std::string, double> train_freq, gen_freq;
    double train_total = 0, gen_total = 0;
    for (const auto& x : forms) {
      for (const auto& t : x) {
        train_freq[t] += 1;
        train_total += 1;
      }
    }
    NgramModel m(3, forms);
    num::RngState rng(8);
    for (int i = 0; i < 10000; ++i) {
      for (const auto& t : m.sample(rng, 40)) {
        gen_freq[t] += 1;
        gen_total += 1;
      }
    }
    for (const auto& [t, c] : train_freq) {
      const double p = c / train_total, q = gen_freq[t] / gen_total;
      CAPTURE(t);
      if (p >= 0.05) CHECK(std::abs(q - p) <= 0.05 * p + 0.005);
    }
  }
}

TEST_CASE("scoring") {
  SUBCASE("perfect predictions") {
    const std::vector<Form> refs{f("d a r e"), f("θ a r u"), f("k a")};
    const auto r = score(refs, refs);
    CHECK(r.ned == 0.0);
    CHECK(r.bleu == doctest::Approx(1.0));
    CHECK(r.bcubed == 1.0);
  }
  SUBCASE("disjoint single tokens") {
    const std::vector<Form> p{f("a"), f("b")}, r{f("x"), f("y")};
    CHECK(score(p, r).ned == 1.0);
    CHECK(score(p, r).bleu == 0.0);
  }
  SUBCASE("hand pair") {
    CHECK(normalized_edit_distance(f("d a r e"), f("d a r i")) == 0.25);
  }
  SUBCASE("empty references are skipped") {
    const std::vector<Form> p{f("a"), f("b")}, r{f("a"), Form{}};
    const auto s = score(p, r);
    CHECK(s.pairs == 1);
    CHECK(s.skipped == 1);
  }
  SUBCASE("edit distance agrees with the recursive oracle") {
    num::RngState rng(1);
    const std::vector<std::string> alphabet{"a", "b", "c", "θ"};
    for (int t = 0; t < 300; ++t) {
      Form a, b;
      for (std::size_t i = 0, n = rng.below(7); i < n; ++i) a.push_back(alphabet[rng.below(4)]);
      for (std::size_t i = 0, n = rng.below(7); i < n; ++i) b.push_back(alphabet[rng.below(4)]);
      CHECK(edit_distance(a, b) == nbrs::testing::oracle_distance(a, b));
      const double ned = normalized_edit_distance(a, b);
      CHECK(ned >= 0.0);
      CHECK(ned <= 1.0);
      CHECK(bcubed_f(a, a) == 1.0);
    }
  }
  SUBCASE("b-cubed on a substitution") {
    // Columns (d,d) (a,a) (r,r) (e,i) give four singleton clusters on
    // both sides, so the clusterings coincide.
    CHECK(bcubed_f(f("d a r e"), f("d a r i")) == 1.0);
    // Columns (a,a) (a,b): predicted cluster {1,2}, gold clusters {1} {2}.
    CHECK(bcubed_f(f("a a"), f("a b")) == doctest::Approx(2 * 0.5 * 1.0 / 1.5));
  }
  SUBCASE("bleu by hand") {
    // Unigrams 3/4, bigrams 1/3, trigrams 0/2 -> zero.
    CHECK(corpus_bleu(std::vector<Form>{f("a b c d")}, std::vector<Form>{f("a b x c")}) == 0.0);
    // Two-token candidate: orders three and four have no n-grams.
    const double b = corpus_bleu(std::vector<Form>{f("a b")}, std::vector<Form>{f("a c")});
    CHECK(b == 0.0);
    const double c = corpus_bleu(std::vector<Form>{f("a b")}, std::vector<Form>{f("a b")});
    CHECK(c == doctest::Approx(1.0));
  }
}

TEST_CASE("synthetic family") {
  const auto fam = synth::generate_family({});
  CHECK(fam.sets.size() == 300);
  CHECK(fam.languages.size() == 5);
  for (std::size_t i = 0; i < fam.sets.size(); ++i) {
    CHECK(fam.sets[i].forms.size() >= 3);
    for (const auto& [lang, form] : fam.sets[i].forms) {
      const auto l = static_cast<std::size_t>(lang[1] - '1');
      CHECK(form == synth::sound_change(fam.protoforms[i], l));
    }
  }
  CHECK(synth::sound_change(f("t a k i p e"), 1) == f("θ a tʃ i p i"));
  CHECK(synth::sound_change(f("s a p a t o"), 2) == f("h a b a d o"));
  CHECK(synth::sound_change(f("r o t a"), 3) == f("l u t"));
  CHECK(synth::sound_change(f("d a d a n"), 4) == f("d e ð e ŋ"));
}
