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

#include "nbrs/synth/cognate_synth.hpp"

#include <functional>

#include "nbrs/errors.hpp"
#include "nbrs/numerics/rng.hpp"

namespace nbrs::synth {

namespace {

using cognate::Form;

bool vowel(const std::string& t) {
  return t == "a" || t == "e" || t == "i" || t == "o" || t == "u";
}

// Context-sensitive rewrite of single tokens, applied simultaneously.
using Rule = std::function<std::string(const Form& w, std::size_t i)>;

Form rewrite(const Form& w, const Rule& r) {
  Form out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto t = r(w, i);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

bool intervocalic(const Form& w, std::size_t i) {
  return i > 0 && i + 1 < w.size() && vowel(w[i - 1]) && vowel(w[i + 1]);
}

const std::vector<std::vector<Rule>>& rules() {
  static const std::vector<std::vector<Rule>> kRules{
      // L1: p > f.
      {[](const Form& w, std::size_t i) { return w[i] == "p" ? "f" : w[i]; }},
      // L2: t > θ before a; k > tʃ before front vowels; final e > i.
      {[](const Form& w, std::size_t i) {
         const bool next_a = i + 1 < w.size() && w[i + 1] == "a";
         const bool next_front = i + 1 < w.size() && (w[i + 1] == "i" || w[i + 1] == "e");
         if (w[i] == "t" && next_a) return std::string("θ");
         if (w[i] == "k" && next_front) return std::string("tʃ");
         return w[i];
       },
       [](const Form& w, std::size_t i) {
         return i + 1 == w.size() && w[i] == "e" ? std::string("i") : w[i];
       }},
      // L3: intervocalic voicing of stops; s > h.
      {[](const Form& w, std::size_t i) {
         if (intervocalic(w, i)) {
           if (w[i] == "p") return std::string("b");
           if (w[i] == "t") return std::string("d");
           if (w[i] == "k") return std::string("g");
         }
         return w[i] == "s" ? std::string("h") : w[i];
       }},
      // L4: r > l; o > u; final vowels drop after three segments.
      {[](const Form& w, std::size_t i) {
         if (w[i] == "r") return std::string("l");
         if (w[i] == "o") return std::string("u");
         return w[i];
       },
       [](const Form& w, std::size_t i) {
         return i + 1 == w.size() && w.size() > 3 && vowel(w[i]) ? std::string() : w[i];
       }},
      // L5: a > e; intervocalic d > ð; final n > ŋ.
      {[](const Form& w, std::size_t i) {
         if (intervocalic(w, i) && w[i] == "d") return std::string("ð");
         if (i + 1 == w.size() && w[i] == "n") return std::string("ŋ");
         return w[i];
       },
       [](const Form& w, std::size_t i) { return w[i] == "a" ? std::string("e") : w[i]; }},
  };
  return kRules;
}

}  // namespace

Form sound_change(const Form& proto, std::size_t language) {
  if (language >= kFamilySize) throw UsageError("no such daughter language");
  Form w = proto;
  for (const auto& r : rules()[language]) w = rewrite(w, r);
  return w;
}

CognateFamily generate_family(const CognateSynthConfig& cfg) {
  if (cfg.min_syllables == 0 || cfg.min_syllables > cfg.max_syllables) {
    throw UsageError("cognate family: inconsistent syllable counts");
  }
  static const std::vector<std::string> kConsonants{"p", "t", "k", "b", "d", "g", "m",
                                                    "n", "s", "r", "l", "w", "j"};
  static const std::vector<std::string> kVowels{"a", "e", "i", "o", "u"};
  num::RngState rng(cfg.seed);
  CognateFamily fam;
  for (std::size_t l = 0; l < kFamilySize; ++l) fam.languages.push_back("L" + std::to_string(l + 1));
  for (std::size_t s = 0; s < cfg.sets; ++s) {
    Form proto;
    const std::size_t syl = cfg.min_syllables + rng.below(cfg.max_syllables - cfg.min_syllables + 1);
    for (std::size_t k = 0; k < syl; ++k) {
      proto.push_back(kConsonants[rng.below(kConsonants.size())]);
      proto.push_back(kVowels[rng.below(kVowels.size())]);
    }
    if (rng.bernoulli(0.3)) proto.push_back("n");
    std::vector<bool> present(kFamilySize);
    std::size_t kept = 0;
    do {
      kept = 0;
      for (std::size_t l = 0; l < kFamilySize; ++l) {
        present[l] = !rng.bernoulli(cfg.missing);
        kept += present[l];
      }
    } while (kept < 3);
    cognate::CognateSet set;
    set.id = "c" + std::to_string(s + 1);
    for (std::size_t l = 0; l < kFamilySize; ++l) {
      if (present[l]) set.forms.emplace_back(fam.languages[l], sound_change(proto, l));
    }
    fam.sets.push_back(std::move(set));
    fam.protoforms.push_back(std::move(proto));
  }
  return fam;
}

}  // namespace nbrs::synth
