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

#include "nbrs/cognate/cognate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nbrs/errors.hpp"
#include "nbrs/textdata/vocab.hpp"

namespace nbrs::cognate {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, '\t')) out.push_back(cell);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \r") - b + 1);
}

}  // namespace

const Form* CognateSet::form(const std::string& language) const {
  for (const auto& [lang, f] : forms) {
    if (lang == language) return &f;
  }
  return nullptr;
}

std::size_t CognateSet::related() const {
  std::size_t n = 0;
  for (const auto& [lang, f] : forms) n += lang != target;
  return n;
}

CognateTable read_table(std::istream& in, const std::string& default_target) {
  CognateTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("cognate table has no header row");
  const auto header = split_tabs(line);
  if (header.size() < 3) throw DataError("cognate table needs an id column and two languages");
  for (std::size_t i = 1; i < header.size(); ++i) t.languages.push_back(trim(header[i]));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_tabs(line);
    CognateSet s;
    s.id = trim(cells[0]);
    std::string marked;
    for (std::size_t i = 1; i < cells.size() && i <= t.languages.size(); ++i) {
      const auto cell = trim(cells[i]);
      const auto& lang = t.languages[i - 1];
      if (cell == "?") {
        if (marked.empty()) {
          marked = lang;
        } else {
          t.diagnostics.push_back({line_no, "several '?' cells; treating " + lang + " as missing"});
        }
      } else if (!cell.empty()) {
        s.forms.emplace_back(lang, text::split_tokens(cell));
      }
    }
    if (s.forms.size() < 2) {
      t.diagnostics.push_back({line_no, "set '" + s.id + "' has fewer than two forms"});
      continue;
    }
    if (!marked.empty()) {
      s.target = marked;
    } else if (!default_target.empty() && s.form(default_target)) {
      s.target = default_target;
    }
    t.sets.push_back(std::move(s));
  }
  return t;
}

CognateTable load_table(const std::string& path, const std::string& default_target) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open cognate table " + path);
  return read_table(in, default_target);
}

void write_table(std::ostream& out, std::span<const std::string> languages,
                 std::span<const CognateSet> sets, std::span<const std::string> predictions) {
  out << "id";
  for (const auto& l : languages) out << '\t' << l;
  out << '\n';
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& s = sets[i];
    out << s.id;
    for (const auto& l : languages) {
      out << '\t';
      if (const Form* f = s.form(l)) {
        out << text::join_tokens(*f);
      } else if (l == s.target) {
        out << (i < predictions.size() && !predictions[i].empty() ? predictions[i] : "?");
      }
    }
    out << '\n';
  }
}

std::vector<CognateSet> expand_targets(std::span<const CognateSet> sets) {
  std::vector<CognateSet> out;
  for (const auto& s : sets) {
    for (const auto& [lang, f] : s.forms) {
      CognateSet c = s;
      c.target = lang;
      c.id = s.id + ":" + lang;
      out.push_back(std::move(c));
    }
  }
  return out;
}

geo::Neighborhood to_neighborhood(const CognateSet& s) {
  if (s.target.empty()) throw UsageError("cognate set '" + s.id + "' has no target language");
  geo::Neighborhood n;
  n.target.id = s.id;
  n.target.name = s.target;
  if (const Form* f = s.form(s.target)) n.target.pron = text::join_tokens(*f);
  for (const auto& [lang, f] : s.forms) {
    if (lang == s.target) continue;
    n.neighbors.push_back({lang, lang, text::join_tokens(f), 0.0, false});
  }
  return n;
}

CognateSet from_neighborhood(const geo::Neighborhood& n) {
  CognateSet s;
  s.id = n.target.id;
  s.target = n.target.name;
  if (!n.target.pron.empty()) s.forms.emplace_back(s.target, text::split_tokens(n.target.pron));
  for (const auto& nb : n.neighbors) s.forms.emplace_back(nb.name, text::split_tokens(nb.pron));
  return s;
}

model::ModelConfig cognate_model_config(std::size_t languages) {
  model::ModelConfig c;
  c.layers = 2;
  c.heads = 4;
  c.emb_size = 64;
  c.hidden = 128;
  c.nneigh = std::max<std::size_t>(1, languages > 0 ? languages - 1 : 1);
  c.name_len = 4;
  c.pron_len = 24;
  c.use_neighbors = true;
  c.use_latlong = false;
  c.neighbor_dropout = 0.0;
  c.interleave = true;
  c.token_level = true;
  return c;
}

std::vector<CognateSet> augment_drop(std::span<const CognateSet> sets, std::size_t copies,
                                     std::uint64_t seed) {
  num::RngState rng(seed);
  std::vector<CognateSet> out(sets.begin(), sets.end());
  for (const auto& s : sets) {
    std::vector<std::size_t> related;
    for (std::size_t i = 0; i < s.forms.size(); ++i) {
      if (s.forms[i].first != s.target) related.push_back(i);
    }
    const std::size_t k = related.size();
    if (k >= 63) throw UsageError("augment_drop: too many related forms");
    for (std::size_t c = 0; c < copies; ++c) {
      CognateSet copy = s;
      copy.id = s.id + "#drop" + std::to_string(c);
      if (k > 1) {
        // Kept subset, uniform over the 2^k - 2 nonempty proper subsets.
        const std::uint64_t mask = 1 + rng.below((std::uint64_t{1} << k) - 2);
        copy.forms.clear();
        for (std::size_t i = 0, r = 0; i < s.forms.size(); ++i) {
          const bool is_related = r < k && related[r] == i;
          if (!is_related) {
            copy.forms.push_back(s.forms[i]);
            continue;
          }
          if (mask >> r & 1) copy.forms.push_back(s.forms[i]);
          ++r;
        }
      }
      out.push_back(std::move(copy));
    }
  }
  return out;
}

NgramModel::NgramModel(std::size_t order, std::span<const Form> forms) : order_(order) {
  if (order == 0) throw UsageError("n-gram order must be positive");
  std::map<std::string, int> index;
  for (const auto& f : forms) {
    for (const auto& t : f) index.emplace(t, 0);
  }
  for (auto& [tok, id] : index) {
    id = static_cast<int>(alphabet_.size());
    alphabet_.push_back(tok);
  }
  const int end = static_cast<int>(alphabet_.size());
  for (const auto& f : forms) {
    std::vector<int> ctx(order_ - 1, -1);
    std::vector<int> seq;
    for (const auto& t : f) seq.push_back(index.at(t));
    seq.push_back(end);
    for (int id : seq) {
      auto& c = counts_[ctx];
      c.resize(alphabet_.size() + 1, 0.0);
      c[static_cast<std::size_t>(id)] += 1.0;
      if (!ctx.empty()) {
        ctx.erase(ctx.begin());
        ctx.push_back(id);
      }
    }
  }
}

Form NgramModel::sample(num::RngState& rng, std::size_t max_len) const {
  const std::size_t v = alphabet_.size() + 1;
  std::vector<int> ctx(order_ - 1, -1);
  Form out;
  while (out.size() < max_len) {
    auto it = counts_.find(ctx);
    double total = static_cast<double>(v);
    if (it != counts_.end()) {
      for (double c : it->second) total += c;
    }
    double u = rng.uniform() * total;
    std::size_t pick = v - 1;
    for (std::size_t i = 0; i < v; ++i) {
      u -= 1.0 + (it != counts_.end() ? it->second[i] : 0.0);
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    if (pick == alphabet_.size()) break;
    out.push_back(alphabet_[pick]);
    if (!ctx.empty()) {
      ctx.erase(ctx.begin());
      ctx.push_back(static_cast<int>(pick));
    }
  }
  return out;
}

std::vector<CognateSet> augment_ngram(std::span<const CognateSet> sets, std::size_t order,
                                      std::size_t count, std::uint64_t seed) {
  std::vector<CognateSet> out(sets.begin(), sets.end());
  if (count == 0) return out;
  if (sets.empty()) throw DataError("augment_ngram needs training sets");
  std::vector<std::string> languages;
  std::map<std::string, std::vector<Form>> by_lang;
  std::size_t longest = 1;
  for (const auto& s : sets) {
    for (const auto& [lang, f] : s.forms) {
      if (!by_lang.count(lang)) languages.push_back(lang);
      by_lang[lang].push_back(f);
      longest = std::max(longest, f.size());
    }
  }
  std::map<std::string, NgramModel> models;
  for (const auto& l : languages) models.emplace(l, NgramModel(order, by_lang[l]));
  num::RngState rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    CognateSet s;
    s.id = "syn" + std::to_string(i);
    s.synthetic = true;
    s.target = sets[i % sets.size()].target;
    if (s.target.empty()) s.target = languages[i % languages.size()];
    for (const auto& l : languages) {
      Form f;
      for (int attempt = 0; attempt < 10 && f.empty(); ++attempt) {
        f = models.at(l).sample(rng, 2 * longest);
      }
      if (!f.empty()) s.forms.emplace_back(l, std::move(f));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double normalized_edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  const std::size_t m = std::max(a.size(), b.size());
  if (m == 0) return 0.0;
  return static_cast<double>(edit_distance(a, b)) / static_cast<double>(m);
}

double bcubed_f(std::span<const std::string> pred, std::span<const std::string> ref) {
  const std::size_t n = pred.size(), m = ref.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (pred[i - 1] != ref[j - 1])});
    }
  }
  // Columns as (predicted symbol, reference symbol), "-" for gaps.
  std::vector<std::pair<std::string, std::string>> cols;
  for (std::size_t i = n, j = m; i > 0 || j > 0;) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (pred[i - 1] != ref[j - 1])) {
      cols.emplace_back(pred[i - 1], ref[j - 1]);
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      cols.emplace_back(pred[i - 1], "-");
      --i;
    } else {
      cols.emplace_back("-", ref[j - 1]);
      --j;
    }
  }
  if (cols.empty()) return 1.0;
  double precision = 0.0, recall = 0.0;
  for (const auto& c : cols) {
    std::size_t same_pred = 0, same_ref = 0, both = 0;
    for (const auto& o : cols) {
      same_pred += o.first == c.first;
      same_ref += o.second == c.second;
      both += o.first == c.first && o.second == c.second;
    }
    precision += static_cast<double>(both) / static_cast<double>(same_pred);
    recall += static_cast<double>(both) / static_cast<double>(same_ref);
  }
  precision /= static_cast<double>(cols.size());
  recall /= static_cast<double>(cols.size());
  return 2.0 * precision * recall / (precision + recall);
}

double corpus_bleu(std::span<const Form> preds, std::span<const Form> refs) {
  if (preds.size() != refs.size()) throw UsageError("corpus_bleu: length mismatch");
  double log_sum = 0.0;
  std::size_t orders = 0, cand_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    cand_len += preds[i].size();
    ref_len += refs[i].size();
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t matches = 0, total = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      std::map<std::vector<std::string>, std::size_t> ref_counts;
      for (std::size_t k = 0; k + n <= refs[i].size(); ++k) {
        ++ref_counts[{refs[i].begin() + k, refs[i].begin() + k + n}];
      }
      std::map<std::vector<std::string>, std::size_t> cand_counts;
      for (std::size_t k = 0; k + n <= preds[i].size(); ++k) {
        ++cand_counts[{preds[i].begin() + k, preds[i].begin() + k + n}];
        ++total;
      }
      for (const auto& [g, c] : cand_counts) {
        auto it = ref_counts.find(g);
        if (it != ref_counts.end()) matches += std::min(c, it->second);
      }
    }
    if (total == 0) continue;
    if (matches == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches) / static_cast<double>(total));
    ++orders;
  }
  if (orders == 0 || cand_len == 0) return 0.0;
  const double bp = cand_len >= ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_sum / static_cast<double>(orders));
}

ScoreReport score(std::span<const Form> preds, std::span<const Form> refs) {
  if (preds.size() != refs.size()) throw UsageError("score: predictions and references differ in count");
  ScoreReport r;
  std::vector<Form> kept_p, kept_r;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].empty()) {
      ++r.skipped;
      continue;
    }
    r.ned += normalized_edit_distance(preds[i], refs[i]);
    r.bcubed += bcubed_f(preds[i], refs[i]);
    kept_p.push_back(preds[i]);
    kept_r.push_back(refs[i]);
  }
  r.pairs = kept_r.size();
  if (r.pairs > 0) {
    r.ned /= static_cast<double>(r.pairs);
    r.bcubed /= static_cast<double>(r.pairs);
    r.bleu = corpus_bleu(kept_p, kept_r);
  }
  return r;
}

}  // namespace nbrs::cognate
