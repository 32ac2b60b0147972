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

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "nbrs/baseline/baseline.hpp"
#include "nbrs/cli/cli.hpp"
#include "nbrs/cognate/cognate.hpp"
#include "nbrs/decoding/detect.hpp"
#include "nbrs/errors.hpp"
#include "nbrs/evaluation/experiments.hpp"
#include "nbrs/evaluation/stats.hpp"
#include "nbrs/geodata/split.hpp"
#include "nbrs/numerics/kernels.hpp"
#include "nbrs/synth/cognate_synth.hpp"
#include "nbrs/synth/geo_synth.hpp"
#include "nbrs/textdata/escape.hpp"
#include "nbrs/textdata/vocab.hpp"
#include "nbrs/training/train.hpp"

namespace nbrs::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Inputs {
  std::string features, train, test, golden, model, input, aligner_data;
  std::string a, b, a_column = "hypothesis", b_column = "hypothesis";
  std::string table, pred, ref, target, id, forced_output, kind, action;
  std::vector<std::string> specs;
  bool synthetic_specs = false;
  std::size_t index = 0;
  bool index_given = false;
};

struct Run {
  std::string command;
  json cfg;
  fs::path out;
  std::ostream& stdout_;
  std::ostream& stderr_;

  fs::path file(const std::string& name) const { return out / name; }
  std::uint64_t seed() const { return cfg.at("seed").get<std::uint64_t>(); }
  std::size_t get(const char* section, const char* key) const {
    return cfg.at(section).at(key).get<std::size_t>();
  }

  model::ModelConfig model_config() const { return model::config_from_json(cfg.at("model")); }

  training::TrainConfig train_config() const {
    auto tc = training::train_config_from_json(cfg.at("train"));
    tc.seed = seed();
    tc.validate();
    return tc;
  }
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write '" + p.string() + "'");
  return f;
}

void write_run_config(const Run& r, const Inputs& in) {
  json inputs = json::object();
  auto put = [&](const char* k, const std::string& v) {
    if (!v.empty()) inputs[k] = v;
  };
  put("features", in.features);
  put("train", in.train);
  put("test", in.test);
  put("golden", in.golden);
  put("model", in.model);
  put("input", in.input);
  put("aligner_data", in.aligner_data);
  put("a", in.a);
  put("b", in.b);
  put("table", in.table);
  put("pred", in.pred);
  put("ref", in.ref);
  put("target", in.target);
  put("kind", in.kind);
  put("action", in.action);
  if (!in.specs.empty()) inputs["specs"] = in.specs;
  auto f = open_out(r.file("run_config.json"));
  f << json{{"command", r.command}, {"inputs", inputs}, {"config", r.cfg}}.dump(2) << '\n';
}

void report_diagnostics(std::ostream& err, const std::string& source,
                        const std::vector<geo::Diagnostic>& diags) {
  constexpr std::size_t kShown = 20;
  for (std::size_t i = 0; i < std::min(diags.size(), kShown); ++i) {
    err << source << ':' << diags[i].line << ": " << diags[i].message << '\n';
  }
  if (diags.size() > kShown) {
    err << source << ": " << diags.size() - kShown << " more diagnostics\n";
  }
}

std::vector<baseline::Aligner::Pair> target_pairs(std::span<const geo::Neighborhood> data) {
  std::vector<baseline::Aligner::Pair> pairs;
  for (const auto& n : data) {
    if (n.target.has_pron()) pairs.emplace_back(n.target.name, n.target.pron);
  }
  return pairs;
}

// Header-indexed TSV.
struct Tsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& path) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("'" + path + "' has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t from = 0;
  while (true) {
    const auto tab = line.find('\t', from);
    out.push_back(line.substr(from, tab == std::string::npos ? tab : tab - from));
    if (tab == std::string::npos) break;
    from = tab + 1;
  }
  return out;
}

Tsv read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  Tsv t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw DataError("'" + path + "' is empty");
  return t;
}

std::string interval_string(eval::Interval i) {
  return "[" + text::format_double(i.lo, 4) + ", " + text::format_double(i.hi, 4) + "]";
}

json interval_json(eval::Interval i) { return json::array({i.lo, i.hi}); }

const geo::Neighborhood& pick(std::span<const geo::Neighborhood> data, const Inputs& in) {
  if (!in.id.empty()) {
    for (const auto& n : data) {
      if (n.target.id == in.id) return n;
    }
    throw DataError("no neighborhood with id '" + in.id + "' in '" + in.input + "'");
  }
  const std::size_t i = in.index_given ? in.index : 0;
  if (i >= data.size()) {
    throw DataError("index " + std::to_string(i) + " out of range for '" + in.input + "'");
  }
  return data[i];
}

eval::ManipulationSpec parse_spec(const std::string& s) {
  const auto a = s.find(':');
  const auto b = a == std::string::npos ? a : s.find(':', a + 1);
  if (b == std::string::npos || s.find(':', b + 1) != std::string::npos) {
    throw UsageError("manipulation spec must be spelling:P1:P2, got '" + s + "'");
  }
  eval::ManipulationSpec spec{s.substr(0, a), s.substr(a + 1, b - a - 1), s.substr(b + 1)};
  spec.validate();
  return spec;
}

// Commands.

void cmd_synth(Run& r, const Inputs& in) {
  const auto& s = r.cfg.at("synth");
  if (in.kind == "geo") {
    synth::GeoSynthConfig sc;
    sc.areas = s.at("areas").get<std::size_t>();
    sc.p1_share = s.at("p1_share").get<double>();
    sc.unpronounced = s.at("unpronounced").get<double>();
    const auto rule = s.at("rule").get<std::string>();
    if (rule == "per_area") {
      sc.rule = synth::ReadingRule::kPerArea;
    } else if (rule == "by_longitude") {
      sc.rule = synth::ReadingRule::kByLongitude;
    } else {
      throw UsageError("synth.rule must be per_area or by_longitude, got '" + rule + "'");
    }
    sc.seed = r.seed();
    const auto corpus = synth::generate_geo(sc);
    auto f = open_out(r.file("features.jsonl"));
    geo::write_features(f, corpus.features);
    auto l = open_out(r.file("labels.tsv"));
    synth::write_labels_tsv(l, corpus);
    r.stdout_ << "features " << corpus.features.size() << '\n';
  } else {
    synth::CognateSynthConfig cc;
    cc.sets = s.at("sets").get<std::size_t>();
    cc.missing = s.at("missing").get<double>();
    cc.seed = r.seed();
    const auto fam = synth::generate_family(cc);
    auto f = open_out(r.file("family.tsv"));
    cognate::write_table(f, fam.languages, fam.sets);
    auto p = open_out(r.file("protoforms.tsv"));
    p << "id\tproto\n";
    for (std::size_t i = 0; i < fam.sets.size(); ++i) {
      p << fam.sets[i].id << '\t' << text::join_tokens(fam.protoforms[i]) << '\n';
    }
    r.stdout_ << "sets " << fam.sets.size() << '\n';
  }
}

void cmd_build_data(Run& r, const Inputs& in) {
  const auto store = geo::ingest(in.features);
  report_diagnostics(r.stderr_, in.features, store.diagnostics);
  const auto& d = r.cfg.at("data");
  geo::NeighborCaps caps{d.at("max_neighbors").get<std::size_t>(),
                         d.at("max_plain").get<std::size_t>()};
  geo::BuildStats st;
  const auto hoods = geo::build_neighborhoods(store, d.at("radius_km").get<double>(), caps, &st);
  geo::SplitSpec spec;
  spec.mode = geo::split_mode_from_string(d.at("split").get<std::string>());
  spec.test_fraction = d.at("test_fraction").get<double>();
  spec.region_deg = d.at("region_deg").get<double>();
  spec.seed = r.seed();
  const auto sp = geo::split(hoods, spec);
  geo::save_neighborhoods(r.file("neighborhoods.jsonl").string(), hoods);
  geo::save_neighborhoods(r.file("train.jsonl").string(), sp.train);
  geo::save_neighborhoods(r.file("test.jsonl").string(), sp.test);
  auto f = open_out(r.file("build_stats.json"));
  f << json{{"features", store.size()},
            {"diagnostics", store.diagnostics.size()},
            {"targets", st.targets},
            {"skipped_unpronounced", st.skipped_unpronounced},
            {"with_interesting", st.with_interesting},
            {"total_neighbors", st.total_neighbors},
            {"train", sp.train.size()},
            {"test", sp.test.size()}}
           .dump(2)
    << '\n';
  r.stdout_ << "neighborhoods " << hoods.size() << " train " << sp.train.size() << " test "
            << sp.test.size() << '\n';
}

void cmd_train(Run& r, const Inputs& in) {
  const auto data = geo::load_neighborhoods(in.train);
  auto tc = r.train_config();
  training::GoldenSet golden;
  if (!in.golden.empty()) tc.golden_path = in.golden;
  if (!tc.golden_path.empty()) golden = training::load_golden(tc.golden_path);
  const auto t = eval::fit(r.model_config(), data, golden.items, tc, r.out.string());
  const auto& m = t.result.metrics;
  if (!m.empty()) {
    r.stdout_ << "step " << m.back().step << " loss " << text::format_double(m.back().loss)
              << '\n';
  }
  r.stdout_ << "model " << t.result.final_checkpoint << '\n';
}

void cmd_decode(Run& r, const Inputs& in) {
  const auto bundle = training::load_bundle(in.model);
  const auto m = bundle.build();
  const auto data = geo::load_neighborhoods(in.input);
  const auto decoded =
      decoding::decode_neighborhoods(m, bundle.vocabs, data, r.get("decode", "beam"));
  auto f = open_out(r.file("predictions.tsv"));
  f << "id\tname\treference\thypothesis\tgap\n";
  std::vector<std::string> hyps, refs;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& t = data[i].target;
    f << t.id << '\t' << t.name << '\t' << t.pron << '\t' << decoded[i].best << '\t'
      << text::format_double(decoded[i].gap) << '\n';
    if (t.has_pron()) {
      hyps.push_back(decoded[i].best);
      refs.push_back(t.pron);
    }
  }
  r.stdout_ << "decoded " << data.size();
  if (!refs.empty()) {
    r.stdout_ << " error " << text::format_double(training::error_rate(hyps, refs), 4);
  }
  r.stdout_ << '\n';
}

void cmd_detect(Run& r, const Inputs& in) {
  const auto bundle = training::load_bundle(in.model);
  const auto m = bundle.build();
  const auto data = geo::load_neighborhoods(in.input);
  const auto& d = r.cfg.at("detect");
  decoding::DetectOptions o;
  o.beam = d.at("beam").get<std::size_t>();
  o.min_spelling = d.at("min_spelling").get<std::size_t>();
  o.min_pron = d.at("min_pron").get<std::size_t>();
  o.min_gap = d.at("min_gap").get<double>();
  const auto reports = decoding::detect_discrepancies(m, bundle.vocabs, data, o);
  auto csv = open_out(r.file("discrepancies.csv"));
  decoding::write_reports_csv(csv, reports);
  auto html = open_out(r.file("discrepancies.html"));
  decoding::write_reports_html(html, reports);
  r.stdout_ << "flagged " << reports.size() << " of " << data.size() << '\n';
}

void cmd_baseline(Run& r, const Inputs& in) {
  const auto train = geo::load_neighborhoods(in.train);
  const auto test = geo::load_neighborhoods(in.test);
  const auto pairs = target_pairs(train);
  std::vector<geo::Diagnostic> diags;
  const auto al = baseline::Aligner::train(pairs, {}, &diags);
  report_diagnostics(r.stderr_, in.train, diags);
  const auto lex = baseline::build_lexicon(pairs, al);
  const auto preds = baseline::predict(test, lex, al);
  auto f = open_out(r.file("baseline_predictions.tsv"));
  f << "id\tname\treference\tbase\twith_neighbors\n";
  std::vector<std::string> base, nb, refs;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& t = test[i].target;
    f << t.id << '\t' << t.name << '\t' << t.pron << '\t' << preds[i].base << '\t'
      << preds[i].with_neighbors << '\n';
    if (t.has_pron()) {
      base.push_back(preds[i].base);
      nb.push_back(preds[i].with_neighbors);
      refs.push_back(t.pron);
    }
  }
  auto l = open_out(r.file("lexicon.tsv"));
  lex.write_tsv(l);
  if (!refs.empty()) {
    r.stdout_ << "base error " << text::format_double(training::error_rate(base, refs), 4)
              << " with-neighbors error "
              << text::format_double(training::error_rate(nb, refs), 4) << '\n';
  }
}

void cmd_eval(Run& r, const Inputs& in) {
  const auto test = geo::load_neighborhoods(in.test);
  auto column = [&](const std::string& path, const std::string& col) {
    const auto t = read_tsv(path);
    const auto id = t.column("id", path);
    const auto c = t.column(col, path);
    std::map<std::string, std::string> out;
    for (const auto& row : t.rows) out[row[id]] = row[c];
    return out;
  };
  const auto a = column(in.a, in.a_column);
  const auto b = column(in.b, in.b_column);
  std::vector<std::string> ha, hb, refs;
  for (const auto& n : test) {
    if (!n.target.has_pron()) continue;
    const auto ia = a.find(n.target.id);
    const auto ib = b.find(n.target.id);
    if (ia == a.end()) throw DataError("'" + in.a + "' lacks id " + n.target.id);
    if (ib == b.end()) throw DataError("'" + in.b + "' lacks id " + n.target.id);
    ha.push_back(ia->second);
    hb.push_back(ib->second);
    refs.push_back(n.target.pron);
  }
  const auto o = eval::paired_outcomes(ha, hb, refs);
  o.validate();
  const auto& s = r.cfg.at("stats");
  const auto boot = eval::paired_bootstrap(o, s.at("trials").get<std::size_t>(),
                                           s.at("sample").get<std::size_t>(), r.seed());
  const double perm = eval::paired_permutation(o, s.at("perms").get<std::size_t>(), r.seed());
  const std::size_t n = o.a.size();
  const auto ci_a = eval::normal_ci(o.error_a(), n);
  const auto ci_b = eval::normal_ci(o.error_b(), n);
  auto f = open_out(r.file("eval.json"));
  f << json{{"n", n},
            {"a", {{"file", in.a}, {"column", in.a_column}, {"error", o.error_a()},
                   {"ci", interval_json(ci_a)}}},
            {"b", {{"file", in.b}, {"column", in.b_column}, {"error", o.error_b()},
                   {"ci", interval_json(ci_b)}}},
            {"bootstrap", {{"p", boot.p_value}, {"a_is_better", boot.a_is_better},
                           {"ci_a", interval_json(boot.ci_a)},
                           {"ci_b", interval_json(boot.ci_b)}}},
            {"permutation", {{"p", perm}}}}
           .dump(2)
    << '\n';
  r.stdout_ << "a error " << text::format_double(o.error_a(), 4) << ' ' << interval_string(ci_a)
            << "\nb error " << text::format_double(o.error_b(), 4) << ' '
            << interval_string(ci_b) << "\nbootstrap p " << text::format_double(boot.p_value, 4)
            << "\npermutation p " << text::format_double(perm, 4) << '\n';
}

void cmd_manipulate(Run& r, const Inputs& in) {
  const auto bundle = training::load_bundle(in.model);
  const auto m = bundle.build();
  const auto data = geo::load_neighborhoods(in.input);
  const auto aligner_data =
      in.aligner_data.empty() ? data : geo::load_neighborhoods(in.aligner_data);
  std::vector<eval::ManipulationSpec> specs;
  for (const auto& s : in.specs) specs.push_back(parse_spec(s));
  if (in.synthetic_specs) {
    for (const auto& s : synth::ambiguous_spellings()) specs.push_back({s.spelling, s.p1, s.p2});
  }
  if (specs.empty()) throw UsageError("manipulate needs --spec or --synthetic-specs");
  const auto pairs = target_pairs(aligner_data);
  const auto al = baseline::Aligner::train(pairs);
  const auto rows =
      eval::manipulation_experiment(m, bundle.vocabs, data, specs, al, r.get("decode", "beam"));
  auto f = open_out(r.file("manipulation.csv"));
  eval::write_manipulation_csv(f, rows);
  for (const auto& row : rows) {
    if (row.unlocated > 0) {
      r.stderr_ << row.spelling << ' ' << eval::to_string(row.condition) << ": " << row.unlocated
                << " neighbor occurrences not located\n";
    }
  }
  eval::write_manipulation_csv(r.stdout_, rows);
}

void cmd_ablate(Run& r, const Inputs& in) {
  const auto train = geo::load_neighborhoods(in.train);
  const auto test = geo::load_neighborhoods(in.test);
  const auto& a = r.cfg.at("ablation");
  eval::AblationConfig ac;
  ac.neighbor_counts = a.at("neighbors").get<std::vector<std::size_t>>();
  ac.latlong = a.at("latlong").get<std::vector<bool>>();
  ac.beam = a.at("beam").get<std::size_t>();
  ac.base = r.model_config();
  ac.train = r.train_config();
  const auto cells = eval::ablation_sweep(train, test, ac);
  auto f = open_out(r.file("ablation.csv"));
  eval::write_ablation_csv(f, cells);
  eval::write_ablation_csv(r.stdout_, cells);
}

void cmd_attention(Run& r, const Inputs& in) {
  const auto bundle = training::load_bundle(in.model);
  const auto m = bundle.build();
  const auto data = geo::load_neighborhoods(in.input);
  const auto& n = pick(data, in);
  std::optional<std::string> forced;
  if (!in.forced_output.empty()) forced = in.forced_output;
  const auto a = eval::attention_export(m, bundle.vocabs, n, r.get("decode", "beam"), forced);
  auto j = eval::to_json(a);
  j["id"] = n.target.id;
  j["name"] = n.target.name;
  auto f = open_out(r.file("attention.json"));
  f << j.dump(2) << '\n';
  r.stdout_ << "attention " << a.output_tokens.size() << " x " << a.memory_labels.size() << '\n';
}

std::vector<cognate::CognateSet> augmented(const Run& r, std::span<const cognate::CognateSet> sets) {
  const auto& c = r.cfg.at("cognate");
  auto out = cognate::augment_drop(sets, c.at("drop_copies").get<std::size_t>(), r.seed());
  const auto count = c.at("ngram_count").get<std::size_t>();
  if (count > 0) {
    const auto extra =
        cognate::augment_ngram(sets, c.at("ngram_order").get<std::size_t>(), count, r.seed());
    // Both augmenters return the originals first.
    out.insert(out.end(), extra.begin() + static_cast<std::ptrdiff_t>(sets.size()), extra.end());
  }
  return out;
}

void cmd_cognate(Run& r, const Inputs& in) {
  const auto& c = r.cfg.at("cognate");
  if (in.action == "score") {
    const auto preds = read_tsv(in.pred);
    const auto table = cognate::load_table(in.ref);
    std::map<std::string, const cognate::CognateSet*> by_id;
    for (const auto& s : table.sets) by_id[s.id] = &s;
    const auto id = preds.column("id", in.pred);
    const auto lang = preds.column("language", in.pred);
    const auto form = preds.column("form", in.pred);
    std::vector<cognate::Form> p, ref;
    for (const auto& row : preds.rows) {
      const auto it = by_id.find(row[id]);
      const cognate::Form* f = it == by_id.end() ? nullptr : it->second->form(row[lang]);
      p.push_back(text::split_tokens(row[form]));
      ref.push_back(f ? *f : cognate::Form{});
    }
    const auto sc = cognate::score(p, ref);
    if (sc.skipped > 0) r.stderr_ << sc.skipped << " predictions without a reference skipped\n";
    auto f = open_out(r.file("score.json"));
    f << json{{"ned", sc.ned}, {"bcubed", sc.bcubed}, {"bleu", sc.bleu}, {"pairs", sc.pairs},
              {"skipped", sc.skipped}}
             .dump(2)
      << '\n';
    r.stdout_ << "NED " << text::format_double(sc.ned, 4) << " B-cubed "
              << text::format_double(sc.bcubed, 4) << " BLEU " << text::format_double(sc.bleu, 4)
              << '\n';
    return;
  }

  const auto table = cognate::load_table(in.table, in.target);
  report_diagnostics(r.stderr_, in.table, table.diagnostics);
  if (in.action == "augment") {
    const auto sets = augmented(r, table.sets);
    auto f = open_out(r.file("augmented.tsv"));
    cognate::write_table(f, table.languages, sets);
    r.stdout_ << "sets " << sets.size() << '\n';
  } else if (in.action == "train") {
    const auto sets = augmented(r, cognate::expand_targets(table.sets));
    std::vector<geo::Neighborhood> hoods;
    for (const auto& s : sets) hoods.push_back(cognate::to_neighborhood(s));
    const auto mc = model::config_from_json(c.at("model"),
                                            cognate::cognate_model_config(table.languages.size()));
    auto tc = r.train_config();
    tc.steps = c.at("steps").get<std::uint64_t>();
    tc.validate();
    const auto t = eval::fit(mc, hoods, {}, tc, r.out.string());
    r.stdout_ << "examples " << hoods.size() << "\nmodel " << t.result.final_checkpoint << '\n';
  } else {
    const auto bundle = training::load_bundle(in.model);
    const auto m = bundle.build();
    std::vector<std::size_t> which;
    std::vector<geo::Neighborhood> hoods;
    for (std::size_t i = 0; i < table.sets.size(); ++i) {
      const auto& s = table.sets[i];
      if (s.target.empty() || s.form(s.target)) continue;
      which.push_back(i);
      hoods.push_back(cognate::to_neighborhood(s));
    }
    const auto hyps = eval::predict_strings(m, bundle.vocabs, hoods, c.at("beam").get<std::size_t>());
    std::vector<std::string> filled(table.sets.size());
    auto f = open_out(r.file("predictions.tsv"));
    f << "id\tlanguage\tform\n";
    for (std::size_t k = 0; k < which.size(); ++k) {
      const auto& s = table.sets[which[k]];
      filled[which[k]] = hyps[k];
      f << s.id << '\t' << s.target << '\t' << hyps[k] << '\n';
    }
    auto t = open_out(r.file("filled.tsv"));
    cognate::write_table(t, table.languages, table.sets, filled);
    r.stdout_ << "predicted " << which.size() << '\n';
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const EnvLookup& env) {
  CLI::App app{"Reading prediction from geographic neighbors", "nbrs"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "nbrs-out";
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", sets, "Config override key.path=value (repeatable)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--workers", workers, "Worker threads (0: available parallelism)");
  app.add_option("--out", out_dir, "Output directory");

  Inputs in;
  std::optional<std::uint64_t> steps;
  std::optional<std::size_t> batch, beam;
  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  auto* synth_cmd = sub("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("kind", in.kind, "geo or cognate")
      ->required()
      ->check(CLI::IsMember({"geo", "cognate"}));

  auto* build = sub("build-data", "Ingest features, build neighborhoods and split");
  build->add_option("--features", in.features, "Feature JSON lines")->required();

  auto* train = sub("train", "Train a model");
  train->add_option("--train", in.train, "Training neighborhoods")->required();
  train->add_option("--golden", in.golden, "Golden neighborhoods");
  train->add_option("--steps", steps, "Training steps");
  train->add_option("--batch", batch, "Batch size");

  auto* decode = sub("decode", "Decode readings");
  decode->add_option("--model", in.model, "Model bundle")->required();
  decode->add_option("--input", in.input, "Neighborhoods")->required();
  decode->add_option("--beam", beam, "Beam size");

  auto* detect = sub("detect", "Flag reference readings the model disputes");
  detect->add_option("--model", in.model, "Model bundle")->required();
  detect->add_option("--input", in.input, "Neighborhoods")->required();
  detect->add_option("--beam", beam, "Beam size");

  auto* base = sub("baseline", "Alignment and lexicon baseline");
  base->add_option("--train", in.train, "Training neighborhoods")->required();
  base->add_option("--test", in.test, "Test neighborhoods")->required();

  auto* ev = sub("eval", "Compare two prediction files");
  ev->add_option("--test", in.test, "Test neighborhoods")->required();
  ev->add_option("--a", in.a, "Predictions of system A")->required();
  ev->add_option("--b", in.b, "Predictions of system B")->required();
  ev->add_option("--a-column", in.a_column, "Hypothesis column of A");
  ev->add_option("--b-column", in.b_column, "Hypothesis column of B");

  auto* manip = sub("manipulate", "Force neighbor readings and measure decodings");
  manip->add_option("--model", in.model, "Model bundle")->required();
  manip->add_option("--input", in.input, "Neighborhoods")->required();
  manip->add_option("--aligner-data", in.aligner_data, "Neighborhoods for the aligner");
  manip->add_option("--spec", in.specs, "spelling:P1:P2 (repeatable)");
  manip->add_flag("--synthetic-specs", in.synthetic_specs, "Use the synthetic spellings");
  manip->add_option("--beam", beam, "Beam size");

  auto* ablate = sub("ablate", "Neighbor-count and lat-long sweep");
  ablate->add_option("--train", in.train, "Training neighborhoods")->required();
  ablate->add_option("--test", in.test, "Test neighborhoods")->required();
  ablate->add_option("--steps", steps, "Training steps per cell");

  auto* att = sub("attention", "Export cross attention for one neighborhood");
  att->add_option("--model", in.model, "Model bundle")->required();
  att->add_option("--input", in.input, "Neighborhoods")->required();
  att->add_option("--id", in.id, "Target feature id");
  att->add_option("--index", in.index, "Row index when no id is given")->each([&](const std::string&) {
    in.index_given = true;
  });
  att->add_option("--output", in.forced_output, "Teacher-forced output instead of decoding");
  att->add_option("--beam", beam, "Beam size");

  auto* cog = sub("cognate", "Cognate reflex prediction");
  cog->add_option("action", in.action, "train, predict, score or augment")
      ->required()
      ->check(CLI::IsMember({"train", "predict", "score", "augment"}));
  cog->add_option("--table", in.table, "Cognate TSV");
  cog->add_option("--target", in.target, "Target language for rows without '?'");
  cog->add_option("--model", in.model, "Model bundle");
  cog->add_option("--pred", in.pred, "Predictions TSV (score)");
  cog->add_option("--ref", in.ref, "Reference TSV (score)");
  cog->add_option("--steps", steps, "Training steps");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    std::vector<std::string> assignments = sets;
    if (seed) assignments.push_back("seed=" + std::to_string(*seed));
    if (workers) assignments.push_back("workers=" + std::to_string(*workers));
    auto* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    if (steps) {
      assignments.push_back((command == "cognate" ? "cognate.steps=" : "train.steps=") +
                            std::to_string(*steps));
    }
    if (batch) assignments.push_back("train.batch=" + std::to_string(*batch));
    if (beam) {
      assignments.push_back((command == "detect" ? "detect.beam=" : "decode.beam=") +
                            std::to_string(*beam));
    }
    Run r{command, resolve_config(config_path, env, assignments), out_dir, out, err};
    if (command == "cognate") {
      if (in.action == "score" && (in.pred.empty() || in.ref.empty())) {
        throw UsageError("cognate score needs --pred and --ref");
      }
      if (in.action != "score" && in.table.empty()) throw UsageError("cognate " + in.action + " needs --table");
      if (in.action == "predict" && in.model.empty()) throw UsageError("cognate predict needs --model");
    }

    const int w = r.cfg.at("workers").get<int>();
    if (w < 0) throw UsageError("workers must be >= 0");
    const int threads = w == 0 ? omp_get_num_procs() : w;
    omp_set_num_threads(threads);
    num::set_kernel_threads(threads);

    fs::create_directories(r.out);
    write_run_config(r, in);
    if (command == "synth") cmd_synth(r, in);
    else if (command == "build-data") cmd_build_data(r, in);
    else if (command == "train") cmd_train(r, in);
    else if (command == "decode") cmd_decode(r, in);
    else if (command == "detect") cmd_detect(r, in);
    else if (command == "baseline") cmd_baseline(r, in);
    else if (command == "eval") cmd_eval(r, in);
    else if (command == "manipulate") cmd_manipulate(r, in);
    else if (command == "ablate") cmd_ablate(r, in);
    else if (command == "attention") cmd_attention(r, in);
    else cmd_cognate(r, in);
    return kOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const DimensionError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dispatch(args, std::cout, std::cerr, process_env());
}

}  // namespace nbrs::cli
