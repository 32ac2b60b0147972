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


// End-to-end acceptance run. Prints one line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cognate_oracles.hpp"
#include "decoding_oracles.hpp"
#include "gradcheck_suite.hpp"
#include "nbrs/baseline/baseline.hpp"
#include "nbrs/cognate/cognate.hpp"
#include "nbrs/decoding/beam.hpp"
#include "nbrs/decoding/detect.hpp"
#include "nbrs/decoding/roc.hpp"
#include "nbrs/evaluation/experiments.hpp"
#include "nbrs/evaluation/stats.hpp"
#include "nbrs/geodata/spatial.hpp"
#include "nbrs/geodata/split.hpp"
#include "nbrs/numerics/checkpoint.hpp"
#include "nbrs/synth/cognate_synth.hpp"
#include "nbrs/synth/geo_synth.hpp"
#include "nbrs/textdata/vocab.hpp"
#include "stats_oracles.hpp"

namespace fs = std::filesystem;
using namespace nbrs;

namespace {

// Pinned tolerances and thresholds.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 30.0;
constexpr double kMonteCarloTolerance = 0.01;
constexpr double kNeighborErrorMax = 0.05;
constexpr double kBlindAmbiguousErrorMin = 0.35;
constexpr double kNeighborTaskMinutes = 30.0;
constexpr double kForcingGapMin = 0.3;
constexpr double kRegionMarginMin = 0.10;
constexpr double kNoiseRate = 0.10;
constexpr double kAucMin = 0.6;
constexpr double kPrecisionMin = 0.8;
constexpr double kRecallMin = 0.3;
constexpr double kCognateNedMax = 0.15;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------
// Shared neighbor-determined task.

model::ModelConfig task_config(bool neighbors) {
  model::ModelConfig c;
  c.layers = 1;
  c.heads = 4;
  c.emb_size = 32;
  c.hidden = 64;
  c.nneigh = 8;
  c.name_len = 12;
  c.pron_len = 24;
  c.use_neighbors = neighbors;
  return c;
}

training::TrainConfig task_training(std::uint64_t steps) {
  training::TrainConfig t;
  t.steps = steps;
  t.batch = 16;
  t.warmup_steps = 1000;
  t.eval_every = 2000;
  return t;
}

constexpr std::uint64_t kTaskSteps = 20000;
constexpr std::size_t kGoldenSize = 100;

struct Task {
  synth::GeoCorpus corpus;
  geo::Split split;
  std::vector<geo::Neighborhood> golden;
  std::optional<eval::TrainedModel> with;
  fs::path with_dir;
  double train_seconds = 0.0;
};

Task make_task(const fs::path& workdir) {
  Task t;
  t.corpus = synth::generate_geo({});
  const auto hoods = synth::neighborhoods_of(t.corpus);
  geo::SplitSpec s;
  s.mode = geo::SplitMode::kShuffled;
  s.test_fraction = 0.2;
  t.split = geo::split(hoods, s);
  t.golden.assign(t.split.test.begin(),
                  t.split.test.begin() + std::min(kGoldenSize, t.split.test.size()));
  t.with_dir = workdir / "task_with_neighbors";
  fs::create_directories(t.with_dir);
  const auto t0 = std::chrono::steady_clock::now();
  t.with = eval::fit(task_config(true), t.split.train, t.golden, task_training(kTaskSteps),
                     t.with_dir.string());
  t.train_seconds = seconds_since(t0);
  return t;
}

bool is_ambiguous(const synth::GeoCorpus& c, const geo::Neighborhood& n) {
  const auto* l = c.find(n.target.id);
  return l && l->spelling >= 0;
}

struct Errors {
  double all = 0.0;
  double ambiguous = 0.0;
};

Errors errors_of(const synth::GeoCorpus& c, std::span<const geo::Neighborhood> data,
                 std::span<const std::string> hyps) {
  std::size_t wrong = 0, amb = 0, amb_wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool w = hyps[i] != data[i].target.pron;
    wrong += w;
    if (is_ambiguous(c, data[i])) {
      ++amb;
      amb_wrong += w;
    }
  }
  return {double(wrong) / double(data.size()), amb ? double(amb_wrong) / double(amb) : 0.0};
}

// ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  auto cases = testing::layer_grad_checks();
  for (auto& c : testing::model_grad_checks()) cases.push_back(std::move(c));
  const double secs = seconds_since(t0);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : cases) {
    if (!(c.max_relative_error <= worst)) {
      worst = c.max_relative_error;
      worst_name = c.name + "/" + c.worst_parameter;
    }
  }
  const bool ok = std::isfinite(worst) && worst < kGradTolerance && secs < kGradSeconds;
  std::ostringstream d;
  d << cases.size() << " checks, worst relative error " << worst << " (" << worst_name
    << "), " << fmt(secs, 1) << " s";
  return {ok, d.str()};
}

Outcome statistics_goldens() {
  auto round4 = [](double x) { return std::round(x * 1e4) / 1e4; };
  bool ok = true;
  std::ostringstream d;
  const auto a = eval::normal_ci(0.102, 132753), b = eval::normal_ci(0.0862, 132753);
  ok &= round4(a.lo) == 0.1012 && round4(a.hi) == 0.1028;
  ok &= round4(b.lo) == 0.0854 && round4(b.hi) == 0.0870;
  d << "ci [" << fmt(a.lo) << ", " << fmt(a.hi) << "] [" << fmt(b.lo) << ", " << fmt(b.hi)
    << "]";

  num::RngState rng(2024);
  auto outcomes = [&](std::size_t n) {
    eval::PairedOutcomes o;
    for (std::size_t i = 0; i < n; ++i) {
      o.a.push_back(rng.bernoulli(0.6));
      o.b.push_back(rng.bernoulli(0.75));
    }
    return o;
  };
  double worst_perm = 0.0, worst_boot = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto o = outcomes(12);
    o.a[0] = 1;
    o.b[0] = 0;
    const double exact = testing::exhaustive_permutation_p(o);
    worst_perm = std::max(worst_perm,
                          std::abs(eval::paired_permutation(o, 20000, 300 + trial) - exact));
  }
  for (int trial = 0; trial < 6; ++trial) {
    const auto o = outcomes(10);
    const double exact = testing::exhaustive_bootstrap_p(o, 5);
    worst_boot = std::max(worst_boot,
                          std::abs(eval::paired_bootstrap(o, 50000, 5, 400 + trial).p_value - exact));
  }
  ok &= worst_perm <= kMonteCarloTolerance && worst_boot <= kMonteCarloTolerance;
  d << "; permutation max |dp| " << fmt(worst_perm) << ", bootstrap max |dp| "
    << fmt(worst_boot);
  return {ok, d.str()};
}

Outcome baseline_example() {
  baseline::ReadingLexicon base_lex;
  base_lex.add("鹿", "しし");
  base_lex.add("飼", "かい");
  base_lex.add("道", "みち");
  base_lex.add("上", "うえ");
  const auto base = baseline::base_reading("鹿飼道上", base_lex);

  baseline::ReadingLexicon entry;
  entry.add("鹿飼道", "しかがいみち");
  const auto fixed = baseline::substitute(base, entry);

  // The same entry learned from a neighbor through the aligner.
  const std::vector<baseline::Aligner::Pair> pairs{
      {"鹿", "しか"}, {"飼", "がい"}, {"道", "みち"}, {"下", "した"}, {"鹿飼", "しかがい"},
      {"飼道", "がいみち"}, {"道下", "みちした"}, {"鹿飼道下", "しかがいみちした"}};
  const auto al = baseline::Aligner::train(pairs);
  geo::Neighborhood n;
  n.neighbors = {{"n1", "鹿飼道下", "しかがいみちした", 0.4, true}};
  const auto learned = baseline::substitute(base, baseline::neighbor_lexicon(n, al));

  const bool ok = base.reading() == "ししかいみちうえ" &&
                  fixed.reading() == "しかがいみちうえ" &&
                  learned.reading() == "しかがいみちうえ";
  return {ok, "base " + base.reading() + " -> " + fixed.reading() + " (learned entry: " +
                  learned.reading() + ")"};
}

Outcome neighbor_task(Task& t, const fs::path& workdir) {
  const auto hyps = eval::predict_strings(*t.with->model, t.with->vocabs, t.split.test);
  const auto with = errors_of(t.corpus, t.split.test, hyps);

  const auto t0 = std::chrono::steady_clock::now();
  const auto blind_dir = workdir / "task_without_neighbors";
  fs::create_directories(blind_dir);
  const auto blind = eval::fit(task_config(false), t.split.train, t.golden,
                               task_training(kTaskSteps), blind_dir.string());
  const double blind_secs = seconds_since(t0);
  const auto blind_hyps = eval::predict_strings(*blind.model, blind.vocabs, t.split.test);
  const auto without = errors_of(t.corpus, t.split.test, blind_hyps);

  const double minutes = (t.train_seconds + blind_secs) / 60.0;
  const bool ok = with.all <= kNeighborErrorMax && without.ambiguous >= kBlindAmbiguousErrorMin &&
                  minutes < kNeighborTaskMinutes;
  std::ostringstream d;
  d << t.split.train.size() + t.split.test.size() << " neighborhoods, test " << t.split.test.size()
    << "; with neighbors error " << fmt(with.all) << "; without neighbors ambiguous error "
    << fmt(without.ambiguous) << " (all " << fmt(without.all) << "); " << fmt(minutes, 1)
    << " min";
  return {ok, d.str()};
}

std::vector<eval::ManipulationSpec> synthetic_specs() {
  std::vector<eval::ManipulationSpec> out;
  for (const auto& s : synth::ambiguous_spellings()) out.push_back({s.spelling, s.p1, s.p2});
  return out;
}

std::vector<baseline::Aligner::Pair> target_pairs(std::span<const geo::Neighborhood> data) {
  std::vector<baseline::Aligner::Pair> pairs;
  for (const auto& n : data) pairs.emplace_back(n.target.name, n.target.pron);
  return pairs;
}

Outcome manipulation(const Task& t) {
  const auto al = baseline::Aligner::train(target_pairs(t.split.train));
  const auto specs = synthetic_specs();
  const auto rows =
      eval::manipulation_experiment(*t.with->model, t.with->vocabs, t.split.test, specs, al);
  bool ok = true;
  std::size_t tested = 0;
  double min_gap = 1.0;
  std::ostringstream d;
  for (std::size_t i = 0; i + 2 < rows.size(); i += 3) {
    const auto &orig = rows[i], &p1 = rows[i + 1], &p2 = rows[i + 2];
    if (orig.targets == 0) continue;
    ++tested;
    const double gap = p1.proportion - p2.proportion;
    min_gap = std::min(min_gap, gap);
    const bool row_ok = p1.proportion >= orig.proportion && orig.proportion >= p2.proportion &&
                        gap >= kForcingGapMin;
    if (!row_ok) {
      d << orig.spelling << " (" << fmt(p1.proportion, 2) << "/" << fmt(orig.proportion, 2)
        << "/" << fmt(p2.proportion, 2) << ") ";
    }
    ok &= row_ok;
  }
  ok &= tested > 0;
  std::ostringstream out;
  out << tested << " spellings, min force gap " << fmt(min_gap, 3);
  if (!d.str().empty()) out << "; violations: " << d.str();
  return {ok, out.str()};
}

Outcome unshuffled_generalization(const fs::path& workdir) {
  const auto corpus = synth::generate_geo({});
  const auto hoods = synth::neighborhoods_of(corpus);
  geo::SplitSpec s;
  s.mode = geo::SplitMode::kUnshuffled;
  s.test_fraction = 0.5;
  s.region_deg = 0.5;
  const auto split = geo::split(hoods, s);
  std::vector<geo::Neighborhood> golden(
      split.test.begin(), split.test.begin() + std::min(kGoldenSize, split.test.size()));
  double err[2] = {0, 0};
  for (bool nb : {false, true}) {
    const auto dir = workdir / (nb ? "regions_with_neighbors" : "regions_without_neighbors");
    fs::create_directories(dir);
    const auto m = eval::fit(task_config(nb), split.train, golden, task_training(10000),
                             dir.string());
    const auto hyps = eval::predict_strings(*m.model, m.vocabs, split.test);
    err[nb] = errors_of(corpus, split.test, hyps).all;
  }
  const double margin = err[0] - err[1];
  std::ostringstream d;
  d << "train " << split.train.size() << ", held-out regions " << split.test.size()
    << "; error with " << fmt(err[1]) << ", without " << fmt(err[0]) << ", margin "
    << fmt(margin);
  return {margin >= kRegionMarginMin, d.str()};
}

bool roc_matches_oracles() {
  const std::vector<std::pair<std::vector<double>, std::vector<int>>> hand{
      {{0.9, 0.7, 0.7, 0.4, 0.2, 0.2}, {1, 0, 1, 1, 0, 0}},
      {{0.9, 0.8, 0.3, 0.1}, {1, 1, 0, 0}},
      {{0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0}},
      {{1, 2, 3, 4, 5, 6, 7}, {1, 1, 0, 1, 0, 0, 1}},
  };
  for (const auto& [s, l] : hand) {
    const auto r = decoding::roc_pr(s, l);
    const std::set<double> thresholds(s.begin(), s.end());
    if (r.points.size() != thresholds.size() + 1) return false;
    const auto pos = std::size_t(std::count(l.begin(), l.end(), 1));
    const auto neg = l.size() - pos;
    auto it = thresholds.rbegin();
    for (std::size_t i = 1; i < r.points.size(); ++i, ++it) {
      const auto c = testing::brute_counts(s, l, *it);
      const auto& p = r.points[i];
      if (p.threshold != *it || p.tp != c.tp || p.fp != c.fp) return false;
      if (p.tpr != double(c.tp) / double(pos) || p.fpr != double(c.fp) / double(neg)) return false;
    }
    if (std::abs(r.auc - testing::mann_whitney_auc(s, l)) > 1e-12) return false;
  }
  return true;
}

Outcome confidence_filtering(const Task& t) {
  // Swap the reading of randomly chosen ambiguous test targets.
  std::vector<geo::Neighborhood> data = t.split.test;
  std::vector<std::size_t> ambiguous;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (is_ambiguous(t.corpus, data[i])) ambiguous.push_back(i);
  }
  num::RngState rng(77);
  rng.shuffle(ambiguous);
  const auto want = static_cast<std::size_t>(std::llround(kNoiseRate * double(data.size())));
  std::vector<int> labels(data.size(), 0);
  std::size_t injected = 0;
  const auto& spellings = synth::ambiguous_spellings();
  for (std::size_t i : ambiguous) {
    if (injected == want) break;
    const auto* l = t.corpus.find(data[i].target.id);
    const auto& sp = spellings[std::size_t(l->spelling)];
    const std::string& from = l->reading == 1 ? sp.p1 : sp.p2;
    const std::string& to = l->reading == 1 ? sp.p2 : sp.p1;
    auto& pron = data[i].target.pron;
    const auto at = pron.find(from);
    if (at == std::string::npos) continue;
    pron.replace(at, from.size(), to);
    labels[i] = 1;
    ++injected;
  }

  decoding::DetectOptions opts;
  const auto decoded = decoding::decode_neighborhoods(*t.with->model, t.with->vocabs, data,
                                                      opts.beam);
  const auto reports = decoding::filter_discrepancies(data, decoded, opts);
  std::map<std::string, double> gap;
  for (const auto& r : reports) gap[r.feature_id] = std::min(r.gap, 1e6);
  std::vector<double> scores(data.size(), -1.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (auto it = gap.find(data[i].target.id); it != gap.end()) scores[i] = it->second;
  }
  const auto r = decoding::roc_pr(scores, labels);
  const double prec = decoding::best_precision_at_recall(r, kRecallMin);
  const bool oracle_ok = roc_matches_oracles();
  const bool ok = r.auc >= kAucMin && prec >= kPrecisionMin && oracle_ok;
  std::ostringstream d;
  d << injected << " noisy of " << data.size() << ", flagged " << reports.size() << "; AUC "
    << fmt(r.auc) << ", best precision at recall >= " << kRecallMin << ": " << fmt(prec)
    << "; hand-set oracles " << (oracle_ok ? "match" : "differ");
  return {ok, d.str()};
}

Outcome beam_correctness() {
  std::size_t mismatches = 0;
  auto compare = [&](const std::vector<decoding::BeamHypothesis>& beam,
                     const std::vector<decoding::BeamHypothesis>& truth) {
    if (beam.size() != truth.size()) return ++mismatches, void();
    for (std::size_t i = 0; i < beam.size(); ++i) {
      if (beam[i].tokens != truth[i].tokens ||
          std::abs(beam[i].log_likelihood - truth[i].log_likelihood) > 1e-10) {
        ++mismatches;
        return;
      }
    }
  };
  // Two content symbols plus EOS; the other model outputs are banned.
  decoding::BeamOptions o;
  o.beam = 8;
  o.max_len = 3;

  model::ModelConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.emb_size = 8;
  cfg.hidden = 8;
  cfg.nneigh = 2;
  cfg.name_len = 4;
  cfg.pron_len = 4;
  num::RngState rng(8);
  for (std::uint64_t draw = 0; draw < 100; ++draw) {
    model::Model<double> m(cfg, 7, 6, 1000 + draw);
    const auto ex = testing::random_example(rng, cfg, 7, 6, 1 + draw % 2);
    decoding::ModelScorer<double> scorer(m, ex);
    compare(decoding::beam_search(scorer, o), testing::exhaustive_top_k(scorer, {4, 5}, 2, 3, 8));
  }
  decoding::BeamOptions table_opts = o;
  table_opts.banned = {};
  for (int draw = 0; draw < 100; ++draw) {
    testing::TableScorer scorer(3, {0, 1}, 3, rng);
    compare(decoding::beam_search(scorer, table_opts),
            testing::exhaustive_top_k(scorer, {0, 1}, 2, 3, 8));
  }
  return {mismatches == 0, "100 model draws and 100 random tables, " +
                               std::to_string(mismatches) + " mismatches"};
}

Outcome neighborhood_oracle() {
  num::RngState rng(9);
  const std::vector<geo::LatLon> centers{{35.6, 139.7}, {34.7, 135.5}, {43.1, 141.3},
                                         {0.0, 179.95}, {89.95, 10.0}};
  std::size_t mismatches = 0, total_pairs = 0;
  for (int store_no = 0; store_no < 200; ++store_no) {
    geo::FeatureStore s;
    const std::size_t n = 1 + rng.below(1000);
    const double spread = rng.uniform(0.02, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = centers[rng.below(centers.size())];
      geo::FeatureRecord r;
      r.id = std::to_string(i);
      r.name = "x";
      r.pron = "x";
      r.pos = {std::clamp(c.lat + rng.uniform(-spread, spread), -90.0, 90.0),
               c.lon + rng.uniform(-spread, spread)};
      if (r.pos.lon >= 180.0) r.pos.lon -= 360.0;
      s.add(r);
    }
    const auto grid = geo::bucket(s, 10.0);
    const auto brute = geo::bucket_brute_force(s, 10.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::set<std::size_t> a, b;
      for (const auto& c : grid[i]) a.insert(c.index);
      for (const auto& c : brute[i]) b.insert(c.index);
      total_pairs += b.size();
      mismatches += a != b;
    }
  }
  return {mismatches == 0, "200 stores, " + std::to_string(total_pairs) +
                               " neighbor pairs, " + std::to_string(mismatches) +
                               " differing candidate sets"};
}

Outcome cognate_adapter() {
  std::ostringstream d;
  bool ok = true;
  const auto fam = synth::generate_family({});
  const std::vector<cognate::CognateSet> train(fam.sets.begin(), fam.sets.begin() + 240);
  const std::vector<cognate::CognateSet> test(fam.sets.begin() + 240, fam.sets.end());

  // Augmentation counts and determinism.
  const auto expanded = cognate::expand_targets(train);
  const auto drop = cognate::augment_drop(expanded, 3, 7);
  const auto ngram = cognate::augment_ngram(train, 3, 500, 7);
  auto same = [](const std::vector<cognate::CognateSet>& a,
                 const std::vector<cognate::CognateSet>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].forms != b[i].forms || a[i].target != b[i].target) return false;
    }
    return true;
  };
  const bool counts = drop.size() == expanded.size() * 4 && ngram.size() == train.size() + 500;
  const bool determ = same(drop, cognate::augment_drop(expanded, 3, 7)) &&
                      same(ngram, cognate::augment_ngram(train, 3, 500, 7)) &&
                      !same(drop, cognate::augment_drop(expanded, 3, 8)) &&
                      !same(ngram, cognate::augment_ngram(train, 3, 500, 8));
  ok &= counts && determ;

  // Scoring against the recursive edit distance.
  num::RngState rng(11);
  const std::vector<std::string> alphabet{"a", "i", "t", "k", "ʃ"};
  std::size_t score_mismatch = 0;
  for (int trial = 0; trial < 300; ++trial) {
    cognate::Form a, b;
    for (std::size_t i = 0, n = rng.below(8); i < n; ++i) a.push_back(alphabet[rng.below(5)]);
    for (std::size_t i = 0, n = 1 + rng.below(8); i < n; ++i) b.push_back(alphabet[rng.below(5)]);
    const std::size_t dist = testing::oracle_distance(a, b);
    const double ned = double(dist) / double(std::max(a.size(), b.size()));
    score_mismatch += cognate::edit_distance(a, b) != dist;
    const auto r = cognate::score(std::vector<cognate::Form>{a}, std::vector<cognate::Form>{b});
    score_mismatch += std::abs(r.ned - ned) > 1e-12;
  }
  ok &= score_mismatch == 0;

  // Train on expanded, drop-augmented sets; predict one hidden reflex per test set.
  std::vector<geo::Neighborhood> hoods;
  for (const auto& s : drop) hoods.push_back(cognate::to_neighborhood(s));
  num::RngState hide(3);
  std::vector<geo::Neighborhood> held;
  std::vector<cognate::Form> refs;
  for (const auto& s : test) {
    auto c = s;
    const auto k = hide.below(c.forms.size());
    c.target = c.forms[k].first;
    refs.push_back(c.forms[k].second);
    c.forms.erase(c.forms.begin() + std::ptrdiff_t(k));
    held.push_back(cognate::to_neighborhood(c));
  }
  auto cfg = cognate::cognate_model_config(fam.languages.size());
  cfg.emb_size = 64;
  cfg.hidden = 128;
  training::TrainConfig tc;
  tc.steps = 5000;
  tc.batch = 16;
  tc.warmup_steps = 1000;
  tc.eval_every = 1000;
  const auto m = eval::fit(cfg, hoods, {}, tc);
  const auto preds = eval::predict_strings(*m.model, m.vocabs, held);
  std::vector<cognate::Form> pf;
  for (const auto& p : preds) pf.push_back(text::split_tokens(p));
  const auto sc = cognate::score(pf, refs);
  ok &= sc.ned <= kCognateNedMax;

  d << "held-out NED " << fmt(sc.ned) << " BLEU " << fmt(sc.bleu) << " on " << sc.pairs
    << " sets; augment counts " << (counts ? "exact" : "wrong") << ", seeded content "
    << (determ ? "deterministic" : "not deterministic") << "; scoring oracle mismatches "
    << score_mismatch;
  return {ok, d.str()};
}

Outcome determinism(const Task& t, const fs::path& workdir) {
  const auto rerun_dir = workdir / "task_rerun";
  fs::create_directories(rerun_dir);
  eval::fit(task_config(true), t.split.train, t.golden, task_training(kTaskSteps),
            rerun_dir.string());
  const auto metrics_a = read_bytes(t.with_dir / "metrics.csv");
  const auto metrics_b = read_bytes(rerun_dir / "metrics.csv");
  const auto model_a = read_bytes(t.with_dir / "model.nbrs");
  const auto model_b = read_bytes(rerun_dir / "model.nbrs");
  const bool metrics_same = !metrics_a.empty() && metrics_a == metrics_b;
  const bool model_same = !model_a.empty() && model_a == model_b;

  // Load and rewrite the checkpoint.
  std::istringstream in(model_a);
  const auto ck = num::read_checkpoint(in);
  std::ostringstream out;
  num::write_checkpoint(out, ck.header, ck.params);
  const bool round_trip = out.str() == model_a;

  std::ostringstream d;
  d << "metrics.csv " << (metrics_same ? "identical" : "differs") << " (" << metrics_a.size()
    << " bytes), model " << (model_same ? "identical" : "differs") << ", checkpoint round trip "
    << (round_trip ? "identical" : "differs");
  return {metrics_same && model_same && round_trip, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run"};
  std::string workdir = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Directory for training outputs");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const fs::path wd(workdir);
  fs::create_directories(wd);

  auto wanted = [&](int n) {
    return only.empty() || std::find(only.begin(), only.end(), n) != only.end();
  };
  const bool needs_task = wanted(4) || wanted(5) || wanted(7) || wanted(11);
  std::optional<Task> task;
  std::string task_error;
  if (needs_task) {
    try {
      task = make_task(wd);
    } catch (const std::exception& e) {
      task_error = e.what();
    }
  }

  struct Criterion {
    int number;
    const char* name;
    bool uses_task;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient fidelity", false, gradient_fidelity},
      {2, "statistics golden values", false, statistics_goldens},
      {3, "baseline worked example", false, baseline_example},
      {4, "neighbor-determined task", true, [&] { return neighbor_task(*task, wd); }},
      {5, "manipulation causality", true, [&] { return manipulation(*task); }},
      {6, "unshuffled generalization", false, [&] { return unshuffled_generalization(wd); }},
      {7, "confidence filtering", true, [&] { return confidence_filtering(*task); }},
      {8, "beam correctness", false, beam_correctness},
      {9, "neighborhood construction oracle", false, neighborhood_oracle},
      {10, "cognate adapter", false, cognate_adapter},
      {11, "determinism", true, [&] { return determinism(*task, wd); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted(c.number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    if (c.uses_task && !task) {
      o = {false, "shared training run failed: " + task_error};
    } else {
      try {
        o = c.run();
      } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
      }
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.number << ' ' << c.name << ": "
              << o.detail << " [" << fmt(seconds_since(t0), 1) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
