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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "nbrs/cli/cli.hpp"
#include "nbrs/errors.hpp"

using namespace nbrs;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

cli::EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

Result run(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
  args.insert(args.begin(), "nbrs");
  std::ostringstream out, err;
  Result r;
  r.code = cli::dispatch(args, out, err, env_of(std::move(env)));
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nbrs_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::vector<std::string> kSmallModel = {
    "--set", "model.layers=1",     "--set", "model.heads=2",   "--set", "model.emb_size=16",
    "--set", "model.hidden=32",    "--set", "model.nneigh=8",  "--set", "model.name_len=12",
    "--set", "model.pron_len=24",  "--set", "train.batch=8",   "--set", "train.eval_every=100",
    "--set", "train.warmup_steps=50"};

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"--help"}).code == cli::kOk);
  CHECK(run({"train", "--help"}).code == cli::kOk);
  CHECK(run({"train", "--bogus"}).code == cli::kUsage);
  CHECK(run({}).code == cli::kUsage);
  const auto dir = scratch("codes");
  const auto missing = (dir / "absent.jsonl").string();
  const auto r = run({"build-data", "--features", missing, "--out", (dir / "o").string()});
  CHECK(r.code == cli::kData);
  CHECK(r.err.find(missing) != std::string::npos);
  CHECK(run({"decode", "--model", "m", "--input", "i", "--set", "nope.x=1"}).code == cli::kUsage);
  CHECK(run({"decode", "--model", "m", "--input", "i", "--set", "decode.beam=x"}).code ==
        cli::kUsage);
}

TEST_CASE("config precedence: defaults, file, environment, flags") {
  const auto dir = scratch("precedence");
  const auto file = (dir / "c.json").string();
  std::ofstream(file) << R"({"seed": 5, "train": {"steps": 10, "batch": 4}, "decode": {"beam": 3}})";

  auto cfg = cli::resolve_config(file, env_of({}), {});
  CHECK(cfg["seed"] == 5);
  CHECK(cfg["train"]["steps"] == 10);
  CHECK(cfg["train"]["batch"] == 4);
  CHECK(cfg["model"]["layers"] == 4);

  cfg = cli::resolve_config(file, env_of({{"NBRS_TRAIN_STEPS", "20"}, {"NBRS_SEED", "6"}}),
                            {"train.steps=30"});
  CHECK(cfg["train"]["steps"] == 30);
  CHECK(cfg["seed"] == 6);
  CHECK(cfg["decode"]["beam"] == 3);

  CHECK_THROWS_AS(cli::resolve_config(file, env_of({}), {"train.stepz=1"}), UsageError);
  CHECK_THROWS_AS(cli::resolve_config(file, env_of({}), {"train.steps=0.5"}), UsageError);
  CHECK_THROWS_AS(cli::resolve_config(file, env_of({}), {"train.steps"}), UsageError);
  cfg = cli::resolve_config("", env_of({}), {"model.dropout=0", "data.split=unshuffled"});
  CHECK(cfg["model"]["dropout"] == 0.0);
  CHECK(cfg["data"]["split"] == "unshuffled");
  CHECK_THROWS_AS(cli::resolve_config((dir / "absent.json").string(), env_of({}), {}), DataError);
}

TEST_CASE("pipeline smoke: synth, build-data, train, decode, detect, baseline, eval") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = scratch("pipeline");
  const auto s = (dir / "synth").string(), d = (dir / "data").string(), m = (dir / "model").string();

  auto r = run({"synth", "geo", "--set", "synth.areas=8", "--seed", "3", "--out", s});
  REQUIRE(r.code == 0);
  const auto features = s + "/features.jsonl";
  std::size_t lines = 0;
  {
    std::ifstream in(features);
    for (std::string l; std::getline(in, l);) ++lines;
  }
  CHECK(lines >= 40);
  CHECK(lines <= 60);

  r = run({"build-data", "--features", features, "--out", d});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(d + "/train.jsonl"));
  CHECK(fs::exists(d + "/test.jsonl"));
  CHECK(fs::exists(d + "/run_config.json"));
  const auto first = slurp(d + "/neighborhoods.jsonl");
  REQUIRE(run({"build-data", "--features", features, "--out", d}).code == 0);
  CHECK(slurp(d + "/neighborhoods.jsonl") == first);

  auto args = kSmallModel;
  args.insert(args.begin(), {"train", "--train", d + "/train.jsonl", "--steps", "200", "--out", m});
  r = run(args);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(m + "/model.nbrs"));
  CHECK(fs::exists(m + "/metrics.csv"));

  const auto dec = (dir / "decode").string();
  r = run({"decode", "--model", m + "/model.nbrs", "--input", d + "/test.jsonl", "--beam", "2",
           "--out", dec});
  REQUIRE(r.code == 0);
  CHECK(slurp(dec + "/predictions.tsv").rfind("id\tname\treference\thypothesis\tgap\n", 0) == 0);

  const auto det = (dir / "detect").string();
  r = run({"detect", "--model", m + "/model.nbrs", "--input", d + "/neighborhoods.jsonl",
           "--beam", "4", "--out", det});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(det + "/discrepancies.csv"));
  CHECK(fs::exists(det + "/discrepancies.html"));
  CHECK(r.out.find("flagged") != std::string::npos);

  const auto bl = (dir / "baseline").string();
  r = run({"baseline", "--train", d + "/train.jsonl", "--test", d + "/test.jsonl", "--out", bl});
  REQUIRE(r.code == 0);

  const auto ev = (dir / "eval").string();
  r = run({"eval", "--test", d + "/test.jsonl", "--a", dec + "/predictions.tsv", "--b",
           bl + "/baseline_predictions.tsv", "--b-column", "with_neighbors", "--set",
           "stats.trials=200", "--set", "stats.perms=200", "--out", ev});
  REQUIRE(r.code == 0);
  CHECK(slurp(ev + "/eval.json").find("\"permutation\"") != std::string::npos);

  const auto att = (dir / "attention").string();
  r = run({"attention", "--model", m + "/model.nbrs", "--input", d + "/test.jsonl", "--index",
           "0", "--out", att});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(att + "/attention.json"));

  const auto man = (dir / "manipulate").string();
  r = run({"manipulate", "--model", m + "/model.nbrs", "--input", d + "/neighborhoods.jsonl",
           "--synthetic-specs", "--out", man});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(man + "/manipulation.csv"));
  CHECK(run({"manipulate", "--model", m + "/model.nbrs", "--input", d + "/test.jsonl",
             "--spec", "神戸:こうべ", "--out", man})
            .code == cli::kUsage);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 300.0);
}

TEST_CASE("identical resolved configs give identical outputs") {
  const auto dir = scratch("repeat");
  const auto s = (dir / "s").string();
  REQUIRE(run({"synth", "geo", "--set", "synth.areas=4", "--out", s}).code == 0);
  auto train = [&](const std::string& out) {
    auto args = kSmallModel;
    args.insert(args.begin(), {"train", "--train", "", "--steps", "30", "--out", out});
    return args;
  };
  REQUIRE(run({"build-data", "--features", s + "/features.jsonl", "--out", s}).code == 0);
  auto a = train((dir / "a").string());
  auto b = train((dir / "b").string());
  a[2] = b[2] = s + "/neighborhoods.jsonl";
  REQUIRE(run(a, {{"NBRS_WORKERS", "1"}}).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(dir / "a" / "model.nbrs") == slurp(dir / "b" / "model.nbrs"));
  CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));
}

TEST_CASE("cognate subcommands") {
  const auto dir = scratch("cognate");
  const auto s = (dir / "s").string(), m = (dir / "m").string(), p = (dir / "p").string();
  REQUIRE(run({"synth", "cognate", "--set", "synth.sets=20", "--out", s}).code == 0);
  const auto table = s + "/family.tsv";

  auto r = run({"cognate", "augment", "--table", table, "--set", "cognate.drop_copies=2", "--set",
                "cognate.ngram_count=5", "--out", (dir / "aug").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out == "sets 65\n");

  r = run({"cognate", "train", "--table", table, "--steps", "20", "--set",
           "cognate.model={\"emb_size\": 16, \"hidden\": 32, \"layers\": 1}", "--set",
           "train.batch=4", "--set", "train.warmup_steps=10", "--out", m});
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(m + "/model.nbrs"));

  // Hide L1 in every row, predict it, score against the full table.
  std::ifstream in(table);
  std::ofstream hidden(dir / "hidden.tsv");
  std::string line;
  std::getline(in, line);
  hidden << line << '\n';
  while (std::getline(in, line)) {
    const auto a = line.find('\t');
    const auto b = line.find('\t', a + 1);
    hidden << line.substr(0, a) << "\t?" << line.substr(b) << '\n';
  }
  hidden.close();
  r = run({"cognate", "predict", "--table", (dir / "hidden.tsv").string(), "--model",
           m + "/model.nbrs", "--set", "cognate.beam=2", "--out", p});
  REQUIRE(r.code == 0);
  r = run({"cognate", "score", "--pred", p + "/predictions.tsv", "--ref", table, "--out", p});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("NED ", 0) == 0);
  CHECK(run({"cognate", "score", "--pred", p + "/predictions.tsv"}).code == cli::kUsage);
}
