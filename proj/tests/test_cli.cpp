// Copyright 2026 The illumkit Authors
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

#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "illumkit/common/binary_io.hpp"
#include "illumkit/io/manifest.hpp"
#include "run_config.hpp"
#include "test_support.hpp"

using namespace illumkit;
using namespace illumkit::cli;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

// Runs the CLI in-process with stdout and stderr captured.
struct Run {
  int code = -1;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "illumkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  Run r;
  r.code = dispatch(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("schema flags and defaults") {
    RunConfig cfg(train_schema());
    CHECK(cfg.get("batch_size") == "16");
    CHECK(cfg.get("patch_size") == "32");
    CHECK_FALSE(cfg.value("batch_size").has_value());
    const auto t = train_config(cfg);
    CHECK(t.batch_size == 16);
    CHECK(t.max_steps == 2000);
    CHECK(t.arch.input_size == 32);
    for (const auto& k : cfg.schema()) CHECK(k.flag().find('_') == std::string::npos);
    CHECK(Key{"train", "max_steps", "", ""}.flag() == "--max-steps");
    CHECK_THROWS_AS(cfg.set("nonsense", "1"), ConfigError);
  }

  TEST_CASE("INI values, flag precedence and validation") {
    test::TempDir dir("ini");
    write_text(dir.path() / "t.ini",
               "[train]\nbatch_size = 8\nmax_steps = 10\n[sampler]\npatch_size = 16\nd_schedule = 2, 4\n"
               "[arch]\nbackbone = 4,8\nrefinement = yes\n");
    RunConfig cfg(train_schema());
    cfg.load_ini(dir.path() / "t.ini");
    cfg.set("max_steps", "20");
    const auto t = train_config(cfg);
    CHECK(t.batch_size == 8);
    CHECK(t.max_steps == 20);
    CHECK(t.sampler.patch_size == 16);
    CHECK(t.arch.input_size == 16);
    CHECK(t.sampler.d_schedule == std::vector<double>{2, 4});
    CHECK(t.arch.backbone == std::vector<std::size_t>{4, 8});
    CHECK(t.arch.refinement);

    write_text(dir.path() / "unknown.ini", "[train]\nbatchsize = 8\n");
    RunConfig bad(train_schema());
    CHECK_THROWS_AS(bad.load_ini(dir.path() / "unknown.ini"), ConfigError);
    write_text(dir.path() / "section.ini", "[synth]\nwidth = 8\n");
    CHECK_THROWS_AS(bad.load_ini(dir.path() / "section.ini"), ConfigError);
    write_text(dir.path() / "loose.ini", "batch_size = 8\n");
    CHECK_THROWS_AS(bad.load_ini(dir.path() / "loose.ini"), ConfigError);

    RunConfig typed(train_schema());
    typed.set("batch_size", "many");
    CHECK_THROWS_AS(train_config(typed), ConfigError);
    typed = RunConfig(train_schema());
    typed.set("refinement", "perhaps");
    CHECK_THROWS_AS(train_config(typed), ConfigError);
    typed = RunConfig(train_schema());
    typed.set("profile", "huge");
    CHECK_THROWS_AS(train_config(typed), ConfigError);
    typed = RunConfig(train_schema());
    typed.set("profile", "paper");
    typed.set("patch_size", "224");
    CHECK(train_config(typed).batch_size == 23);

    RunConfig s(synth_schema());
    s.set("width", "40");
    s.set("chart", "true");
    const auto spec = synth_spec(s);
    CHECK(spec.width == 40);
    CHECK(spec.chart);
  }

  TEST_CASE("help and usage errors") {
    const auto help = run({"train", "--help"});
    CHECK(help.code == 0);
    for (const auto& k : train_schema()) CHECK(help.out.find(k.flag()) != std::string::npos);
    for (const char* f : {"--config", "--stage", "--resume", "--out"}) CHECK(help.out.find(f) != std::string::npos);
    for (const char* sub : {"synth", "sample", "eval", "infer", "ablate"}) CHECK(run({sub, "--help"}).code == 0);
    CHECK(run({}).code == 1);
    CHECK(run({"explode"}).code == 1);
    CHECK(run({"train", "--batch-size"}).code == 1);
    CHECK(run({"synth", "--n", "2"}).code == 1);
  }

  TEST_CASE("exit codes map error kinds") {
    test::TempDir dir("codes");
    const auto d = dir.path().string();
    write_text(dir.path() / "bad.ini", "[train]\nno_such_key = 1\n");
    const auto bad = run({"train", "--config", d + "/bad.ini", "--manifest", d + "/m.csv", "--out", d});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("no_such_key") != std::string::npos);
    CHECK(run({"train", "--manifest", d + "/missing.csv", "--out", d}).code == 2);
    CHECK(run({"eval", "--method", "gray_world", "--manifest", d + "/missing.csv", "--out", d}).code == 2);
    CHECK(run({"eval", "--method", "gamut", "--manifest", d + "/missing.csv"}).code == 1);
    CHECK(run({"infer", "--checkpoint", d + "/none.ckpt", "--image", d + "/none.pfm"}).code == 2);
  }

  TEST_CASE("synth, sample, train, eval and infer in process") {
    test::TempDir dir("flow");
    const auto d = dir.path().string();
    write_text(dir.path() / "s.ini", "[synth]\nwidth = 40\nheight = 40\nnum_regions = 40\nnoise_std = 0.01\nseed = 3\n");
    REQUIRE(run({"synth", "--spec", d + "/s.ini", "--n", "12", "--out", d + "/data"}).code == 0);
    const auto manifest = d + "/data/manifest.csv";
    CHECK(io::load_manifest(manifest).records.size() == 12);

    REQUIRE(run({"sample", "--manifest", manifest, "--patch-size", "8", "--num-patches", "3", "--out", d + "/p"}).code == 0);
    CHECK(std::filesystem::file_size(d + "/p/patches.csv") > 0);

    const std::vector<std::string> tiny{"--manifest", manifest, "--patch-size", "8",  "--num-patches",
                                        "3",          "--backbone", "3,4", "--head", "5,3",
                                        "--max-steps", "3",        "--batch-size", "4", "--refinement", "true"};
    auto train_args = std::vector<std::string>{"train", "--out", d + "/runs"};
    train_args.insert(train_args.end(), tiny.begin(), tiny.end());
    REQUIRE(run(train_args).code == 0);
    for (const char* s : {"1a", "1b", "2", "3", "4"}) {
      CHECK(std::filesystem::exists(d + "/runs/stage_" + std::string(s) + ".ckpt"));
      CHECK(std::filesystem::exists(d + "/runs/loss_" + std::string(s) + ".csv"));
    }
    CHECK(std::filesystem::exists(d + "/runs/folds.csv"));

    // A single stage resumes from its predecessor and matches the full run.
    auto stage4 = std::vector<std::string>{"train", "--stage", "4", "--resume", d + "/runs/stage_3.ckpt",
                                           "--out", d + "/again"};
    stage4.insert(stage4.end(), tiny.begin(), tiny.end());
    REQUIRE(run(stage4).code == 0);
    CHECK(read_file_bytes(d + "/again/stage_4.ckpt") == read_file_bytes(d + "/runs/stage_4.ckpt"));
    auto wrong = stage4;
    wrong[4] = d + "/runs/stage_2.ckpt";
    CHECK(run(wrong).code == 1);

    auto eval_args = std::vector<std::string>{"eval", "--checkpoint", d + "/runs/stage_4.ckpt", "--out", d + "/eval"};
    eval_args.insert(eval_args.end(), tiny.begin(), tiny.end());
    const auto ev = run(eval_args);
    REQUIRE(ev.code == 0);
    CHECK(ev.out.find("method,mean,med,tri,best25,worst25,pct95") != std::string::npos);
    std::ifstream errors(d + "/eval/errors.csv");
    std::string header;
    std::getline(errors, header);
    CHECK(header == "image_id,fold,error_deg");

    const auto base = run({"eval", "--method", "gray_world", "--manifest", manifest, "--holdout-fold", "none",
                           "--out", d + "/base"});
    REQUIRE(base.code == 0);
    CHECK(base.out.find("gray_world") != std::string::npos);

    const auto inf = run({"infer", "--checkpoint", d + "/runs/stage_4.ckpt", "--image", d + "/data/scene_0000.pfm",
                          "--patch-size", "8", "--out", d + "/corrected.ppm"});
    REQUIRE(inf.code == 0);
    std::istringstream in(inf.out);
    double r = 0, g = 0, b = 0;
    in >> r >> g >> b;
    CHECK(std::hypot(r, g, b) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(read_file_bytes(d + "/corrected.ppm").size() > 40 * 40 * 3);
  }
}
