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

// Acceptance checks: one PASS/FAIL line per criterion, tolerances pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "illumkit/baselines/baselines.hpp"
#include "illumkit/common/binary_io.hpp"
#include "illumkit/common/random.hpp"
#include "illumkit/evaluation/evaluation.hpp"
#include "illumkit/io/patch_export.hpp"
#include "illumkit/io/synthetic.hpp"
#include "illumkit/training/training.hpp"
#include "oracles.hpp"
#include "pipeline_check.hpp"

namespace fs = std::filesystem;
using namespace illumkit;
using Clock = std::chrono::steady_clock;

namespace {

// Criterion 1
constexpr std::uint64_t kGradSeeds = 100;
constexpr double kGradTol = 1e-6;
constexpr double kGradSeconds = 60.0;
// Criterion 2
constexpr double kRoundTripTol = 1e-6;
constexpr double kNeutralTol = 1e-12;
// Criterion 3
constexpr int kAnglePairs = 1000;
constexpr double kAngleScaleTol = 1e-9;
constexpr double kAngleExactTol = 1e-12;
// Criterion 4
constexpr int kSamplingImages = 50;
// Criterion 6
constexpr std::size_t kScenes = 60;
constexpr double kNoise = 0.01;
constexpr double kMaxFinalError = 3.0;
constexpr double kMinUntrainedRatio = 5.0;
constexpr double kRefineSlack = 0.5;
constexpr double kLearningSeconds = 600.0;
// Criterion 7
constexpr double kAblationSlack = 0.3;
// Criterion 9
constexpr double kGrayWorldTol = 1e-4;
constexpr double kBaselineScaleTol = 1e-9;
// Criterion 10
constexpr double kTotalSeconds = 900.0;

int g_failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool bits_equal(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

// Runs `fn`, reporting an exception as a failed criterion.
void guarded(int id, const std::string& title, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, title, std::string("threw: ") + e.what());
  }
}

void gradient_suite() {
  const auto t0 = Clock::now();
  const auto layers = test::layer_kinds_check(kGradSeeds);
  double pipeline = 0.0;
  std::string worst;
  for (std::uint64_t seed = 0; seed < kGradSeeds; ++seed) {
    const auto r = test::pipeline_grad_check(test::tiny_arch(nets::Variant::contextual), seed);
    if (r.max_relative_error >= pipeline) {
      pipeline = r.max_relative_error;
      worst = r.worst;
    }
  }
  const double secs = seconds_since(t0);
  report(1, layers.max_relative_error < kGradTol && pipeline < kGradTol && secs < kGradSeconds, "gradient suite",
         fmt("%llu seeds; layer kinds worst rel. err %.2e, contextual+refinement worst %.2e (tol %.0e); %.1f s "
             "(limit %.0f s)",
             static_cast<unsigned long long>(kGradSeeds), layers.max_relative_error, pipeline, kGradTol, secs,
             kGradSeconds));
}

void transform_oracle() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto canonical = test::random_image(16 + rng() % 17, 16 + rng() % 17, rng);
    const auto e = color::normalize_illuminant({u(rng), u(rng), u(rng)});
    const auto back = color::diagonal_correct(e, color::render_under_illuminant(canonical, e));
    for (std::size_t i = 0; i < back.pixels().size(); ++i) {
      worst = std::max(worst, std::abs(double(back.pixels()[i]) - double(canonical.pixels()[i])));
    }
  }
  const auto img = test::random_image(32, 32, rng);
  const auto same = color::diagonal_correct(color::neutral_illuminant(), img);
  double neutral = 0.0;
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    neutral = std::max(neutral, std::abs(double(same.pixels()[i]) - double(img.pixels()[i])));
  }
  report(2, worst < kRoundTripTol && neutral <= kNeutralTol, "transform oracle",
         fmt("100 pairs, worst round-trip diff %.2e (tol %.0e); neutral identity diff %.2e (tol %.0e)", worst,
             kRoundTripTol, neutral, kNeutralTol));
}

void angular_properties() {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(1e-3, 1.0), scale(1e-3, 1e3);
  double scale_dev = 0.0, identity = 0.0, ortho = 0.0, asym = 0.0;
  bool bounded = true;
  for (int t = 0; t < kAnglePairs; ++t) {
    const color::Rgb a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const double s = scale(rng);
    const double ab = color::angular_error(a, b);
    scale_dev = std::max(scale_dev, std::abs(color::angular_error({a[0] * s, a[1] * s, a[2] * s}, b) - ab));
    identity = std::max(identity, color::angular_error(a, a));
    asym = std::max(asym, std::abs(ab - color::angular_error(b, a)));
    bounded = bounded && ab >= 0.0 && ab <= 180.0;
    // A vector orthogonal to a: a x b.
    const color::Rgb c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    if (std::hypot(c[0], c[1], c[2]) > 1e-6) ortho = std::max(ortho, std::abs(color::angular_error(a, c) - 90.0));
  }
  report(3,
         scale_dev < kAngleScaleTol && identity == 0.0 && ortho < kAngleExactTol && asym == 0.0 && bounded,
         "angular-error properties",
         fmt("%d pairs; scale dev %.2e deg (tol %.0e), identity max %.1e, orthogonal dev %.2e, symmetry dev %.1e",
             kAnglePairs, scale_dev, kAngleScaleTol, identity, ortho, asym));
}

void sampling_oracle() {
  std::mt19937_64 rng(33);
  std::size_t mismatches = 0, selections = 0;
  for (int t = 0; t < kSamplingImages; ++t) {
    auto img = test::random_image(8 + rng() % 40, 8 + rng() % 40, rng);
    if (t % 2) {
      std::vector<std::uint8_t> mask(img.pixel_count());
      std::bernoulli_distribution coin(0.2);
      for (auto& m : mask) m = coin(rng);
      img.set_mask(mask);
    }
    for (double d : {1.0, 3.5, 5.0, 10.0, 25.0}) {
      auto r = sampling::rank_projections(img);
      sampling::select_bright_dark(r, d);
      const auto [bright, dark] = test::brute_force_sets(img, d);
      mismatches += (r.bright != bright) + (r.dark != dark);
      ++selections;
    }
  }
  io::SyntheticSceneSpec spec;
  spec.chart = true;
  spec.seed = 33;
  sampling::SamplerConfig cfg;
  std::size_t windows = 0, bad = 0;
  std::vector<io::ExportedPatch> exported;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto image = io::generate_scene(spec, i).image;
    for (auto mode : {sampling::SamplingMode::bright_dark, sampling::SamplingMode::random}) {
      cfg.mode = mode;
      cfg.seed = mix_seed(5, i);
      for (const auto& p : sampling::sample_patch_pairs(image, cfg).pairs) {
        ++windows;
        bad += !test::window_ok(image, p, cfg.patch_size);
        exported.push_back({i, p});
      }
    }
  }
  // Re-sample from scratch and compare the exported files byte for byte.
  std::vector<io::ExportedPatch> again;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto image = io::generate_scene(spec, i).image;
    for (auto mode : {sampling::SamplingMode::bright_dark, sampling::SamplingMode::random}) {
      cfg.mode = mode;
      cfg.seed = mix_seed(5, i);
      for (const auto& p : sampling::sample_patch_pairs(image, cfg).pairs) again.push_back({i, p});
    }
  }
  const auto dir = fs::temp_directory_path() / "illumkit_acceptance_patches";
  fs::remove_all(dir);
  io::write_patches(dir / "a.illk", dir / "a.csv", exported, cfg.patch_size);
  io::write_patches(dir / "b.illk", dir / "b.csv", again, cfg.patch_size);
  const bool identical = read_file_bytes(dir / "a.illk") == read_file_bytes(dir / "b.illk") &&
                         read_file_bytes(dir / "a.csv") == read_file_bytes(dir / "b.csv");
  fs::remove_all(dir);
  report(4, mismatches == 0 && bad == 0 && identical, "sampling oracle",
         fmt("%d images, %zu selections, %zu brute-force mismatches; %zu windows, %zu invariant violations; "
             "re-sampled patch files %s",
             kSamplingImages, selections, mismatches, windows, bad, identical ? "byte-identical" : "differ"));
}

// Shared synthetic setup for criteria 5 to 7.
struct Desk {
  std::vector<color::LinearImage> images;
  std::vector<color::Rgb> gts;
  std::vector<std::size_t> train, test;

  Desk() {
    io::SyntheticSceneSpec spec;
    spec.noise_std = kNoise;
    spec.seed = 7;
    for (std::size_t i = 0; i < kScenes; ++i) {
      auto s = io::generate_scene(spec, i);
      images.push_back(std::move(s.image));
      gts.push_back(s.e.rgb);
    }
    std::vector<std::size_t> ids(kScenes);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    const auto split = evaluation::make_folds(ids, 3, 1);
    test = split.folds[0];
    for (std::size_t f = 1; f < 3; ++f) train.insert(train.end(), split.folds[f].begin(), split.folds[f].end());
  }

  double held_out_mean(const nets::Model<float>& model, const sampling::SamplerConfig& sampler,
                       nets::Output output) const {
    std::vector<double> errors;
    for (std::size_t i : test) {
      auto s = sampler;
      s.seed = mix_seed(99, i);
      const auto g = evaluation::infer_global(model, images[i], s, output);
      errors.push_back(color::angular_error(g.e.rgb, gts[i]));
    }
    return evaluation::compute_metrics(errors).mean;
  }

  double held_out_mean(const nn::Checkpoint& ckpt, const sampling::SamplerConfig& sampler) const {
    return held_out_mean(nets::model_from_checkpoint<float>(ckpt), sampler, nets::output_for_stage(ckpt.stage_id));
  }

  struct Run {
    std::vector<std::pair<std::string, nn::Checkpoint>> stages;
    std::size_t frozen_checked = 0, frozen_changed = 0;
    std::size_t roundtrip_failures = 0;
    double seconds = 0.0;

    const nn::Checkpoint& at(const std::string& id) const {
      for (const auto& [s, c] : stages) {
        if (s == id) return c;
      }
      throw ConfigError("no stage " + id);
    }
  };

  // Trains the full stage sequence, checking freezing and checkpoint round trips along the way.
  Run train_pipeline(const training::TrainConfig& cfg) const {
    const auto t0 = Clock::now();
    const auto data = training::make_samples(images, gts, cfg.sampler, train);
    Run run;
    const nn::Checkpoint* prev = nullptr;
    nn::Checkpoint start;
    const auto tmp = fs::temp_directory_path() / "illumkit_acceptance_ckpt.bin";
    for (const auto& id : training::stage_sequence(cfg.arch)) {
      const auto plan = training::plan_for(id, cfg.arch);
      auto model = training::init_stage(plan, cfg.arch, prev, cfg.seed);
      const nn::Checkpoint before = prev ? *prev : model.to_checkpoint(id, 0);
      auto result = training::train_stage(model, plan, data, cfg);
      if (result.aborted) throw NumericError(result.message);
      const auto& after = result.checkpoint;
      for (const auto& e : after.entries) {
        if (plan.is_trainable(e.name)) continue;
        const auto* b = before.find(e.name);
        ++run.frozen_checked;
        if (!b || !bits_equal(b->value, e.value) || !bits_equal(b->momentum, e.momentum)) ++run.frozen_changed;
      }
      const auto bytes = nn::serialize_checkpoint(after);
      const auto back = nn::deserialize_checkpoint(bytes);
      nn::save_checkpoint(after, tmp);
      if (!(back == after) || nn::serialize_checkpoint(back) != bytes || read_file_bytes(tmp) != bytes ||
          !(nn::load_checkpoint(tmp) == after)) {
        ++run.roundtrip_failures;
      }
      run.stages.emplace_back(id, std::move(result.checkpoint));
      prev = &run.stages.back().second;
    }
    fs::remove(tmp);
    run.seconds = seconds_since(t0);
    return run;
  }
};

}  // namespace

int main() {
  const auto start = Clock::now();
  guarded(1, "gradient suite", gradient_suite);
  guarded(2, "transform oracle", transform_oracle);
  guarded(3, "angular-error properties", angular_properties);
  guarded(4, "sampling oracle", sampling_oracle);

  const Desk desk;
  const auto cfg = training::TrainConfig::desk_profile();
  Desk::Run main_run;
  bool main_ok = false;
  guarded(5, "stage-wise integrity", [&] {
    main_run = desk.train_pipeline(cfg);
    main_ok = true;
    report(5, main_run.frozen_changed == 0 && main_run.roundtrip_failures == 0, "stage-wise integrity",
           fmt("desk profile (S=%zu, %zu steps/stage, batch %zu), %zu stages; %zu frozen entries checked, %zu changed; "
               "%zu checkpoint round-trip failures",
               cfg.sampler.patch_size, cfg.max_steps, cfg.batch_size, main_run.stages.size(),
               main_run.frozen_checked, main_run.frozen_changed, main_run.roundtrip_failures));
  });
  if (!main_ok) report(6, false, "learning signal", "main training run failed");

  double stage2 = 0.0;
  if (main_ok) {
    guarded(6, "learning signal", [&] {
      const auto untrained = desk.held_out_mean(nets::build_net<float>(cfg.arch, cfg.seed), cfg.sampler,
                                                nets::Output::final);
      stage2 = desk.held_out_mean(main_run.at("2"), cfg.sampler);
      const double stage4 = desk.held_out_mean(main_run.at("4"), cfg.sampler);
      const double ratio = untrained / stage4;
      report(6,
             stage4 < kMaxFinalError && ratio >= kMinUntrainedRatio && stage4 <= stage2 + kRefineSlack &&
                 main_run.seconds < kLearningSeconds,
             "learning signal",
             fmt("%zu scenes, held-out fold of %zu; stage 4 mean %.3f deg (< %.1f), untrained %.3f deg (ratio %.1fx, "
                 ">= %.0fx), stage 2 %.3f deg (stage 4 <= stage 2 + %.1f); training %.0f s (limit %.0f s)",
                 kScenes, desk.test.size(), stage4, kMaxFinalError, untrained, ratio, kMinUntrainedRatio, stage2,
                 kRefineSlack, main_run.seconds, kLearningSeconds));
    });
  }

  guarded(7, "ablation direction", [&] {
    if (!main_ok) throw NumericError("main training run failed");
    // Decision-head models (through stage 2) for the other two grid cells.
    auto random_cfg = cfg;
    random_cfg.arch.refinement = false;
    random_cfg.sampler.mode = sampling::SamplingMode::random;
    const double random = desk.held_out_mean(desk.train_pipeline(random_cfg).at("2"), random_cfg.sampler);
    auto central_cfg = cfg;
    central_cfg.arch.refinement = false;
    central_cfg.arch.variant = nets::Variant::central_only;
    const double central = desk.held_out_mean(desk.train_pipeline(central_cfg).at("2"), central_cfg.sampler);
    report(7, stage2 <= random + kAblationSlack && stage2 <= central + kAblationSlack, "ablation direction",
           fmt("contextual/bright_dark %.3f deg vs contextual/random %.3f deg and central_only/bright_dark %.3f deg "
               "(slack %.1f deg)",
               stage2, random, central, kAblationSlack));
  });

  guarded(8, "metrics golden values", [] {
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
    const auto r = evaluation::compute_metrics(v);
    const std::vector<evaluation::MetricsReport> same(4, r);
    const bool golden = r.mean == 4.5 && r.median == 4.5 && r.best25 == 1.5 && r.worst25 == 7.5 && r.trimean == 4.5;
    const bool idem = evaluation::geomean_report(same) == r;
    report(8, golden && idem, "metrics golden values",
           fmt("[1..8] -> mean %.17g, median %.17g, best25 %.17g, worst25 %.17g, trimean %.17g; geomean idempotence %s",
               r.mean, r.median, r.best25, r.worst25, r.trimean, idem ? "exact" : "violated"));
  });

  guarded(9, "baseline oracle", [] {
    io::SyntheticSceneSpec spec;
    spec.balanced_fraction = 1.0;
    spec.seed = 9;
    double gw = 0.0, scale_dev = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      const auto s = io::generate_scene(spec, i);
      gw = std::max(gw, color::angular_error(baselines::estimate_baseline({}, s.image).rgb, s.e.rgb));
    }
    io::SyntheticSceneSpec free_spec;
    free_spec.width = free_spec.height = 64;
    free_spec.noise_std = kNoise;
    free_spec.chart = true;
    for (std::size_t i = 0; i < 5; ++i) {
      const auto img = io::generate_scene(free_spec, i).image;
      for (auto m : {baselines::Method::gray_world, baselines::Method::white_patch, baselines::Method::shades_of_gray,
                     baselines::Method::gray_edge}) {
        for (int order : {1, 2}) {
          auto b = baselines::BaselineSpec::defaults(m);
          if (m == baselines::Method::gray_edge) b.derivative_order = order;
          const auto base = baselines::estimate_baseline(b, img);
          // Power-of-two factors keep the scaled float pixels exact.
          for (float f : {0.25f, 8.0f, 1024.0f}) {
            auto scaled = img;
            for (auto& v : scaled.pixels()) v *= f;
            scale_dev = std::max(scale_dev, color::angular_error(baselines::estimate_baseline(b, scaled).rgb, base.rgb));
          }
        }
      }
    }
    report(9, gw < kGrayWorldTol && scale_dev < kBaselineScaleTol, "baseline oracle",
           fmt("gray_world worst %.2e deg on 20 balanced scenes (tol %.0e); worst scale deviation %.2e deg over all "
               "baselines (tol %.0e)",
               gw, kGrayWorldTol, scale_dev, kBaselineScaleTol));
  });

  guarded(10, "end-to-end smoke", [&] {
    const fs::path root = fs::temp_directory_path() / "illumkit_acceptance_cli";
    fs::remove_all(root);
    const std::string cli = ILLUMKIT_CLI;
    std::vector<std::string> failures;
    for (const char* run : {"a", "b"}) {
      const fs::path d = root / run;
      fs::create_directories(d);
      std::ofstream(d / "synth.ini") << "[synth]\nwidth = 64\nheight = 64\nnoise_std = 0.01\nchart = true\nseed = 5\n";
      std::ofstream(d / "train.ini") << "[train]\nmax_steps = 100\nseed = 1\n";
      const std::string q = "\"" + d.string() + "\"";
      const std::string manifest = q.substr(0, q.size() - 1) + "/data/manifest.csv\"";
      const std::vector<std::pair<std::string, std::string>> steps{
          {"synth", "synth --spec " + q + "/synth.ini --n 16 --out " + q + "/data"},
          {"train", "train --config " + q + "/train.ini --manifest " + manifest + " --stage all --out " + q + "/runs"},
          {"eval", "eval --config " + q + "/train.ini --manifest " + manifest + " --checkpoint " + q +
                       "/runs/stage_4.ckpt --out " + q + "/eval"},
          {"infer", "infer --checkpoint " + q + "/runs/stage_4.ckpt --image " + q + "/data/scene_0000.pfm --out " + q +
                        "/corrected.ppm"},
      };
      for (const auto& [name, args] : steps) {
        const std::string cmd = "\"" + cli + "\" " + args + " > " + q + "/" + name + ".out 2> " + q + "/" + name + ".err";
        const int status = std::system(cmd.c_str());
        if (status != 0) failures.push_back(std::string(run) + ":" + name + " exit status " + std::to_string(status));
      }
    }
    std::size_t files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
      if (!e.is_regular_file()) continue;
      ++files;
      const auto rel = fs::relative(e.path(), root / "a");
      const auto other = root / "b" / rel;
      // Console output may name the run directory; compare it with that prefix removed.
      const auto content = [&](const fs::path& file, const fs::path& run_dir) {
        std::string text;
        for (auto b : read_file_bytes(file)) text.push_back(static_cast<char>(b));
        if (file.extension() == ".out" || file.extension() == ".err") {
          const std::string prefix = run_dir.string();
          for (auto pos = text.find(prefix); pos != std::string::npos; pos = text.find(prefix, pos)) {
            text.replace(pos, prefix.size(), "<run>");
          }
        }
        return text;
      };
      if (!fs::exists(other) || content(e.path(), root / "a") != content(other, root / "b")) {
        ++differing;
        failures.push_back("differs: " + rel.string());
      }
    }
    double norm = 0.0;
    {
      std::ifstream in(root / "a" / "infer.out");
      double r = 0, g = 0, b = 0;
      in >> r >> g >> b;
      norm = std::hypot(r, g, b);
    }
    const double total = seconds_since(start);
    if (failures.empty()) fs::remove_all(root);
    std::string detail = fmt("synth -> train --stage all -> eval -> infer, run twice: %zu files compared, %zu differ; "
                             "inferred illuminant norm %.9f; acceptance wall time %.0f s (limit %.0f s)",
                             files, differing, norm, total, kTotalSeconds);
    for (const auto& f : failures) detail += "; " + f;
    report(10, failures.empty() && std::abs(norm - 1.0) < 1e-6 && total < kTotalSeconds, "end-to-end smoke", detail);
  });

  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
