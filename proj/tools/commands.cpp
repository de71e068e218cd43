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

#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "illumkit/baselines/baselines.hpp"
#include "illumkit/common/parallel.hpp"
#include "illumkit/error.hpp"
#include "illumkit/common/random.hpp"
#include "illumkit/evaluation/evaluation.hpp"
#include "illumkit/io/image_io.hpp"
#include "illumkit/io/manifest.hpp"
#include "illumkit/io/patch_export.hpp"
#include "illumkit/io/synthetic.hpp"
#include "illumkit/nets/forward.hpp"
#include "illumkit/nn/checkpoint.hpp"
#include "illumkit/training/training.hpp"
#include "run_config.hpp"

namespace illumkit::cli {

namespace fs = std::filesystem;

namespace {

// Schema-driven flags of one subcommand plus an optional --config file.
class Settings {
 public:
  Settings(CLI::App* app, std::vector<Key> schema, const std::string& config_flag = "--config")
      : config_(std::move(schema)) {
    app->add_option(config_flag, file_, "INI file; flags override its values");
    for (const auto& k : config_.schema()) {
      auto& slot = flags_[k.name];
      std::string help = "[" + k.section + "] " + k.help;
      if (!k.default_value.empty()) help += " (default " + k.default_value + ")";
      options_[k.name] = app->add_option(k.flag(), slot, help);
    }
  }

  const RunConfig& resolve() {
    if (!file_.empty()) config_.load_ini(file_);
    for (const auto& [name, opt] : options_) {
      if (opt->count() > 0) config_.set(name, flags_[name]);
    }
    return config_;
  }

 private:
  RunConfig config_;
  std::string file_;
  std::map<std::string, std::string> flags_;
  std::map<std::string, CLI::Option*> options_;
};

struct Dataset {
  io::DatasetManifest manifest;
  std::vector<color::LinearImage> images;
  std::vector<color::Rgb> gts;
};

Dataset load_dataset(const fs::path& manifest_path) {
  Dataset d;
  d.manifest = io::load_manifest(manifest_path);
  if (d.manifest.records.empty()) throw DataError(manifest_path.string() + ": no records");
  d.images.resize(d.manifest.records.size());
  parallel_for(d.images.size(), [&](std::size_t i) { d.images[i] = io::load_record_image(d.manifest, i); });
  for (const auto& r : d.manifest.records) d.gts.push_back(r.gt.rgb);
  return d;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

struct Split {
  evaluation::FoldSplit folds;
  /// Fold held out of training; folds.folds.size() means none.
  std::size_t holdout = 0;
};

Split make_split(const RunConfig& cfg, std::size_t n) {
  Split s;
  s.folds = evaluation::make_folds(iota(n), cfg.count("folds"), cfg.u64("fold_seed"));
  const std::string h = cfg.get("holdout_fold");
  s.holdout = h == "none" ? s.folds.folds.size() : cfg.count("holdout_fold");
  if (s.holdout > s.folds.folds.size()) throw ConfigError("holdout_fold must be below folds, or none");
  return s;
}

std::vector<std::size_t> training_ids(const Split& s) {
  std::vector<std::size_t> ids;
  for (std::size_t f = 0; f < s.folds.folds.size(); ++f) {
    if (f != s.holdout) ids.insert(ids.end(), s.folds.folds[f].begin(), s.folds.folds[f].end());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

fs::path manifest_path(const RunConfig& cfg) {
  const std::string p = cfg.get("manifest");
  if (p.empty()) throw ConfigError("no manifest given (use --manifest or [train] manifest)");
  return p;
}

void write_loss_csv(const fs::path& path, const std::vector<training::LossPoint>& points) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "step,loss,lr\n";
  out.precision(9);
  for (const auto& p : points) out << p.step << "," << p.loss << "," << p.lr << "\n";
}

void write_metrics(std::ostream& out, const std::string& method, const evaluation::MetricsReport& r) {
  out << method << "," << r.mean << "," << r.median << "," << r.trimean << "," << r.best25 << "," << r.worst25 << ","
      << r.pct95 << "\n";
}

struct EvalRow {
  std::size_t image = 0;
  std::size_t fold = 0;
  double error = 0.0;
};

// Metrics over all rows, per subset and the subset geomean when the dataset has several.
void write_metrics_csv(const fs::path& path, const std::string& method, const std::vector<EvalRow>& rows,
                       const io::DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(9);
  out << "method,mean,med,tri,best25,worst25,pct95\n";
  std::vector<double> all;
  for (const auto& r : rows) all.push_back(r.error);
  write_metrics(out, method, evaluation::compute_metrics(all));
  const auto subsets = manifest.subsets();
  if (subsets.size() < 2) return;
  std::vector<evaluation::MetricsReport> per;
  for (const auto& s : subsets) {
    std::vector<double> e;
    for (const auto& r : rows) {
      if (manifest.records[r.image].subset == s) e.push_back(r.error);
    }
    if (e.size() < 4) continue;
    per.push_back(evaluation::compute_metrics(e));
    write_metrics(out, method + "@" + s, per.back());
  }
  if (per.size() >= 2) write_metrics(out, method + "@geomean", evaluation::geomean_report(per));
}

void write_errors_csv(const fs::path& path, const std::vector<EvalRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(9);
  out << "image_id,fold,error_deg\n";
  for (const auto& r : rows) out << r.image << "," << r.fold << "," << r.error << "\n";
}

sampling::SamplerConfig eval_sampler(const RunConfig& cfg, const nets::ArchConfig& arch) {
  sampling::SamplerConfig s = sampler_config(cfg);
  if (!cfg.value("patch_size")) s.patch_size = arch.input_size;
  if (s.patch_size != arch.input_size) throw ConfigError("patch_size differs from the checkpoint's input size");
  return s;
}

nets::Output parse_output(const std::string& text, const nn::Checkpoint& ckpt) {
  if (text == "auto") return nets::output_for_stage(ckpt.stage_id);
  for (auto o : {nets::Output::central_stream, nets::Output::surround_stream, nets::Output::e1, nets::Output::e2,
                 nets::Output::final}) {
    if (text == nets::to_string(o)) return o;
  }
  throw ConfigError("unknown output '" + text + "'");
}

// Errors of `model` on the given images; per-image sampler seeds mix in the image index.
std::vector<EvalRow> evaluate_images(const nets::Model<float>& model, nets::Output output, const Dataset& d,
                                     const sampling::SamplerConfig& sampler, const std::vector<std::size_t>& ids,
                                     const evaluation::FoldSplit& folds, std::size_t& all_flagged) {
  std::vector<EvalRow> rows(ids.size());
  std::vector<std::uint8_t> flagged(ids.size(), 0);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const std::size_t i = ids[k];
    sampling::SamplerConfig s = sampler;
    s.seed = mix_seed(sampler.seed, i);
    const auto g = evaluation::infer_global(model, d.images[i], s, output);
    flagged[k] = g.all_flagged;
    rows[k] = {i, folds.fold_of(i), color::angular_error(g.e.rgb, d.gts[i])};
  }
  for (auto f : flagged) all_flagged += f;
  return rows;
}

// ---- subcommands ---------------------------------------------------------

int run_synth(Settings& settings, const std::string& out, std::size_t n) {
  const io::SyntheticSceneSpec spec = synth_spec(settings.resolve());
  const auto m = io::generate_synthetic(spec, n, out);
  std::cout << "wrote " << m.records.size() << " scenes to " << (fs::path(out) / "manifest.csv").string() << "\n";
  return 0;
}

int run_sample(Settings& settings, const std::string& manifest, const std::string& out) {
  const RunConfig& cfg = settings.resolve();
  const sampling::SamplerConfig sampler = sampler_config(cfg);
  const Dataset d = load_dataset(manifest);
  std::vector<std::vector<io::ExportedPatch>> per(d.images.size());
  std::vector<std::uint8_t> fell_back(d.images.size(), 0);
  parallel_for(d.images.size(), [&](std::size_t i) {
    sampling::SamplerConfig s = sampler;
    s.seed = mix_seed(sampler.seed, i);
    auto r = sampling::sample_patch_pairs(d.images[i], s);
    fell_back[i] = r.fell_back_to_random;
    for (auto& p : r.pairs) per[i].push_back({i, std::move(p)});
  });
  std::vector<io::ExportedPatch> all;
  for (std::size_t i = 0; i < per.size(); ++i) {
    if (fell_back[i]) std::cerr << "warning: image " << i << " needed random windows to reach " << sampler.num_patches << " patches\n";
    for (auto& p : per[i]) all.push_back(std::move(p));
  }
  fs::create_directories(out);
  io::write_patches(fs::path(out) / "patches.illk", fs::path(out) / "patches.csv", all, sampler.patch_size);
  std::cout << "wrote " << all.size() << " patch pairs to " << out << "\n";
  return 0;
}

int run_train(Settings& settings, const std::string& stage, const std::string& resume,
              const std::string& out) {
  const RunConfig& cfg = settings.resolve();
  const training::TrainConfig tc = train_config(cfg);
  const Dataset d = load_dataset(manifest_path(cfg));
  const Split split = make_split(cfg, d.images.size());
  const auto ids = training_ids(split);
  if (ids.empty()) throw ConfigError("no training images left after holding out a fold");
  const auto data = training::make_samples(d.images, d.gts, tc.sampler, ids);
  fs::create_directories(out);
  {
    std::ofstream f(fs::path(out) / "folds.csv", std::ios::trunc);
    f << "image_id,fold,train\n";
    for (std::size_t i = 0; i < d.images.size(); ++i) {
      const std::size_t fold = split.folds.fold_of(i);
      f << i << "," << fold << "," << (fold != split.holdout ? 1 : 0) << "\n";
    }
  }
  const auto save = [&](const std::string& id, const training::StageResult& r) {
    nn::save_checkpoint(r.checkpoint, fs::path(out) / ("stage_" + id + ".ckpt"));
    write_loss_csv(fs::path(out) / ("loss_" + id + ".csv"), r.trajectory);
    const auto& t = r.trajectory;
    std::cerr << "stage " << id << ": " << t.size() << " steps" << (t.empty() ? "" : ", final loss " + std::to_string(t.back().loss))
              << (r.aborted ? " (aborted: " + r.message + ")" : "") << "\n";
  };
  const training::ProgressFn progress = [](const std::string& id, const training::LossPoint& p) {
    std::cerr << "  [" << id << "] step " << p.step + 1 << " loss " << p.loss << " lr " << p.lr << "\n";
  };

  std::unique_ptr<nn::Checkpoint> prev;
  if (!resume.empty()) prev = std::make_unique<nn::Checkpoint>(nn::load_checkpoint(resume));

  if (stage == "all") {
    std::string first;
    if (prev) {
      const auto seq = training::stage_sequence(tc.arch);
      const auto it = std::find(seq.begin(), seq.end(), prev->stage_id);
      if (it == seq.end()) throw ConfigError("resume checkpoint stage '" + prev->stage_id + "' is not in this pipeline");
      if (it + 1 == seq.end()) throw ConfigError("resume checkpoint is already the final stage");
      first = *(it + 1);
    }
    training::run_pipeline(data, tc, first, prev.get(), save, progress);
    return 0;
  }
  const auto plan = training::plan_for(stage, tc.arch);
  auto model = training::init_stage(plan, tc.arch, prev.get(), tc.seed);
  const auto r = training::train_stage(model, plan, data, tc, progress);
  save(stage, r);
  if (r.aborted) throw NumericError(r.message);
  return 0;
}

int run_eval(Settings& settings, const std::vector<std::string>& checkpoints,
             const std::string& method, const baselines::BaselineSpec* overrides, const std::string& output_flag,
             const std::string& out) {
  const RunConfig& cfg = settings.resolve();
  const Dataset d = load_dataset(manifest_path(cfg));
  const Split split = make_split(cfg, d.images.size());
  std::vector<EvalRow> rows;
  std::string name;
  if (!method.empty()) {
    if (!checkpoints.empty()) throw ConfigError("give either --method or --checkpoint, not both");
    baselines::BaselineSpec spec = *overrides;
    name = std::string(baselines::to_string(spec.method));
    rows.resize(d.images.size());
    parallel_for(d.images.size(), [&](std::size_t i) {
      const auto e = baselines::estimate_baseline(spec, d.images[i]);
      rows[i] = {i, split.folds.fold_of(i), color::angular_error(e.rgb, d.gts[i])};
    });
  } else {
    if (checkpoints.empty()) throw ConfigError("eval needs --method or at least one --checkpoint");
    const std::size_t k = split.folds.folds.size();
    if (checkpoints.size() != 1 && checkpoints.size() != k) {
      throw ConfigError("give one checkpoint, or one per fold (" + std::to_string(k) + ")");
    }
    std::size_t flagged = 0;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoints[c]);
      const auto model = nets::model_from_checkpoint<float>(ckpt);
      const nets::Output output = parse_output(output_flag, ckpt);
      std::vector<std::size_t> ids;
      if (checkpoints.size() == k) {
        ids = split.folds.folds[c];
      } else if (split.holdout < k) {
        ids = split.folds.folds[split.holdout];
      } else {
        ids = iota(d.images.size());
      }
      std::sort(ids.begin(), ids.end());
      auto part = evaluate_images(model, output, d, eval_sampler(cfg, model.arch()), ids, split.folds, flagged);
      rows.insert(rows.end(), part.begin(), part.end());
      name = std::string(nets::to_string(model.arch().variant)) + ":" + std::string(nets::to_string(output));
    }
    if (flagged) std::cerr << "warning: " << flagged << " image(s) had only degenerate patch estimates\n";
    std::sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) { return a.image < b.image; });
  }
  fs::create_directories(out);
  write_errors_csv(fs::path(out) / "errors.csv", rows);
  write_metrics_csv(fs::path(out) / "metrics.csv", name, rows, d.manifest);
  std::ifstream in(fs::path(out) / "metrics.csv");
  std::cout << in.rdbuf();
  return 0;
}

int run_infer(Settings& settings, const std::string& checkpoint, const std::string& image, const std::string& mask,
              bool linear, const std::string& output_flag, const std::string& out) {
  const RunConfig& cfg = settings.resolve();
  const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint);
  const auto model = nets::model_from_checkpoint<float>(ckpt);
  color::LinearImage img = io::decode_image(image, linear);
  if (!mask.empty()) img.set_mask(io::read_mask(mask, img.width(), img.height()));
  const auto g = evaluation::infer_global(model, img, eval_sampler(cfg, model.arch()), parse_output(output_flag, ckpt));
  if (g.all_flagged) std::cerr << "warning: every patch estimate was degenerate; reporting the neutral light\n";
  if (g.sampler_fell_back) std::cerr << "warning: sampling fell back to random windows\n";
  char line[96];
  std::snprintf(line, sizeof line, "%.9f %.9f %.9f\n", g.e.rgb[0], g.e.rgb[1], g.e.rgb[2]);
  std::cout << line;
  if (!out.empty()) {
    color::LinearImage corrected = color::gamma_encode(color::diagonal_correct(g.e, img));
    corrected.clear_mask();
    io::write_ppm(out, corrected);
  }
  return 0;
}

int run_ablate(Settings& settings, const std::string& variants,
               const std::string& modes, const std::string& out) {
  const RunConfig& cfg = settings.resolve();
  const training::TrainConfig base = train_config(cfg);
  const Dataset d = load_dataset(manifest_path(cfg));
  const Split split = make_split(cfg, d.images.size());
  if (split.holdout >= split.folds.folds.size()) throw ConfigError("ablate needs a held-out fold");
  const auto ids = training_ids(split);
  auto test = split.folds.folds[split.holdout];
  std::sort(test.begin(), test.end());
  const auto list = [](const std::string& s) {
    std::vector<std::string> v;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');) {
      if (!item.empty()) v.push_back(item);
    }
    return v;
  };
  fs::create_directories(out);
  std::ofstream metrics(fs::path(out) / "ablation.csv", std::ios::trunc);
  metrics.precision(9);
  metrics << "method,mean,med,tri,best25,worst25,pct95\n";
  for (const auto& mode : list(modes)) {
    training::TrainConfig tc = base;
    tc.sampler.mode = sampling::parse_sampling_mode(mode);
    const auto data = training::make_samples(d.images, d.gts, tc.sampler, ids);
    for (const auto& variant : list(variants)) {
      tc.arch.variant = nets::parse_variant(variant);
      tc.arch.refinement = false;
      tc.arch.stream_heads = tc.arch.variant != nets::Variant::two_channel;
      const auto result = training::run_pipeline(data, tc);
      const auto model = nets::model_from_checkpoint<float>(result.final_checkpoint());
      std::size_t flagged = 0;
      sampling::SamplerConfig sampler = tc.sampler;
      auto rows = evaluate_images(model, nets::Output::e1, d, sampler, test, split.folds, flagged);
      const std::string name = variant + "/" + mode;
      std::vector<double> e;
      for (const auto& r : rows) e.push_back(r.error);
      write_metrics(metrics, name, evaluation::compute_metrics(e));
      write_errors_csv(fs::path(out) / ("errors_" + variant + "_" + mode + ".csv"), rows);
      std::cerr << name << ": mean " << evaluation::compute_metrics(e).mean << " deg\n";
    }
  }
  metrics.close();
  std::ifstream in(fs::path(out) / "ablation.csv");
  std::cout << in.rdbuf();
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"illumkit: contextual illuminant estimation with center-surround networks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground-truth illuminants");
  Settings synth_settings(synth, synth_schema(), "--spec");
  std::string synth_out;
  std::size_t synth_n = 0;
  synth->add_option("--n", synth_n, "Number of scenes")->required()->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_out, "Output directory")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "Sample central/surround patch pairs from a dataset");
  Settings sample_settings(sample, sampler_schema());
  std::string sample_manifest, sample_out;
  sample->add_option("--manifest", sample_manifest, "Dataset manifest CSV")->required();
  sample->add_option("--out", sample_out, "Output directory (patches.illk, patches.csv)")->required();

  // train
  auto* train = app.add_subcommand("train", "Stage-wise training");
  Settings train_settings(train, train_schema());
  std::string train_stage = "all", train_resume, train_out = "runs";
  train->add_option("--stage", train_stage, "Stage id (1a, 1b, 2, 3, 4) or all");
  train->add_option("--resume", train_resume, "Checkpoint of the preceding stage");
  train->add_option("--out", train_out, "Output directory for checkpoints and loss CSVs (default runs)");

  // eval
  auto* eval = app.add_subcommand("eval", "Angular-error evaluation of a model or a baseline");
  Settings eval_settings(eval, train_schema());
  std::string eval_method, eval_output = "auto", eval_out = ".";
  std::vector<std::string> eval_ckpts;
  baselines::BaselineSpec eval_spec;
  double eval_p = 0.0, eval_sigma = -1.0;
  int eval_order = 1;
  eval->add_option("--checkpoint", eval_ckpts, "Model checkpoint; repeat once per fold for cross-validation");
  eval->add_option("--method", eval_method, "Baseline: gray_world, white_patch, shades_of_gray, gray_edge");
  eval->add_option("--minkowski-p", eval_p, "Baseline Minkowski norm (default 6; 1 for gray_world)");
  eval->add_option("--order", eval_order, "gray_edge derivative order (1 or 2)");
  eval->add_option("--sigma", eval_sigma, "Baseline Gaussian pre-smoothing (default 1 for gray_edge, else 0)");
  eval->add_option("--output", eval_output, "Model output: auto, central_stream, surround_stream, e1, e2, final");
  eval->add_option("--out", eval_out, "Output directory for errors.csv and metrics.csv");

  // infer
  auto* infer = app.add_subcommand("infer", "Estimate the illuminant of one image and correct it");
  Settings infer_settings(infer, sampler_schema());
  std::string infer_ckpt, infer_image, infer_mask, infer_output = "auto", infer_out;
  bool infer_linear = false;
  infer->add_option("--checkpoint", infer_ckpt, "Model checkpoint")->required();
  infer->add_option("--image", infer_image, "PFM or P6 image")->required();
  infer->add_option("--mask", infer_mask, "PBM/PGM exclusion mask");
  infer->add_flag("--linear", infer_linear, "P6 samples are linear (skip the inverse gamma)");
  infer->add_option("--output", infer_output, "Model output: auto, central_stream, surround_stream, e1, e2, final");
  infer->add_option("--out", infer_out, "Write the corrected image as gamma-encoded P6");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Variant x sampling-mode comparison on a held-out fold");
  Settings ablate_settings(ablate, train_schema());
  std::string ablate_variants = "contextual,central_only", ablate_modes = "bright_dark,random",
                               ablate_out;
  ablate->add_option("--variants", ablate_variants, "Comma-separated variants");
  ablate->add_option("--modes", ablate_modes, "Comma-separated sampling modes");
  ablate->add_option("--out", ablate_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return run_synth(synth_settings, synth_out, synth_n);
    if (*sample) return run_sample(sample_settings, sample_manifest, sample_out);
    if (*train) return run_train(train_settings, train_stage, train_resume, train_out);
    if (*eval) {
      if (!eval_method.empty()) {
        eval_spec = baselines::BaselineSpec::defaults(baselines::parse_method(eval_method));
        if (eval_p > 0.0) eval_spec.minkowski_p = eval_p;
        if (eval_sigma >= 0.0) eval_spec.smoothing_sigma = eval_sigma;
        eval_spec.derivative_order = eval_order;
        eval_spec.validate();
      }
      return run_eval(eval_settings, eval_ckpts, eval_method, &eval_spec, eval_output, eval_out);
    }
    if (*infer) {
      return run_infer(infer_settings, infer_ckpt, infer_image, infer_mask, infer_linear, infer_output, infer_out);
    }
    if (*ablate) return run_ablate(ablate_settings, ablate_variants, ablate_modes, ablate_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numeric);
  }
  return 1;
}

}  // namespace illumkit::cli
