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

#include "illumkit/training/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <regex>

#include "illumkit/common/parallel.hpp"
#include "illumkit/common/random.hpp"
#include "illumkit/nets/forward.hpp"
#include "illumkit/nn/loss.hpp"

namespace illumkit::training {

using nets::ArchConfig;
using nets::Model;
using nets::Variant;
using nn::Tensor;

namespace {

bool matches_any(const std::string& name, const std::vector<std::string>& patterns) {
  return std::any_of(patterns.begin(), patterns.end(), [&](const std::string& p) {
    return std::regex_search(name, std::regex(p), std::regex_constants::match_continuous);
  });
}

bool two_unshared_streams(Variant v) { return v == Variant::contextual || v == Variant::pseudo_siamese; }

std::string stream_prefix(Variant v) { return v == Variant::two_channel ? "ctx.stacked." : "ctx.central."; }

// Squared error of one raw 3-vector; writes scale * dL/draw into grad.
double sample_loss(const Tensor<float>& raw, const color::Rgb& gt, double scale, Tensor<float>& grad) {
  grad = Tensor<float>({3});
  double loss = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double d = static_cast<double>(raw[c]) - gt[c];
    loss += d * d;
    grad[c] = static_cast<float>(2.0 * d * scale);
  }
  return loss;
}

const nn::LayerSpec& stack_spec() {
  static const nn::LayerSpec spec = nn::LayerSpec::concat_channels("stack");
  return spec;
}

}  // namespace

bool StagePlan::is_trainable(const std::string& name) const { return matches_any(name, trainable); }
bool StagePlan::is_fresh(const std::string& name) const { return matches_any(name, fresh); }

std::vector<std::string> stage_sequence(const ArchConfig& arch) {
  std::vector<std::string> seq;
  if (arch.variant != Variant::two_channel) seq.push_back("1a");
  if (two_unshared_streams(arch.variant)) seq.push_back("1b");
  seq.push_back("2");
  if (arch.refinement) {
    seq.push_back("3");
    seq.push_back("4");
  }
  return seq;
}

StagePlan plan_for(const std::string& stage_id, const ArchConfig& arch) {
  const auto seq = stage_sequence(arch);
  const auto it = std::find(seq.begin(), seq.end(), stage_id);
  if (it == seq.end()) {
    throw ConfigError("stage '" + stage_id + "' is not part of the " + std::string(nets::to_string(arch.variant)) +
                      (arch.refinement ? "" : " (no refinement)") + " pipeline");
  }
  if ((stage_id == "1a" || stage_id == "1b") && !arch.stream_heads) {
    throw ConfigError("stage " + stage_id + " needs an architecture with stream heads");
  }
  StagePlan plan;
  plan.stage_id = stage_id;
  plan.requires_stage = it == seq.begin() ? "" : *(it - 1);
  if (stage_id == "1a") {
    plan.trainable = {"ctx\\.central\\.", "aux\\.central\\."};
    plan.target = LossTarget::stream;
    plan.stream = nets::Stream::central;
  } else if (stage_id == "1b") {
    plan.trainable = {"ctx\\.surround\\.", "aux\\.surround\\."};
    plan.target = LossTarget::stream;
    plan.stream = nets::Stream::surround;
  } else if (stage_id == "2") {
    plan.trainable = {arch.variant == Variant::two_channel ? "ctx\\." : "ctx\\.fc"};
    plan.target = LossTarget::e1;
  } else if (stage_id == "3") {
    plan.trainable = {"ref\\.conv", "ref\\.fc\\d+_2\\."};
    plan.fresh = {"ref\\.conv1_1\\.", "ref\\.fc\\d+_2\\."};
    plan.copy_from = {{"ref.conv", stream_prefix(arch.variant) + "conv"}};
    plan.target = LossTarget::e2;
  } else {
    plan.trainable = {"ref\\.fc\\d+_3\\."};
    plan.target = LossTarget::final;
  }
  if (plan.fresh.empty()) plan.fresh = plan.trainable;
  return plan;
}

TrainConfig TrainConfig::desk_profile() {
  TrainConfig cfg;
  cfg.sgd.base_lr = 0.003;
  cfg.batch_size = 16;
  cfg.max_steps = 2000;
  cfg.sampler.patch_size = 32;
  cfg.arch.input_size = 32;
  cfg.arch.stream_heads = true;
  cfg.arch.refinement = true;
  return cfg;
}

TrainConfig TrainConfig::paper_profile() {
  TrainConfig cfg;
  cfg.sampler.patch_size = 224;
  cfg.arch.input_size = 224;
  cfg.arch.backbone = {64, 128, 256, 512, 512};
  cfg.arch.convs_per_block = 2;
  cfg.arch.head = {4096, 4096, 3};
  cfg.arch.stream_heads = true;
  cfg.arch.refinement = true;
  return cfg;
}

void TrainConfig::validate() const {
  sgd.validate();
  sampler.validate();
  arch.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (sampler.patch_size != arch.input_size) {
    throw ConfigError("patch_size " + std::to_string(sampler.patch_size) + " differs from input_size " +
                      std::to_string(arch.input_size));
  }
}

Model<float> init_stage(const StagePlan& plan, const ArchConfig& arch, const nn::Checkpoint* prev,
                        std::uint64_t seed) {
  Model<float> model = nets::build_net<float>(arch, seed);
  if (!plan.requires_stage.empty()) {
    if (!prev) throw ConfigError("stage " + plan.stage_id + " needs the checkpoint of stage " + plan.requires_stage);
    if (prev->stage_id != plan.requires_stage) {
      throw ConfigError("stage " + plan.stage_id + " must follow stage " + plan.requires_stage +
                        ", but the checkpoint comes from stage " + prev->stage_id);
    }
    if (prev->arch != arch.serialize()) {
      throw ConfigError("checkpoint architecture '" + prev->arch + "' differs from '" + arch.serialize() + "'");
    }
    std::vector<std::string> missing;
    for (const auto& [name, p] : model.parameters()) {
      if (plan.is_fresh(name)) continue;
      std::string source = name;
      bool copied = false;
      for (const auto& [dst, src] : plan.copy_from) {
        if (name.rfind(dst, 0) == 0) {
          source = src + name.substr(dst.size());
          copied = true;
          break;
        }
      }
      const nn::CheckpointEntry* e = prev->find(source);
      if (!e || e->shape != p->value.shape()) {
        missing.push_back(source);
        continue;
      }
      std::copy(e->value.begin(), e->value.end(), p->value.data().begin());
      if (copied) {
        p->momentum.fill(0.0f);
      } else {
        std::copy(e->momentum.begin(), e->momentum.end(), p->momentum.data().begin());
      }
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw DataError("checkpoint lacks parameters needed by stage " + plan.stage_id + ": " + list);
    }
  }
  for (const auto& [name, p] : model.parameters()) {
    p->lr_mult = plan.is_trainable(name) ? 1.0 : 0.0;
    if (p->lr_mult != 0.0) p->momentum.fill(0.0f);
    p->zero_grad();
  }
  return model;
}

namespace {

// Per-sample forward/backward for one stage, with whatever frozen prefix of
// the network could be precomputed.
class StageRunner {
 public:
  StageRunner(const Model<float>& model, const StagePlan& plan, const std::vector<Sample>& data)
      : model_(model), plan_(plan), data_(data) {
    const auto streams_frozen = [&] {
      for (const auto* chain : {&model.central_stream(), &model.surround_stream()}) {
        for (const auto& p : chain->parameters()) {
          if (p->lr_mult != 0.0) return false;
        }
      }
      return true;
    };
    cache_.resize(data.size());
    aux_.resize(data.size());
    switch (plan.target) {
      case LossTarget::stream: break;
      case LossTarget::e1:
        if (streams_frozen()) {
          parallel_for(data.size(),
                       [&](std::size_t i) { cache_[i] = nets::context_features(model, data[i].pc, data[i].ps); });
          cached_ = true;
        }
        break;
      case LossTarget::e2:
        parallel_for(data.size(), [&](std::size_t i) {
          const auto ctx = nets::contextual_forward(model, data[i].pc, data[i].ps);
          cache_[i] = nn::layer_forward<float>(stack_spec(), {}, {&data[i].pc, &ctx.p1});
        });
        cached_ = true;
        break;
      case LossTarget::final:
        parallel_for(data.size(), [&](std::size_t i) {
          const auto ctx = nets::contextual_forward(model, data[i].pc, data[i].ps);
          cache_[i] = nets::refinement_features(model, data[i].pc, ctx.p1);
          aux_[i] = model.refine_head().forward(cache_[i]);
        });
        cached_ = true;
        break;
    }
  }

  // Loss of sample i; scale * gradient accumulated through `sink`.
  double run(std::size_t i, double scale, const nn::GradSink<float>& sink) const {
    using Trace = nn::Sequential<float>::Trace;
    const Sample& s = data_[i];
    Tensor<float> g;
    switch (plan_.target) {
      case LossTarget::stream: {
        const bool central = plan_.stream == nets::Stream::central;
        const auto& stream = central ? model_.central_stream() : model_.surround_stream();
        const auto& head = model_.stream_head(plan_.stream);
        Trace ts, th;
        const Tensor<float>& f = stream.forward(central ? s.pc : s.ps, ts);
        const double loss = sample_loss(head.forward(f, th), s.gt, scale, g);
        stream.backward(ts, head.backward(th, g, sink, true), sink, false);
        return loss;
      }
      case LossTarget::e1: {
        const auto& head = model_.context_head();
        Trace th;
        if (cached_) {
          const double loss = sample_loss(head.forward(cache_[i], th), s.gt, scale, g);
          head.backward(th, g, sink, false);
          return loss;
        }
        return e1_full(s, scale, sink);
      }
      case LossTarget::e2: {
        Trace tt, th;
        const auto& trunk = model_.refine_trunk();
        const auto& head = model_.refine_head();
        const double loss = sample_loss(head.forward(trunk.forward(cache_[i], tt), th), s.gt, scale, g);
        trunk.backward(tt, head.backward(th, g, sink, true), sink, false);
        return loss;
      }
      case LossTarget::final: {
        Trace th;
        const auto& head = model_.intermediate_head();
        const Tensor<float>& e3 = head.forward(cache_[i], th);
        const Tensor<float>& e2 = aux_[i];
        Tensor<float> prod({3});
        for (std::size_t c = 0; c < 3; ++c) prod[c] = e2[c] * e3[c];
        const double loss = sample_loss(prod, s.gt, scale, g);
        for (std::size_t c = 0; c < 3; ++c) g[c] *= e2[c];
        head.backward(th, g, sink, false);
        return loss;
      }
    }
    return 0.0;
  }

 private:
  // Decision loss with trainable streams.
  double e1_full(const Sample& s, double scale, const nn::GradSink<float>& sink) const {
    using Trace = nn::Sequential<float>::Trace;
    const auto& head = model_.context_head();
    Trace tc, tsur, th;
    Tensor<float> g;
    if (!model_.has_surround()) {
      Tensor<float> in = model_.arch().variant == Variant::two_channel
                             ? nn::layer_forward<float>(stack_spec(), {}, {&s.pc, &s.ps})
                             : s.pc;
      const double loss = sample_loss(head.forward(model_.central_stream().forward(in, tc), th), s.gt, scale, g);
      model_.central_stream().backward(tc, head.backward(th, g, sink, true), sink, false);
      return loss;
    }
    const Tensor<float>& fc = model_.central_stream().forward(s.pc, tc);
    const Tensor<float>& fs = model_.surround_stream().forward(s.ps, tsur);
    const Tensor<float> fused = nn::layer_forward<float>(model_.fusion(), {}, {&fc, &fs});
    const double loss = sample_loss(head.forward(fused, th), s.gt, scale, g);
    const auto gf = nn::layer_backward_into<float>(model_.fusion(), {}, {&fc, &fs}, head.backward(th, g, sink, true), {});
    model_.central_stream().backward(tc, gf[0], sink, false);
    model_.surround_stream().backward(tsur, gf[1], sink, false);
    return loss;
  }

  const Model<float>& model_;
  const StagePlan& plan_;
  const std::vector<Sample>& data_;
  std::vector<Tensor<float>> cache_;
  std::vector<Tensor<float>> aux_;
  bool cached_ = false;
};

}  // namespace

StageResult train_stage(Model<float>& model, const StagePlan& plan, const std::vector<Sample>& data,
                        const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.sgd.validate();
  if (data.empty()) throw DataError("training set is empty");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be at least 1");

  std::vector<nn::ParamPtr<float>> trainable;
  for (const auto& p : model.parameter_list()) {
    if (p->lr_mult != 0.0) trainable.push_back(p);
  }
  const StageRunner runner(model, plan, data);
  const std::size_t batch = cfg.batch_size;
  std::vector<nn::GradientBuffer<float>> buffers;
  buffers.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) buffers.emplace_back(trainable);
  std::vector<double> losses(batch);

  std::mt19937_64 rng(mix_seed(cfg.seed, fnv1a("batches:" + plan.stage_id)));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  std::vector<std::size_t> picks(batch);

  StageResult result;
  result.trajectory.reserve(cfg.max_steps);
  const double scale = 1.0 / static_cast<double>(batch);
  std::uint64_t step = 0;
  for (; step < cfg.max_steps; ++step) {
    for (auto& idx : picks) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      idx = order[cursor++];
    }
    parallel_for(batch, [&](std::size_t b) {
      buffers[b].zero();
      losses[b] = runner.run(picks[b], scale, buffers[b].sink());
    });
    const double loss = std::accumulate(losses.begin(), losses.end(), 0.0) * scale;
    if (!std::isfinite(loss)) {
      result.aborted = true;
      result.message = "non-finite loss at step " + std::to_string(step) + " of stage " + plan.stage_id;
      break;
    }
    for (const auto& p : trainable) p->zero_grad();
    for (const auto& buf : buffers) buf.add_to_params();
    nn::sgd_update(trainable, cfg.sgd, step);
    const LossPoint point{step, loss, nn::scheduled_lr(cfg.sgd, step)};
    result.trajectory.push_back(point);
    if (progress && cfg.eval_every && (step + 1) % cfg.eval_every == 0) progress(plan.stage_id, point);
  }
  for (const auto& p : trainable) p->zero_grad();
  result.checkpoint = model.to_checkpoint(plan.stage_id, step);
  return result;
}

PipelineResult run_pipeline(const std::vector<Sample>& data, const TrainConfig& cfg, const std::string& first_stage,
                            const nn::Checkpoint* resume,
                            const std::function<void(const std::string&, const StageResult&)>& on_stage,
                            const ProgressFn& progress) {
  cfg.validate();
  const auto seq = stage_sequence(cfg.arch);
  std::size_t start = 0;
  if (!first_stage.empty()) {
    const auto it = std::find(seq.begin(), seq.end(), first_stage);
    if (it == seq.end()) throw ConfigError("stage '" + first_stage + "' is not part of this pipeline");
    start = static_cast<std::size_t>(it - seq.begin());
  }
  PipelineResult out;
  const nn::Checkpoint* prev = start == 0 ? nullptr : resume;
  for (std::size_t i = start; i < seq.size(); ++i) {
    const StagePlan plan = plan_for(seq[i], cfg.arch);
    Model<float> model = init_stage(plan, cfg.arch, prev, cfg.seed);
    StageResult r = train_stage(model, plan, data, cfg, progress);
    out.stages.emplace_back(seq[i], std::move(r));
    const StageResult& done = out.stages.back().second;
    if (on_stage) on_stage(seq[i], done);
    if (done.aborted) throw NumericError(done.message);
    prev = &done.checkpoint;
  }
  return out;
}

std::vector<Sample> make_samples(const std::vector<color::LinearImage>& images, const std::vector<color::Rgb>& gts,
                                 const sampling::SamplerConfig& sampler, const std::vector<std::size_t>& indices) {
  if (images.size() != gts.size()) throw DataError("image and ground-truth counts differ");
  std::vector<std::vector<Sample>> per_image(indices.size());
  parallel_for(indices.size(), [&](std::size_t k) {
    const std::size_t i = indices[k];
    if (i >= images.size()) throw DataError("image index " + std::to_string(i) + " out of range");
    sampling::SamplerConfig cfg = sampler;
    cfg.seed = mix_seed(sampler.seed, i);
    sampling::SampleResult r;
    try {
      r = sampling::sample_patch_pairs(images[i], cfg);
    } catch (const DataError& e) {
      throw DataError("image " + std::to_string(i) + ": " + e.what());
    }
    for (auto& pair : r.pairs) per_image[k].push_back({std::move(pair.central), std::move(pair.surround), gts[i], i});
  });
  std::vector<Sample> out;
  for (auto& v : per_image) {
    for (auto& s : v) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace illumkit::training
