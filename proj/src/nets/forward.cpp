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

#include "illumkit/nets/forward.hpp"

#include <algorithm>
#include <cmath>

#include "illumkit/nn/loss.hpp"

namespace illumkit::nets {

using nn::Tensor;

namespace {

const nn::LayerSpec& stacking_spec() {
  static const nn::LayerSpec spec = nn::LayerSpec::concat_channels("stack");
  return spec;
}

template <typename T>
Tensor<T> stack(const Tensor<T>& a, const Tensor<T>& b) {
  return nn::layer_forward<T>(stacking_spec(), {}, {&a, &b});
}

// Channels [0, 3) and [3, 6) of a 6 x H x W tensor.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split(const Tensor<T>& t) {
  const std::size_t half = t.size() / 2;
  nn::Shape s{3, t.dim(1), t.dim(2)};
  std::vector<T> a(t.data().begin(), t.data().begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<T> b(t.data().begin() + static_cast<std::ptrdiff_t>(half), t.data().end());
  return {Tensor<T>(s, std::move(a)), Tensor<T>(std::move(s), std::move(b))};
}

template <typename T>
Tensor<T> row(const Tensor<T>& v) {
  Tensor<T> r = v;
  r.reshape({1, 3});
  return r;
}

template <typename T>
void append(std::vector<std::uint8_t>& out, const std::vector<std::uint8_t>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

FinalEstimate finalize_estimate(const color::Rgb& raw) {
  FinalEstimate out;
  color::Rgb clamped{};
  for (std::size_t c = 0; c < 3; ++c) {
    if (!std::isfinite(raw[c])) throw NumericError("network produced a non-finite illuminant estimate");
    clamped[c] = std::max(raw[c], color::kMinChannel);
    if (raw[c] <= color::kMinChannel) out.degenerate = true;
  }
  out.e = color::normalize_illuminant(clamped);
  if (*std::min_element(out.e.rgb.begin(), out.e.rgb.end()) <= color::kMinChannel) out.degenerate = true;
  return out;
}

template <typename T>
color::Rgb to_rgb(const Tensor<T>& t) {
  if (t.size() != 3) throw ShapeError("expected a 3-vector, got shape " + nn::shape_string(t.shape()));
  return {static_cast<double>(t[0]), static_cast<double>(t[1]), static_cast<double>(t[2])};
}

template <typename T>
Tensor<T> correct_or_pass(const FinalEstimate& est, const Tensor<T>& patch) {
  return est.degenerate ? patch : color::diagonal_correct(est.e, patch);
}

template <typename T>
Tensor<T> context_features(const Model<T>& model, const Tensor<T>& pc, const Tensor<T>& ps) {
  switch (model.arch().variant) {
    case Variant::central_only: return model.central_stream().forward(pc);
    case Variant::two_channel: return model.central_stream().forward(stack(pc, ps));
    default: break;
  }
  const Tensor<T> fc = model.central_stream().forward(pc);
  const Tensor<T> fs = model.surround_stream().forward(ps);
  return nn::layer_forward<T>(model.fusion(), {}, {&fc, &fs});
}

template <typename T>
ContextualResult<T> contextual_forward(const Model<T>& model, const Tensor<T>& pc, const Tensor<T>& ps) {
  ContextualResult<T> r;
  r.raw = model.context_head().forward(context_features(model, pc, ps));
  r.e1 = finalize_estimate(to_rgb(r.raw));
  r.p1 = correct_or_pass(r.e1, pc);
  return r;
}

template <typename T>
Tensor<T> refinement_features(const Model<T>& model, const Tensor<T>& pc, const Tensor<T>& p1) {
  if (!model.has_refinement()) throw ConfigError("model has no refinement network");
  return model.refine_trunk().forward(stack(pc, p1));
}

template <typename T>
RefinementResult<T> refinement_forward(const Model<T>& model, const Tensor<T>& pc, const Tensor<T>& p1) {
  const Tensor<T> f = refinement_features(model, pc, p1);
  RefinementResult<T> r;
  r.e2_raw = model.refine_head().forward(f);
  r.e3_raw = model.intermediate_head().forward(f);
  static const nn::LayerSpec prod = nn::LayerSpec::eltwise_prod("ref.product");
  r.product_raw = nn::layer_forward<T>(prod, {}, {&r.e2_raw, &r.e3_raw});
  r.e2 = finalize_estimate(to_rgb(r.e2_raw));
  r.e_final = finalize_estimate(to_rgb(r.product_raw));
  r.p2 = correct_or_pass(r.e_final, pc);
  return r;
}

std::string_view to_string(Output o) {
  switch (o) {
    case Output::central_stream: return "central_stream";
    case Output::surround_stream: return "surround_stream";
    case Output::e1: return "e1";
    case Output::e2: return "e2";
    case Output::final: return "final";
  }
  return "?";
}

Output output_for_stage(std::string_view stage_id) {
  if (stage_id == "1a") return Output::central_stream;
  if (stage_id == "1b") return Output::surround_stream;
  if (stage_id == "2") return Output::e1;
  if (stage_id == "3") return Output::e2;
  if (stage_id == "4" || stage_id == "e2e") return Output::final;
  throw ConfigError("unknown stage id '" + std::string(stage_id) + "'");
}

template <typename T>
FinalEstimate estimate_patch(const Model<T>& model, const Tensor<T>& pc, const Tensor<T>& ps, Output out) {
  switch (out) {
    case Output::central_stream:
      return finalize_estimate(to_rgb(model.stream_head(Stream::central).forward(model.central_stream().forward(pc))));
    case Output::surround_stream:
      return finalize_estimate(
          to_rgb(model.stream_head(Stream::surround).forward(model.surround_stream().forward(ps))));
    case Output::e1: return contextual_forward(model, pc, ps).e1;
    case Output::e2: return refinement_forward(model, pc, contextual_forward(model, pc, ps).p1).e2;
    case Output::final: return refinement_forward(model, pc, contextual_forward(model, pc, ps).p1).e_final;
  }
  throw ConfigError("unknown output");
}

template <typename T>
PipelineLoss<T> pipeline_loss(const Model<T>& model, const Tensor<T>& pc, const Tensor<T>& ps,
                              const color::Rgb& gt, const nn::GradSink<T>* sink) {
  if (!model.has_refinement()) throw ConfigError("pipeline loss needs the refinement network");
  using Trace = typename nn::Sequential<T>::Trace;
  const Variant variant = model.arch().variant;
  const bool two_streams = model.has_surround();
  PipelineLoss<T> out;

  // Contextual net.
  Trace t_central, t_surround, t_head;
  Tensor<T> stacked_in;
  Tensor<T> fused;
  if (variant == Variant::two_channel) {
    stacked_in = stack(pc, ps);
    fused = model.central_stream().forward(stacked_in, t_central);
  } else if (!two_streams) {
    fused = model.central_stream().forward(pc, t_central);
  } else {
    const Tensor<T>& fc = model.central_stream().forward(pc, t_central);
    const Tensor<T>& fs = model.surround_stream().forward(ps, t_surround);
    fused = nn::layer_forward<T>(model.fusion(), {}, {&fc, &fs});
  }
  const Tensor<T> e1_raw = model.context_head().forward(fused, t_head);
  if (!e1_raw.all_finite()) throw NumericError("non-finite e1 in pipeline forward");

  // P1 = diag(gain(e1)) * pc with gain_c = ||e|| / (sqrt(3) e_c) on the clamped estimate.
  const color::Rgb r1 = to_rgb(e1_raw);
  color::Rgb ce{};
  std::array<bool, 3> clamped{};
  for (std::size_t c = 0; c < 3; ++c) {
    clamped[c] = r1[c] <= color::kMinChannel;
    ce[c] = clamped[c] ? color::kMinChannel : r1[c];
  }
  const FinalEstimate est1 = finalize_estimate(r1);
  const double norm = std::sqrt(ce[0] * ce[0] + ce[1] * ce[1] + ce[2] * ce[2]);
  const double sqrt3 = std::sqrt(3.0);
  color::Rgb gain{1.0, 1.0, 1.0};
  if (!est1.degenerate) {
    for (std::size_t c = 0; c < 3; ++c) gain[c] = norm / (sqrt3 * ce[c]);
  }
  const std::size_t plane = pc.dim(1) * pc.dim(2);
  Tensor<T> p1 = pc;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane; ++i) p1[c * plane + i] = static_cast<T>(pc[c * plane + i] * gain[c]);
  }

  // Refinement net.
  Trace t_trunk, t_e2, t_e3;
  const Tensor<T> ref_in = stack(pc, p1);
  const Tensor<T> f = model.refine_trunk().forward(ref_in, t_trunk);
  const Tensor<T> e2_raw = model.refine_head().forward(f, t_e2);
  const Tensor<T> e3_raw = model.intermediate_head().forward(f, t_e3);
  Tensor<T> prod({3});
  for (std::size_t c = 0; c < 3; ++c) prod[c] = e2_raw[c] * e3_raw[c];

  Tensor<T> target({1, 3});
  for (std::size_t c = 0; c < 3; ++c) target[c] = static_cast<T>(gt[c]);
  const auto l1 = nn::euclidean_loss(row(e1_raw), target);
  const auto l2 = nn::euclidean_loss(row(e2_raw), target);
  const auto l3 = nn::euclidean_loss(row(prod), target);
  out.loss = l1.loss + l2.loss + l3.loss;

  append<T>(out.routing, model.central_stream().routing_signature(t_central));
  if (two_streams) append<T>(out.routing, model.surround_stream().routing_signature(t_surround));
  append<T>(out.routing, model.context_head().routing_signature(t_head));
  for (std::size_t c = 0; c < 3; ++c) out.routing.push_back(clamped[c] ? 1 : 0);
  out.routing.push_back(est1.degenerate ? 1 : 0);
  append<T>(out.routing, model.refine_trunk().routing_signature(t_trunk));
  append<T>(out.routing, model.refine_head().routing_signature(t_e2));
  append<T>(out.routing, model.intermediate_head().routing_signature(t_e3));

  const nn::GradSink<T> none = [](nn::Parameter<T>&) -> Tensor<T>* { return nullptr; };
  const nn::GradSink<T>& s = sink ? *sink : none;

  Tensor<T> g_e2({3}), g_e3({3});
  for (std::size_t c = 0; c < 3; ++c) {
    g_e2[c] = l2.grad[c] + l3.grad[c] * e3_raw[c];
    g_e3[c] = l3.grad[c] * e2_raw[c];
  }
  Tensor<T> g_f = model.refine_head().backward(t_e2, g_e2, s);
  const Tensor<T> g_f3 = model.intermediate_head().backward(t_e3, g_e3, s);
  for (std::size_t i = 0; i < g_f.size(); ++i) g_f[i] += g_f3[i];
  auto [g_pc, g_p1] = split(model.refine_trunk().backward(t_trunk, g_f, s));

  // Through the correction: pc directly, and e1 via the gains.
  Tensor<T> g_e1({3});
  for (std::size_t c = 0; c < 3; ++c) g_e1[c] = l1.grad[c];
  color::Rgb g_gain{};
  for (std::size_t c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      g_pc[c * plane + i] += static_cast<T>(g_p1[c * plane + i] * gain[c]);
      acc += static_cast<double>(g_p1[c * plane + i]) * static_cast<double>(pc[c * plane + i]);
    }
    g_gain[c] = acc;
  }
  if (!est1.degenerate) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (clamped[j]) continue;
      double d = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        double dg = ce[j] / (norm * sqrt3 * ce[c]);
        if (c == j) dg -= norm / (sqrt3 * ce[c] * ce[c]);
        d += g_gain[c] * dg;
      }
      g_e1[j] += static_cast<T>(d);
    }
  }

  const Tensor<T> g_fused = model.context_head().backward(t_head, g_e1, s);
  if (variant == Variant::two_channel) {
    auto [a, b] = split(model.central_stream().backward(t_central, g_fused, s));
    for (std::size_t i = 0; i < a.size(); ++i) g_pc[i] += a[i];
    out.grad_ps = std::move(b);
  } else if (!two_streams) {
    const Tensor<T> a = model.central_stream().backward(t_central, g_fused, s);
    for (std::size_t i = 0; i < a.size(); ++i) g_pc[i] += a[i];
    out.grad_ps = Tensor<T>(ps.shape());
  } else {
    const Tensor<T>& fc = t_central.output;
    const Tensor<T>& fs = t_surround.output;
    auto g = nn::layer_backward_into<T>(model.fusion(), {}, {&fc, &fs}, g_fused, {});
    const Tensor<T> a = model.central_stream().backward(t_central, g[0], s);
    for (std::size_t i = 0; i < a.size(); ++i) g_pc[i] += a[i];
    out.grad_ps = model.surround_stream().backward(t_surround, g[1], s);
  }
  out.grad_pc = std::move(g_pc);
  return out;
}

#define ILLUMKIT_INSTANTIATE(T)                                                                                \
  template color::Rgb to_rgb<T>(const Tensor<T>&);                                                            \
  template Tensor<T> correct_or_pass<T>(const FinalEstimate&, const Tensor<T>&);                              \
  template Tensor<T> context_features<T>(const Model<T>&, const Tensor<T>&, const Tensor<T>&);                \
  template ContextualResult<T> contextual_forward<T>(const Model<T>&, const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> refinement_features<T>(const Model<T>&, const Tensor<T>&, const Tensor<T>&);             \
  template RefinementResult<T> refinement_forward<T>(const Model<T>&, const Tensor<T>&, const Tensor<T>&);    \
  template FinalEstimate estimate_patch<T>(const Model<T>&, const Tensor<T>&, const Tensor<T>&, Output);      \
  template PipelineLoss<T> pipeline_loss<T>(const Model<T>&, const Tensor<T>&, const Tensor<T>&,              \
                                            const color::Rgb&, const nn::GradSink<T>*);

ILLUMKIT_INSTANTIATE(float)
ILLUMKIT_INSTANTIATE(double)

#undef ILLUMKIT_INSTANTIATE

}  // namespace illumkit::nets
