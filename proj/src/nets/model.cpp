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

#include "illumkit/nets/model.hpp"

#include <cmath>
#include <random>

#include "illumkit/common/random.hpp"

namespace illumkit::nets {

using nn::LayerSpec;
using nn::ParamPtr;
using nn::Parameter;
using nn::Shape;
using nn::Tensor;

namespace {

template <typename T>
class Builder {
 public:
  Builder(std::map<std::string, ParamPtr<T>>& registry, std::uint64_t seed) : registry_(registry), seed_(seed) {}

  // Returns the registered parameter, creating it with N(0, stddev^2) values
  // (zeros when stddev == 0) on first use.
  ParamPtr<T> param(const std::string& name, const Shape& shape, double stddev) {
    if (auto it = registry_.find(name); it != registry_.end()) {
      if (it->second->value.shape() != shape) throw ShapeError("parameter '" + name + "' reused with a new shape");
      return it->second;
    }
    Tensor<T> value(shape);
    if (stddev > 0.0) {
      std::mt19937_64 rng(mix_seed(seed_, fnv1a(name)));
      std::normal_distribution<double> normal(0.0, stddev);
      for (auto& v : value.data()) v = static_cast<T>(normal(rng));
    }
    auto p = std::make_shared<Parameter<T>>(std::move(value));
    registry_.emplace(name, p);
    return p;
  }

  void conv_stream(nn::Sequential<T>& chain, const std::string& prefix, std::size_t in_channels,
                   const ArchConfig& arch) {
    std::size_t channels = in_channels;
    for (std::size_t b = 0; b < arch.backbone.size(); ++b) {
      for (std::size_t i = 0; i < arch.convs_per_block; ++i) {
        const std::string id = std::to_string(b + 1) + "_" + std::to_string(i + 1);
        auto spec = LayerSpec::conv2d(prefix + ".conv" + id, channels, arch.backbone[b], arch.kernel, 1, arch.kernel / 2);
        const auto shapes = spec.parameter_shapes();
        const double fan_in = static_cast<double>(channels * arch.kernel * arch.kernel);
        auto w = param(spec.name + ".weight", shapes[0], std::sqrt(2.0 / fan_in));
        auto bias = param(spec.name + ".bias", shapes[1], 0.0);
        chain.add(std::move(spec), {w, bias});
        chain.add(LayerSpec::relu(prefix + ".relu" + id));
        channels = arch.backbone[b];
      }
      chain.add(LayerSpec::maxpool2x2(prefix + ".pool" + std::to_string(b + 1)));
    }
  }

  // flatten + fc(-relu-fc)*; names prefix.fc{6+j}{suffix}
  void head(nn::Sequential<T>& chain, const std::string& prefix, const std::string& suffix, std::size_t in_units,
            const ArchConfig& arch) {
    chain.add(LayerSpec::flatten(prefix + ".flatten" + suffix));
    std::size_t units = in_units;
    for (std::size_t j = 0; j < arch.head.size(); ++j) {
      const bool last = j + 1 == arch.head.size();
      auto spec = LayerSpec::fully_connected(prefix + ".fc" + std::to_string(6 + j) + suffix, units, arch.head[j]);
      const auto shapes = spec.parameter_shapes();
      const double stddev = last ? kOutputInitStd : std::sqrt(2.0 / static_cast<double>(units));
      auto w = param(spec.name + ".weight", shapes[0], stddev);
      auto bias = param(spec.name + ".bias", shapes[1], 0.0);
      chain.add(std::move(spec), {w, bias});
      if (!last) chain.add(LayerSpec::relu(prefix + ".relu" + std::to_string(6 + j) + suffix));
      units = arch.head[j];
    }
  }

 private:
  std::map<std::string, ParamPtr<T>>& registry_;
  std::uint64_t seed_;
};

}  // namespace

template <typename T>
const nn::Sequential<T>& Model<T>::stream_head(Stream s) const {
  const auto& chain = s == Stream::central ? aux_central_ : aux_surround_;
  if (chain.empty()) throw ConfigError("model was built without stream heads");
  return chain;
}

template <typename T>
std::vector<ParamPtr<T>> Model<T>::parameter_list() const {
  std::vector<ParamPtr<T>> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(p);
  return out;
}

template <typename T>
ParamPtr<T> Model<T>::find(const std::string& name) const {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second;
}

template <typename T>
std::size_t Model<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p->value.size();
  return n;
}

template <typename T>
void Model<T>::set_lr_mult(double mult) {
  for (auto& [name, p] : params_) p->lr_mult = mult;
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& [name, p] : params_) p->zero_grad();
}

template <typename T>
nn::Checkpoint Model<T>::to_checkpoint(const std::string& stage_id, std::uint64_t step) const {
  nn::Checkpoint ckpt;
  ckpt.stage_id = stage_id;
  ckpt.step = step;
  ckpt.arch = arch_.serialize();
  for (const auto& [name, p] : params_) {
    nn::CheckpointEntry e;
    e.name = name;
    e.shape = p->value.shape();
    e.lr_mult = static_cast<float>(p->lr_mult);
    e.value.assign(p->value.data().begin(), p->value.data().end());
    e.momentum.assign(p->momentum.data().begin(), p->momentum.data().end());
    ckpt.entries.push_back(std::move(e));
  }
  return ckpt;
}

template <typename T>
void Model<T>::load_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.entries.size() != params_.size()) {
    throw DataError("checkpoint holds " + std::to_string(ckpt.entries.size()) + " parameters, model expects " +
                    std::to_string(params_.size()));
  }
  for (const auto& e : ckpt.entries) {
    auto p = find(e.name);
    if (!p) throw DataError("checkpoint parameter '" + e.name + "' is not part of the model");
    if (p->value.shape() != e.shape) throw DataError("checkpoint parameter '" + e.name + "' has the wrong shape");
    std::copy(e.value.begin(), e.value.end(), p->value.data().begin());
    std::copy(e.momentum.begin(), e.momentum.end(), p->momentum.data().begin());
    p->lr_mult = e.lr_mult;
    p->zero_grad();
  }
}

template <typename T>
Model<T> Model<T>::clone() const {
  Model<T> copy = build_net<T>(arch_, 0);
  for (const auto& [name, p] : params_) {
    auto q = copy.find(name);
    q->value = p->value;
    q->momentum = p->momentum;
    q->grad = p->grad;
    q->lr_mult = p->lr_mult;
  }
  return copy;
}

template <typename T>
Model<T> build_net(const ArchConfig& arch, std::uint64_t seed) {
  arch.validate();
  Model<T> m;
  m.arch_ = arch;
  Builder<T> b(m.params_, seed);
  const std::size_t features = arch.feature_size();

  switch (arch.variant) {
    case Variant::central_only:
      b.conv_stream(m.central_, "ctx.central", 3, arch);
      b.head(m.context_head_, "ctx", "_1", features, arch);
      break;
    case Variant::two_channel:
      b.conv_stream(m.central_, "ctx.stacked", 6, arch);
      b.head(m.context_head_, "ctx", "_1", features, arch);
      break;
    case Variant::siamese:
      b.conv_stream(m.central_, "ctx.central", 3, arch);
      b.conv_stream(m.surround_, "ctx.central", 3, arch);
      m.fusion_ = LayerSpec::concat_channels("ctx.fusion");
      b.head(m.context_head_, "ctx", "_1", 2 * features, arch);
      break;
    case Variant::pseudo_siamese:
      b.conv_stream(m.central_, "ctx.central", 3, arch);
      b.conv_stream(m.surround_, "ctx.surround", 3, arch);
      m.fusion_ = LayerSpec::concat_channels("ctx.fusion");
      b.head(m.context_head_, "ctx", "_1", 2 * features, arch);
      break;
    case Variant::contextual:
      b.conv_stream(m.central_, "ctx.central", 3, arch);
      b.conv_stream(m.surround_, "ctx.surround", 3, arch);
      m.fusion_ = LayerSpec::eltwise_sum("ctx.fusion");
      b.head(m.context_head_, "ctx", "_1", features, arch);
      break;
  }

  if (arch.stream_heads) {
    b.head(m.aux_central_, "aux.central", "", features, arch);
    if (m.has_surround()) b.head(m.aux_surround_, "aux.surround", "", features, arch);
  }

  if (arch.refinement) {
    m.stack_ = LayerSpec::concat_channels("ref.stack");
    b.conv_stream(m.refine_trunk_, "ref", 6, arch);
    b.head(m.refine_head_, "ref", "_2", features, arch);
    b.head(m.intermediate_head_, "ref", "_3", features, arch);
  }
  return m;
}

template <typename T>
Model<T> model_from_checkpoint(const nn::Checkpoint& ckpt) {
  Model<T> m = build_net<T>(ArchConfig::parse(ckpt.arch), 0);
  m.load_checkpoint(ckpt);
  return m;
}

template class Model<float>;
template class Model<double>;
template Model<float> build_net<float>(const ArchConfig&, std::uint64_t);
template Model<double> build_net<double>(const ArchConfig&, std::uint64_t);
template Model<float> model_from_checkpoint<float>(const nn::Checkpoint&);
template Model<double> model_from_checkpoint<double>(const nn::Checkpoint&);

}  // namespace illumkit::nets
