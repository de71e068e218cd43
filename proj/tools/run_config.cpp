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

#include "run_config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <sstream>

namespace illumkit::cli {

namespace {

template <typename T>
std::string show(const T& v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

template <typename T>
std::string show_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + show(v[i]);
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

double to_real(const std::string& name, const std::string& text) {
  std::size_t used = 0;
  try {
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(name + ": expected a number, got '" + text + "'");
}

std::uint64_t to_u64(const std::string& name, const std::string& text) {
  std::size_t used = 0;
  try {
    if (!text.empty() && text[0] != '-') {
      const unsigned long long v = std::stoull(text, &used);
      if (used == text.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(name + ": expected a nonnegative integer, got '" + text + "'");
}

}  // namespace

std::string Key::flag() const {
  std::string f = name;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

void RunConfig::load_ini(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config " + path.string() + ": key '" + section + "' is outside any section");
    for (const auto& [name, node] : body) {
      const auto it = std::find_if(schema_.begin(), schema_.end(),
                                   [&](const Key& k) { return k.section == section && k.name == name; });
      if (it == schema_.end()) {
        throw ConfigError("config " + path.string() + ": unknown key '" + section + "." + name + "'");
      }
      values_[name] = trim(node.get_value<std::string>());
    }
  }
}

const Key& RunConfig::key(const std::string& name) const {
  const auto it = std::find_if(schema_.begin(), schema_.end(), [&](const Key& k) { return k.name == name; });
  if (it == schema_.end()) throw ConfigError("unknown setting '" + name + "'");
  return *it;
}

void RunConfig::set(const std::string& name, const std::string& value) {
  key(name);
  values_[name] = trim(value);
}

std::optional<std::string> RunConfig::value(const std::string& name) const {
  key(name);
  const auto it = values_.find(name);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get(const std::string& name) const { return value(name).value_or(key(name).default_value); }

double RunConfig::real(const std::string& name) const { return to_real(name, get(name)); }
std::size_t RunConfig::count(const std::string& name) const { return static_cast<std::size_t>(u64(name)); }
std::uint64_t RunConfig::u64(const std::string& name) const { return to_u64(name, get(name)); }

bool RunConfig::boolean(const std::string& name) const {
  std::string v = get(name);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(name + ": expected a boolean, got '" + v + "'");
}

std::vector<double> RunConfig::reals(const std::string& name) const {
  std::vector<double> out;
  for (const auto& s : split(get(name))) out.push_back(to_real(name, s));
  return out;
}

std::vector<std::size_t> RunConfig::counts(const std::string& name) const {
  std::vector<std::size_t> out;
  for (const auto& s : split(get(name))) out.push_back(static_cast<std::size_t>(to_u64(name, s)));
  return out;
}

std::vector<Key> synth_schema() {
  const io::SyntheticSceneSpec d;
  return {
      {"synth", "width", show(d.width), "scene width in pixels"},
      {"synth", "height", show(d.height), "scene height in pixels"},
      {"synth", "num_regions", show(d.num_regions), "piecewise-constant reflectance regions"},
      {"synth", "reflectance_min", show(d.reflectance_min), "lowest reflectance per channel"},
      {"synth", "reflectance_max", show(d.reflectance_max), "highest reflectance per channel"},
      {"synth", "achromatic_fraction", show(d.achromatic_fraction), "share of gray regions"},
      {"synth", "max_saturation", show(d.max_saturation), "largest relative chroma of colored regions"},
      {"synth", "illuminant_min", show(d.illuminant_min), "lowest illuminant component before normalization"},
      {"synth", "illuminant_max", show(d.illuminant_max), "highest illuminant component before normalization"},
      {"synth", "noise_std", show(d.noise_std), "Gaussian pixel noise added after rendering"},
      {"synth", "balanced_fraction", show(d.balanced_fraction), "share of gray-world-balanced scenes"},
      {"synth", "chart", d.chart ? "true" : "false", "add a masked color chart"},
      {"synth", "seed", show(d.seed), "generator seed"},
  };
}

std::vector<Key> sampler_schema() {
  const auto d = training::TrainConfig::desk_profile().sampler;
  return {
      {"sampler", "patch_size", show(d.patch_size), "central patch size S"},
      {"sampler", "num_patches", show(d.num_patches), "patches per image M"},
      {"sampler", "d_schedule", show_list(d.d_schedule), "ascending bright/dark percentages"},
      {"sampler", "max_attempts_per_d", show(d.max_attempts_per_d), "window draws per percentage (0 = 10 M)"},
      {"sampler", "mode", std::string(sampling::to_string(d.mode)), "bright_dark or random"},
      {"sampler", "sampler_seed", show(d.seed), "sampling seed"},
      {"sampler", "gamma_inputs", d.gamma_inputs ? "true" : "false", "feed gamma-encoded patches"},
  };
}

std::vector<Key> train_schema() {
  const auto d = training::TrainConfig::desk_profile();
  std::vector<Key> keys{
      {"train", "profile", "desk", "base settings: desk or paper"},
      {"train", "batch_size", show(d.batch_size), "samples per SGD step"},
      {"train", "max_steps", show(d.max_steps), "steps per stage"},
      {"train", "eval_every", show(d.eval_every), "progress report period in steps (0 = off)"},
      {"train", "seed", show(d.seed), "initialization and batch-order seed"},
      {"train", "manifest", "", "dataset manifest CSV"},
      {"train", "folds", "3", "cross-validation folds"},
      {"train", "fold_seed", "0", "fold shuffle seed"},
      {"train", "holdout_fold", "0", "fold excluded from training, or none"},
      {"sgd", "base_lr", show(d.sgd.base_lr), "initial learning rate"},
      {"sgd", "momentum", show(d.sgd.momentum), "SGD momentum"},
      {"sgd", "weight_decay", show(d.sgd.weight_decay), "L2 weight decay"},
      {"sgd", "lr_decay_factor", show(d.sgd.lr_decay_factor), "learning-rate decay factor"},
      {"sgd", "lr_decay_every", show(d.sgd.lr_decay_every), "steps between decays"},
      {"arch", "variant", std::string(nets::to_string(d.arch.variant)),
       "contextual, pseudo_siamese, siamese, two_channel or central_only"},
      {"arch", "backbone", show_list(d.arch.backbone), "channels per conv block"},
      {"arch", "convs_per_block", show(d.arch.convs_per_block), "convolutions per block"},
      {"arch", "kernel", show(d.arch.kernel), "odd convolution kernel size"},
      {"arch", "head", show_list(d.arch.head), "fully connected widths, ending in 3"},
      {"arch", "refinement", d.arch.refinement ? "true" : "false", "include the refinement network"},
      {"arch", "stream_heads", d.arch.stream_heads ? "true" : "false", "per-stream pretraining heads"},
  };
  for (auto& k : sampler_schema()) keys.push_back(std::move(k));
  return keys;
}

io::SyntheticSceneSpec synth_spec(const RunConfig& cfg) {
  io::SyntheticSceneSpec s;
  const auto has = [&](const char* n) { return cfg.value(n).has_value(); };
  if (has("width")) s.width = cfg.count("width");
  if (has("height")) s.height = cfg.count("height");
  if (has("num_regions")) s.num_regions = cfg.count("num_regions");
  if (has("reflectance_min")) s.reflectance_min = cfg.real("reflectance_min");
  if (has("reflectance_max")) s.reflectance_max = cfg.real("reflectance_max");
  if (has("achromatic_fraction")) s.achromatic_fraction = cfg.real("achromatic_fraction");
  if (has("max_saturation")) s.max_saturation = cfg.real("max_saturation");
  if (has("illuminant_min")) s.illuminant_min = cfg.real("illuminant_min");
  if (has("illuminant_max")) s.illuminant_max = cfg.real("illuminant_max");
  if (has("noise_std")) s.noise_std = cfg.real("noise_std");
  if (has("balanced_fraction")) s.balanced_fraction = cfg.real("balanced_fraction");
  if (has("chart")) s.chart = cfg.boolean("chart");
  if (has("seed")) s.seed = cfg.u64("seed");
  s.validate();
  return s;
}

namespace {

void apply_sampler(const RunConfig& cfg, sampling::SamplerConfig& s) {
  const auto has = [&](const char* n) { return cfg.value(n).has_value(); };
  if (has("patch_size")) s.patch_size = cfg.count("patch_size");
  if (has("num_patches")) s.num_patches = cfg.count("num_patches");
  if (has("d_schedule")) s.d_schedule = cfg.reals("d_schedule");
  if (has("max_attempts_per_d")) s.max_attempts_per_d = cfg.count("max_attempts_per_d");
  if (has("mode")) s.mode = sampling::parse_sampling_mode(cfg.get("mode"));
  if (has("sampler_seed")) s.seed = cfg.u64("sampler_seed");
  if (has("gamma_inputs")) s.gamma_inputs = cfg.boolean("gamma_inputs");
}

}  // namespace

sampling::SamplerConfig sampler_config(const RunConfig& cfg) {
  sampling::SamplerConfig s = training::TrainConfig::desk_profile().sampler;
  apply_sampler(cfg, s);
  s.validate();
  return s;
}

training::TrainConfig train_config(const RunConfig& cfg) {
  const std::string profile = cfg.get("profile");
  training::TrainConfig t;
  if (profile == "desk") {
    t = training::TrainConfig::desk_profile();
  } else if (profile == "paper") {
    t = training::TrainConfig::paper_profile();
  } else {
    throw ConfigError("profile: expected desk or paper, got '" + profile + "'");
  }
  const auto has = [&](const char* n) { return cfg.value(n).has_value(); };
  if (has("batch_size")) t.batch_size = cfg.count("batch_size");
  if (has("max_steps")) t.max_steps = cfg.count("max_steps");
  if (has("eval_every")) t.eval_every = cfg.count("eval_every");
  if (has("seed")) t.seed = cfg.u64("seed");
  if (has("base_lr")) t.sgd.base_lr = cfg.real("base_lr");
  if (has("momentum")) t.sgd.momentum = cfg.real("momentum");
  if (has("weight_decay")) t.sgd.weight_decay = cfg.real("weight_decay");
  if (has("lr_decay_factor")) t.sgd.lr_decay_factor = cfg.real("lr_decay_factor");
  if (has("lr_decay_every")) t.sgd.lr_decay_every = cfg.u64("lr_decay_every");
  if (has("variant")) t.arch.variant = nets::parse_variant(cfg.get("variant"));
  if (has("backbone")) t.arch.backbone = cfg.counts("backbone");
  if (has("convs_per_block")) t.arch.convs_per_block = cfg.count("convs_per_block");
  if (has("kernel")) t.arch.kernel = cfg.count("kernel");
  if (has("head")) t.arch.head = cfg.counts("head");
  if (has("refinement")) t.arch.refinement = cfg.boolean("refinement");
  if (has("stream_heads")) t.arch.stream_heads = cfg.boolean("stream_heads");
  apply_sampler(cfg, t.sampler);
  t.arch.input_size = t.sampler.patch_size;
  t.validate();
  return t;
}

}  // namespace illumkit::cli
