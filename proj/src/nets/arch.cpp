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

#include "illumkit/nets/arch.hpp"

#include <charconv>
#include <map>

#include "illumkit/error.hpp"

namespace illumkit::nets {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::central_only: return "central_only";
    case Variant::two_channel: return "two_channel";
    case Variant::siamese: return "siamese";
    case Variant::pseudo_siamese: return "pseudo_siamese";
    case Variant::contextual: return "contextual";
  }
  return "unknown";
}

Variant parse_variant(std::string_view text) {
  for (auto v : {Variant::central_only, Variant::two_channel, Variant::siamese, Variant::pseudo_siamese,
                 Variant::contextual}) {
    if (text == to_string(v)) return v;
  }
  throw ConfigError("unknown architecture variant '" + std::string(text) + "'");
}

void ArchConfig::validate() const {
  if (backbone.empty()) throw ConfigError("backbone needs at least one conv block");
  if (convs_per_block == 0) throw ConfigError("convs_per_block must be at least 1");
  if (kernel == 0 || kernel % 2 == 0) throw ConfigError("kernel must be odd");
  if (head.empty() || head.back() != 3) throw ConfigError("the final head layer must have exactly 3 units");
  for (auto c : backbone) {
    if (c == 0) throw ConfigError("backbone channel counts must be positive");
  }
  for (auto u : head) {
    if (u == 0) throw ConfigError("head widths must be positive");
  }
  const std::size_t reduction = std::size_t{1} << backbone.size();
  if (input_size == 0 || input_size % reduction != 0) {
    throw ConfigError("input_size " + std::to_string(input_size) + " must be divisible by " +
                      std::to_string(reduction) + " for " + std::to_string(backbone.size()) + " pooling stages");
  }
}

std::size_t ArchConfig::feature_extent() const { return input_size >> backbone.size(); }

std::size_t ArchConfig::feature_size() const {
  const std::size_t e = feature_extent();
  return backbone.back() * e * e;
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::size_t to_size(std::string_view s, std::string_view key) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("architecture key '" + std::string(key) + "' has invalid value '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::size_t> to_list(std::string_view s, std::string_view key) {
  std::vector<std::size_t> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    out.push_back(to_size(s.substr(0, comma), key));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

bool to_bool(std::string_view s, std::string_view key) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ConfigError("architecture key '" + std::string(key) + "' must be 0 or 1");
}

}  // namespace

std::string ArchConfig::serialize() const {
  return "variant=" + std::string(to_string(variant)) + ";backbone=" + join(backbone) +
         ";convs_per_block=" + std::to_string(convs_per_block) + ";kernel=" + std::to_string(kernel) +
         ";head=" + join(head) + ";input_size=" + std::to_string(input_size) +
         ";refinement=" + (refinement ? "1" : "0") + ";stream_heads=" + (stream_heads ? "1" : "0");
}

ArchConfig ArchConfig::parse(std::string_view text) {
  ArchConfig cfg;
  std::map<std::string, std::string, std::less<>> kv;
  while (!text.empty()) {
    const auto semi = text.find(';');
    const auto item = text.substr(0, semi);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("malformed architecture item '" + std::string(item) + "'");
    kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (semi == std::string_view::npos) break;
    text.remove_prefix(semi + 1);
  }
  for (const auto& [key, value] : kv) {
    if (key == "variant") cfg.variant = parse_variant(value);
    else if (key == "backbone") cfg.backbone = to_list(value, key);
    else if (key == "convs_per_block") cfg.convs_per_block = to_size(value, key);
    else if (key == "kernel") cfg.kernel = to_size(value, key);
    else if (key == "head") cfg.head = to_list(value, key);
    else if (key == "input_size") cfg.input_size = to_size(value, key);
    else if (key == "refinement") cfg.refinement = to_bool(value, key);
    else if (key == "stream_heads") cfg.stream_heads = to_bool(value, key);
    else throw ConfigError("unknown architecture key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace illumkit::nets
