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

#include "illumkit/sampling/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace illumkit::sampling {

using color::LinearImage;

std::string_view to_string(SamplingMode mode) {
  return mode == SamplingMode::bright_dark ? "bright_dark" : "random";
}

SamplingMode parse_sampling_mode(std::string_view text) {
  if (text == "bright_dark") return SamplingMode::bright_dark;
  if (text == "random") return SamplingMode::random;
  throw ConfigError("unknown sampling mode '" + std::string(text) + "'");
}

PixelRanking rank_projections(const LinearImage& image) {
  PixelRanking r;
  r.width = image.width();
  r.height = image.height();
  r.valid_count = image.valid_count();
  if (r.valid_count == 0) throw DataError("rank_projections: every pixel is masked");

  double mean[3] = {0.0, 0.0, 0.0};
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      if (image.masked(x, y)) continue;
      for (int c = 0; c < 3; ++c) mean[c] += image.at(x, y, c);
    }
  }
  for (double& m : mean) m /= static_cast<double>(r.valid_count);
  const double norm = std::sqrt(mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]);
  if (norm < 1e-12) throw DataError("rank_projections: mean color vector vanishes (black image)");

  const double u[3] = {mean[0] / norm, mean[1] / norm, mean[2] / norm};
  r.projections.assign(image.pixel_count(), -std::numeric_limits<double>::infinity());
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      if (image.masked(x, y)) continue;
      r.projections[y * r.width + x] = image.at(x, y, 0) * u[0] + image.at(x, y, 1) * u[1] + image.at(x, y, 2) * u[2];
    }
  }
  return r;
}

void select_bright_dark(PixelRanking& ranking, double d_percent) {
  if (!(d_percent > 0.0 && d_percent < 50.0)) throw ConfigError("select_bright_dark: d must lie in (0, 50)");
  const std::size_t n = ranking.projections.size();
  std::vector<std::size_t> valid;
  valid.reserve(ranking.valid_count);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(ranking.projections[i])) valid.push_back(i);
  }
  const auto k = static_cast<std::size_t>(std::ceil(d_percent / 100.0 * static_cast<double>(valid.size())));
  ranking.k = std::min(k, valid.size());
  ranking.bright.assign(n, 0);
  ranking.dark.assign(n, 0);

  const auto& p = ranking.projections;
  auto brighter = [&](std::size_t a, std::size_t b) { return p[a] > p[b] || (p[a] == p[b] && a < b); };
  auto darker = [&](std::size_t a, std::size_t b) { return p[a] < p[b] || (p[a] == p[b] && a < b); };

  const auto mid = valid.begin() + static_cast<std::ptrdiff_t>(ranking.k);
  std::nth_element(valid.begin(), mid, valid.end(), brighter);
  for (auto it = valid.begin(); it != mid; ++it) ranking.bright[*it] = 1;
  std::nth_element(valid.begin(), mid, valid.end(), darker);
  for (auto it = valid.begin(); it != mid; ++it) ranking.dark[*it] = 1;
}

void SamplerConfig::validate() const {
  if (patch_size < 8) throw ConfigError("patch_size must be at least 8");
  if (num_patches < 1) throw ConfigError("num_patches must be at least 1");
  if (d_schedule.empty()) throw ConfigError("d_schedule must not be empty");
  for (std::size_t i = 0; i < d_schedule.size(); ++i) {
    if (!(d_schedule[i] > 0.0 && d_schedule[i] < 50.0)) throw ConfigError("d_schedule values must lie in (0, 50)");
    if (i > 0 && !(d_schedule[i] > d_schedule[i - 1])) throw ConfigError("d_schedule must be strictly ascending");
  }
}

namespace {

// Summed-area table for O(1) window counts.
class Integral {
 public:
  Integral(std::size_t w, std::size_t h, auto&& value) : w_(w), sums_((w + 1) * (h + 1), 0) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        sums_[(y + 1) * (w + 1) + x + 1] = static_cast<std::size_t>(value(x, y)) + sums_[y * (w + 1) + x + 1] +
                                           sums_[(y + 1) * (w + 1) + x] - sums_[y * (w + 1) + x];
      }
    }
  }
  std::size_t count(std::size_t x0, std::size_t y0, std::size_t s) const {
    const std::size_t x1 = x0 + s, y1 = y0 + s, W = w_ + 1;
    return sums_[y1 * W + x1] - sums_[y0 * W + x1] - sums_[y1 * W + x0] + sums_[y0 * W + x0];
  }

 private:
  std::size_t w_;
  std::vector<std::size_t> sums_;
};

struct WindowDraw {
  std::uniform_int_distribution<std::size_t> x0;
  std::uniform_int_distribution<std::size_t> y0;
};

}  // namespace

nn::Tensor<float> extract_central(const LinearImage& image, std::size_t cx, std::size_t cy, std::size_t s) {
  if (cx < s / 2 || cy < s / 2 || cx - s / 2 + s > image.width() || cy - s / 2 + s > image.height()) {
    throw DataError("central window out of bounds");
  }
  const std::size_t x0 = cx - s / 2, y0 = cy - s / 2;
  nn::Tensor<float> out({3, s, s});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < s; ++y) {
      for (std::size_t x = 0; x < s; ++x) out.at(c, y, x) = image.at(x0 + x, y0 + y, c);
    }
  }
  return out;
}

nn::Tensor<float> extract_surround(const LinearImage& image, std::size_t cx, std::size_t cy, std::size_t s) {
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto ox = static_cast<std::ptrdiff_t>(cx) - static_cast<std::ptrdiff_t>(s);
  const auto oy = static_cast<std::ptrdiff_t>(cy) - static_cast<std::ptrdiff_t>(s);
  auto sample = [&](std::ptrdiff_t x, std::ptrdiff_t y, std::size_t c) -> double {
    const auto xx = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x, 0, w - 1));
    const auto yy = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y, 0, h - 1));
    return image.masked(xx, yy) ? 0.0 : static_cast<double>(image.at(xx, yy, c));
  };
  nn::Tensor<float> out({3, s, s});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < s; ++y) {
      for (std::size_t x = 0; x < s; ++x) {
        const std::ptrdiff_t sx = ox + 2 * static_cast<std::ptrdiff_t>(x);
        const std::ptrdiff_t sy = oy + 2 * static_cast<std::ptrdiff_t>(y);
        const double sum = sample(sx, sy, c) + sample(sx + 1, sy, c) + sample(sx, sy + 1, c) + sample(sx + 1, sy + 1, c);
        out.at(c, y, x) = static_cast<float>(sum * 0.25);
      }
    }
  }
  return out;
}

SampleResult sample_patch_pairs(const LinearImage& image, const SamplerConfig& cfg) {
  cfg.validate();
  const std::size_t s = cfg.patch_size;
  if (image.width() < s || image.height() < s) {
    throw DataError("image " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                    " is smaller than the patch size " + std::to_string(s));
  }
  const LinearImage encoded = cfg.gamma_inputs ? color::gamma_encode(image) : image;
  const Integral masked(image.width(), image.height(), [&](std::size_t x, std::size_t y) { return image.masked(x, y); });

  std::mt19937_64 rng(cfg.seed);
  WindowDraw draw{std::uniform_int_distribution<std::size_t>(0, image.width() - s),
                  std::uniform_int_distribution<std::size_t>(0, image.height() - s)};

  SampleResult result;
  auto emit = [&](std::size_t x0, std::size_t y0, double d, SamplingMode mode) {
    PatchPair p;
    p.center_x = x0 + s / 2;
    p.center_y = y0 + s / 2;
    p.central = extract_central(encoded, p.center_x, p.center_y, s);
    p.surround = extract_surround(encoded, p.center_x, p.center_y, s);
    p.d_used = d;
    p.mode = mode;
    result.pairs.push_back(std::move(p));
  };

  if (cfg.mode == SamplingMode::bright_dark) {
    PixelRanking ranking = rank_projections(image);
    for (double d : cfg.d_schedule) {
      if (result.pairs.size() >= cfg.num_patches) break;
      select_bright_dark(ranking, d);
      const Integral bright(image.width(), image.height(),
                            [&](std::size_t x, std::size_t y) { return ranking.bright[y * image.width() + x]; });
      const Integral dark(image.width(), image.height(),
                          [&](std::size_t x, std::size_t y) { return ranking.dark[y * image.width() + x]; });
      for (std::size_t attempt = 0; attempt < cfg.attempts_per_d() && result.pairs.size() < cfg.num_patches;
           ++attempt) {
        const std::size_t x0 = draw.x0(rng), y0 = draw.y0(rng);
        if (masked.count(x0, y0, s) == 0 && bright.count(x0, y0, s) > 0 && dark.count(x0, y0, s) > 0) {
          emit(x0, y0, d, SamplingMode::bright_dark);
        }
      }
    }
    if (result.pairs.size() < cfg.num_patches) result.fell_back_to_random = true;
  }

  const std::size_t random_budget = cfg.attempts_per_d() * std::max<std::size_t>(1, cfg.d_schedule.size());
  for (std::size_t attempt = 0; attempt < random_budget && result.pairs.size() < cfg.num_patches; ++attempt) {
    const std::size_t x0 = draw.x0(rng), y0 = draw.y0(rng);
    if (masked.count(x0, y0, s) == 0) emit(x0, y0, 0.0, SamplingMode::random);
  }
  if (result.pairs.size() < cfg.num_patches) {
    throw DataError("sampling failed: only " + std::to_string(result.pairs.size()) + " of " +
                    std::to_string(cfg.num_patches) + " unmasked windows found");
  }
  return result;
}

}  // namespace illumkit::sampling
