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

#include "illumkit/io/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "illumkit/common/random.hpp"
#include "illumkit/io/image_io.hpp"

namespace illumkit::io {

void SyntheticSceneSpec::validate() const {
  if (width < 16 || height < 16) throw ConfigError("synthetic scenes must be at least 16x16");
  if (num_regions < 2) throw ConfigError("num_regions must be at least 2");
  if (!(reflectance_min > 0.0 && reflectance_min < reflectance_max && reflectance_max <= 1.0)) {
    throw ConfigError("reflectance bounds must satisfy 0 < min < max <= 1");
  }
  if (!(achromatic_fraction >= 0.0 && achromatic_fraction <= 1.0)) {
    throw ConfigError("achromatic_fraction must lie in [0, 1]");
  }
  if (!(max_saturation >= 0.0 && max_saturation <= 1.0)) throw ConfigError("max_saturation must lie in [0, 1]");
  if (!(illuminant_min > 0.0 && illuminant_min <= illuminant_max)) {
    throw ConfigError("illuminant range must satisfy 0 < min <= max");
  }
  const double worst = illuminant_min / std::sqrt(illuminant_min * illuminant_min + 2.0 * illuminant_max * illuminant_max);
  if (worst <= 0.1) throw ConfigError("illuminant range allows normalized components <= 0.1");
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be nonnegative");
  if (!(balanced_fraction >= 0.0 && balanced_fraction <= 1.0)) {
    throw ConfigError("balanced_fraction must lie in [0, 1]");
  }
}

bool scene_is_balanced(const SyntheticSceneSpec& spec, std::size_t index) {
  const double f = spec.balanced_fraction;
  return std::floor(static_cast<double>(index + 1) * f) > std::floor(static_cast<double>(index) * f);
}

namespace {

color::Rgb draw_reflectance(const SyntheticSceneSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double level = spec.reflectance_min + unit(rng) * (spec.reflectance_max - spec.reflectance_min);
  if (unit(rng) < spec.achromatic_fraction) return {level, level, level};
  // Zero-sum chroma direction scaled to a unit peak.
  color::Rgb u{unit(rng) * 2 - 1, unit(rng) * 2 - 1, unit(rng) * 2 - 1};
  const double mean = (u[0] + u[1] + u[2]) / 3.0;
  double peak = 0.0;
  for (auto& v : u) {
    v -= mean;
    peak = std::max(peak, std::abs(v));
  }
  const double sat = unit(rng) * spec.max_saturation;
  color::Rgb r{};
  for (std::size_t c = 0; c < 3; ++c) {
    const double dir = peak > 0.0 ? u[c] / peak : 0.0;
    r[c] = std::clamp(level * (1.0 + sat * dir), spec.reflectance_min, spec.reflectance_max);
  }
  return r;
}

}  // namespace

SyntheticScene generate_scene(const SyntheticSceneSpec& spec, std::size_t index) {
  spec.validate();
  std::mt19937_64 rng(mix_seed(spec.seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t w = spec.width, h = spec.height;

  SyntheticScene scene;
  scene.balanced = scene_is_balanced(spec, index);

  // Draws until the mosaic has some luminance spread, so bright and dark
  // pixels exist.
  for (int attempt = 0;; ++attempt) {
    std::vector<std::pair<double, double>> seeds(spec.num_regions);
    std::vector<color::Rgb> refl(spec.num_regions);
    for (std::size_t r = 0; r < spec.num_regions; ++r) {
      seeds[r] = {unit(rng) * static_cast<double>(w), unit(rng) * static_cast<double>(h)};
      refl[r] = draw_reflectance(spec, rng);
    }
    scene.canonical = color::LinearImage(w, h);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t r = 0; r < spec.num_regions; ++r) {
          const double dx = static_cast<double>(x) + 0.5 - seeds[r].first;
          const double dy = static_cast<double>(y) + 0.5 - seeds[r].second;
          const double d = dx * dx + dy * dy;
          if (d < best_d) {
            best_d = d;
            best = r;
          }
        }
        for (std::size_t c = 0; c < 3; ++c) scene.canonical.at(x, y, c) = static_cast<float>(refl[best][c]);
      }
    }
    const float first = scene.canonical.pixels()[0];
    const bool spread = std::any_of(scene.canonical.pixels().begin(), scene.canonical.pixels().end(),
                                    [&](float v) { return v != first; });
    if (spread || attempt > 100) break;
  }

  std::vector<std::uint8_t> mask;
  if (spec.chart) {
    // A 6 x 4 grid of saturated squares in a random spot, masked out.
    const std::size_t cw = std::max<std::size_t>(6, w / 5), ch = std::max<std::size_t>(4, h / 6);
    const auto x0 = static_cast<std::size_t>(unit(rng) * static_cast<double>(w - cw));
    const auto y0 = static_cast<std::size_t>(unit(rng) * static_cast<double>(h - ch));
    mask.assign(w * h, 0);
    for (std::size_t y = y0; y < y0 + ch; ++y) {
      for (std::size_t x = x0; x < x0 + cw; ++x) {
        mask[y * w + x] = 1;
        const std::size_t cell = ((y - y0) * 4 / ch) * 6 + (x - x0) * 6 / cw;
        for (std::size_t c = 0; c < 3; ++c) {
          scene.canonical.at(x, y, c) = static_cast<float>(0.05 + 0.9 * (((cell + c * 7) * 37 % 11) / 10.0));
        }
      }
    }
    scene.canonical.set_mask(mask);
  }

  if (scene.balanced) {
    color::Rgb mean{};
    std::size_t count = 0;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (scene.canonical.masked(x, y)) continue;
        ++count;
        for (std::size_t c = 0; c < 3; ++c) mean[c] += scene.canonical.at(x, y, c);
      }
    }
    const double target = (mean[0] + mean[1] + mean[2]) / 3.0;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (scene.canonical.masked(x, y)) continue;
        for (std::size_t c = 0; c < 3; ++c) {
          scene.canonical.at(x, y, c) = static_cast<float>(scene.canonical.at(x, y, c) * target / mean[c]);
        }
      }
    }
  }

  color::Rgb e{};
  for (auto& v : e) v = spec.illuminant_min + unit(rng) * (spec.illuminant_max - spec.illuminant_min);
  scene.e = color::normalize_illuminant(e);
  scene.image = color::render_under_illuminant(scene.canonical, scene.e);
  if (spec.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (auto& v : scene.image.pixels()) v = static_cast<float>(std::max(0.0, static_cast<double>(v) + noise(rng)));
  }
  return scene;
}

DatasetManifest generate_synthetic(const SyntheticSceneSpec& spec, std::size_t n,
                                   const std::filesystem::path& out_dir) {
  spec.validate();
  if (n == 0) throw ConfigError("scene count must be at least 1");
  std::filesystem::create_directories(out_dir);
  DatasetManifest m;
  m.base_dir = out_dir;
  for (std::size_t i = 0; i < n; ++i) {
    const SyntheticScene s = generate_scene(spec, i);
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04zu", i);
    ManifestRecord r;
    r.image = std::string(name) + ".pfm";
    write_pfm(out_dir / r.image, s.image);
    if (s.image.has_mask()) {
      r.mask = std::string(name) + "_mask.pgm";
      write_mask(out_dir / *r.mask, s.image.mask(), s.image.width(), s.image.height());
    }
    r.gt = s.e;
    r.subset = s.balanced ? "balanced" : "free";
    m.records.push_back(std::move(r));
  }
  write_manifest(out_dir / "manifest.csv", m);
  return m;
}

}  // namespace illumkit::io
