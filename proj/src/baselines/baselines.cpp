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

#include "illumkit/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace illumkit::baselines {

namespace {

// One channel plane in double precision with a validity map.
struct Plane {
  std::size_t w = 0, h = 0;
  std::vector<double> v;
  std::vector<std::uint8_t> ok;

  double at(std::size_t x, std::size_t y) const { return v[y * w + x]; }
  bool valid(long x, long y) const {
    return x >= 0 && y >= 0 && x < static_cast<long>(w) && y < static_cast<long>(h) &&
           ok[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  }
};

Plane channel(const color::LinearImage& img, std::size_t c) {
  Plane p{img.width(), img.height(), std::vector<double>(img.pixel_count()), std::vector<std::uint8_t>(img.pixel_count())};
  for (std::size_t y = 0; y < p.h; ++y) {
    for (std::size_t x = 0; x < p.w; ++x) {
      p.v[y * p.w + x] = img.at(x, y, c);
      p.ok[y * p.w + x] = img.masked(x, y) ? 0 : 1;
    }
  }
  return p;
}

// Normalized convolution: a Gaussian-weighted mean over valid neighbours only.
Plane smooth(const Plane& in, double sigma) {
  if (sigma <= 0.0) return in;
  const long r = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  for (long i = -r; i <= r; ++i) k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * double(i * i) / (sigma * sigma));

  const std::size_t n = in.w * in.h;
  std::vector<double> num(n), den(n);
  for (std::size_t i = 0; i < n; ++i) {
    num[i] = in.ok[i] ? in.v[i] : 0.0;
    den[i] = in.ok[i] ? 1.0 : 0.0;
  }
  const auto pass = [&](bool horizontal) {
    std::vector<double> nn(n, 0.0), dd(n, 0.0);
    for (long y = 0; y < static_cast<long>(in.h); ++y) {
      for (long x = 0; x < static_cast<long>(in.w); ++x) {
        double a = 0.0, b = 0.0;
        for (long i = -r; i <= r; ++i) {
          const long xx = horizontal ? x + i : x;
          const long yy = horizontal ? y : y + i;
          if (xx < 0 || yy < 0 || xx >= static_cast<long>(in.w) || yy >= static_cast<long>(in.h)) continue;
          const std::size_t j = static_cast<std::size_t>(yy) * in.w + static_cast<std::size_t>(xx);
          const double kw = k[static_cast<std::size_t>(i + r)];
          a += kw * num[j];
          b += kw * den[j];
        }
        const std::size_t o = static_cast<std::size_t>(y) * in.w + static_cast<std::size_t>(x);
        nn[o] = a;
        dd[o] = b;
      }
    }
    num.swap(nn);
    den.swap(dd);
  };
  pass(true);
  pass(false);
  Plane out = in;
  for (std::size_t i = 0; i < n; ++i) out.v[i] = in.ok[i] && den[i] > 0.0 ? num[i] / den[i] : 0.0;
  return out;
}

// Derivative magnitudes at pixels whose whole stencil is valid.
std::vector<double> edge_magnitudes(const Plane& p, int order) {
  std::vector<double> out;
  for (long y = 0; y < static_cast<long>(p.h); ++y) {
    for (long x = 0; x < static_cast<long>(p.w); ++x) {
      const auto f = [&](long dx, long dy) {
        return p.at(static_cast<std::size_t>(x + dx), static_cast<std::size_t>(y + dy));
      };
      if (order == 1) {
        if (!(p.valid(x, y) && p.valid(x - 1, y) && p.valid(x + 1, y) && p.valid(x, y - 1) && p.valid(x, y + 1))) {
          continue;
        }
        const double fx = 0.5 * (f(1, 0) - f(-1, 0));
        const double fy = 0.5 * (f(0, 1) - f(0, -1));
        out.push_back(std::sqrt(fx * fx + fy * fy));
      } else {
        bool all = true;
        for (long dy = -1; dy <= 1 && all; ++dy) {
          for (long dx = -1; dx <= 1 && all; ++dx) all = p.valid(x + dx, y + dy);
        }
        if (!all) continue;
        const double fxx = f(1, 0) - 2.0 * f(0, 0) + f(-1, 0);
        const double fyy = f(0, 1) - 2.0 * f(0, 0) + f(0, -1);
        const double fxy = 0.25 * (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1));
        out.push_back(std::sqrt(fxx * fxx + 4.0 * fxy * fxy + fyy * fyy));
      }
    }
  }
  return out;
}

std::vector<double> valid_values(const Plane& p) {
  std::vector<double> out;
  out.reserve(p.v.size());
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    if (p.ok[i]) out.push_back(p.v[i]);
  }
  return out;
}

// (mean |v|^p)^(1/p), evaluated relative to the largest value to stay finite for large p.
double minkowski(const std::vector<double>& v, double p) {
  if (v.empty()) return 0.0;
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / m, p);
  return m * std::pow(s / static_cast<double>(v.size()), 1.0 / p);
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::gray_world: return "gray_world";
    case Method::white_patch: return "white_patch";
    case Method::shades_of_gray: return "shades_of_gray";
    case Method::gray_edge: return "gray_edge";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::gray_world, Method::white_patch, Method::shades_of_gray, Method::gray_edge}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown baseline method '" + std::string(text) + "'");
}

BaselineSpec BaselineSpec::defaults(Method m) {
  BaselineSpec s;
  s.method = m;
  if (m == Method::gray_world) s.minkowski_p = 1.0;
  if (m == Method::gray_edge) s.smoothing_sigma = 1.0;
  return s;
}

void BaselineSpec::validate() const {
  if (!(minkowski_p >= 1.0) || !std::isfinite(minkowski_p)) throw ConfigError("minkowski_p must be >= 1");
  if (!(smoothing_sigma >= 0.0) || !std::isfinite(smoothing_sigma)) throw ConfigError("smoothing_sigma must be >= 0");
  if (derivative_order != 1 && derivative_order != 2) throw ConfigError("derivative_order must be 1 or 2");
}

color::Illuminant estimate_baseline(const BaselineSpec& spec, const color::LinearImage& image) {
  spec.validate();
  if (image.valid_count() == 0) throw DataError("baseline needs at least one unmasked pixel");
  color::Rgb stat{};
  for (std::size_t c = 0; c < 3; ++c) {
    const Plane raw = channel(image, c);
    switch (spec.method) {
      case Method::gray_world: stat[c] = minkowski(valid_values(raw), 1.0); break;
      case Method::white_patch: {
        const auto v = valid_values(raw);
        stat[c] = *std::max_element(v.begin(), v.end());
        break;
      }
      case Method::shades_of_gray:
        stat[c] = minkowski(valid_values(smooth(raw, spec.smoothing_sigma)), spec.minkowski_p);
        break;
      case Method::gray_edge:
        stat[c] = minkowski(edge_magnitudes(smooth(raw, spec.smoothing_sigma), spec.derivative_order), spec.minkowski_p);
        break;
    }
  }
  return color::normalize_illuminant(stat);
}

}  // namespace illumkit::baselines
