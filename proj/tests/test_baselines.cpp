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

#include <doctest.h>

#include <random>

#include "illumkit/baselines/baselines.hpp"
#include "illumkit/io/synthetic.hpp"
#include "test_support.hpp"

using namespace illumkit;
using namespace illumkit::baselines;
using color::angular_error;

namespace {

constexpr Method kMethods[] = {Method::gray_world, Method::white_patch, Method::shades_of_gray, Method::gray_edge};

std::vector<BaselineSpec> all_specs() {
  std::vector<BaselineSpec> out;
  for (auto m : kMethods) out.push_back(BaselineSpec::defaults(m));
  auto second = BaselineSpec::defaults(Method::gray_edge);
  second.derivative_order = 2;
  out.push_back(second);
  auto smoothed = BaselineSpec::defaults(Method::shades_of_gray);
  smoothed.smoothing_sigma = 1.5;
  out.push_back(smoothed);
  return out;
}

color::LinearImage scaled(const color::LinearImage& img, float s) {
  auto out = img;
  for (auto& v : out.pixels()) v *= s;
  return out;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("defaults, parsing and validation") {
    CHECK(BaselineSpec::defaults(Method::shades_of_gray).minkowski_p == 6.0);
    CHECK(BaselineSpec::defaults(Method::gray_edge).smoothing_sigma == 1.0);
    for (auto m : kMethods) CHECK(parse_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_method("gamut"), ConfigError);
    BaselineSpec s;
    s.minkowski_p = 0.5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.smoothing_sigma = -1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.derivative_order = 3;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }

  TEST_CASE("gray world recovers the light of balanced scenes") {
    io::SyntheticSceneSpec spec;
    spec.balanced_fraction = 1.0;
    spec.seed = 5;
    for (std::size_t i = 0; i < 10; ++i) {
      const auto s = io::generate_scene(spec, i);
      REQUIRE(s.balanced);
      CHECK(angular_error(estimate_baseline({}, s.image).rgb, s.e.rgb) < 1e-4);
    }
  }

  TEST_CASE("uniform white image") {
    const color::LinearImage white(16, 16, 1.0f);
    const auto n = color::neutral_illuminant();
    for (auto m : {Method::gray_world, Method::white_patch, Method::shades_of_gray}) {
      CHECK(angular_error(estimate_baseline(BaselineSpec::defaults(m), white).rgb, n.rgb) < 1e-12);
    }
    CHECK_THROWS_AS(estimate_baseline(BaselineSpec::defaults(Method::gray_edge), white), DegenerateIlluminantError);
    CHECK_THROWS_AS(estimate_baseline({}, color::LinearImage(4, 4, 0.0f)), DegenerateIlluminantError);
  }

  TEST_CASE("large Minkowski p approaches white patch") {
    std::mt19937_64 rng(4);
    auto img = test::random_image(32, 32, rng, 0.1, 0.3);
    img.at(7, 9, 0) = 0.9f;
    img.at(7, 9, 1) = 0.6f;
    img.at(7, 9, 2) = 0.95f;
    const auto wp = estimate_baseline({Method::white_patch}, img);
    const auto gw = estimate_baseline({Method::gray_world}, img);
    double prev = 1e9;
    for (double p : {1.0, 6.0, 50.0}) {
      const auto e = estimate_baseline({Method::shades_of_gray, p}, img);
      const double err = angular_error(e.rgb, wp.rgb);
      CHECK(err < prev);
      prev = err;
      if (p == 1.0) CHECK(angular_error(e.rgb, gw.rgb) < 1e-12);
    }
    CHECK(prev < 0.5);
  }

  TEST_CASE("every estimator is invariant to global scaling") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 5; ++t) {
      auto img = test::random_image(24, 20, rng, 0.01, 1.0);
      for (const auto& spec : all_specs()) {
        const auto base = estimate_baseline(spec, img);
        // Power-of-two factors scale the stored floats exactly.
        for (float s : {0.125f, 4.0f, 1024.0f}) CHECK(angular_error(estimate_baseline(spec, scaled(img, s)).rgb, base.rgb) < 1e-9);
        // Other factors also round the stored pixels.
        CHECK(angular_error(estimate_baseline(spec, scaled(img, 3.7f)).rgb, base.rgb) < 1e-4);
      }
    }
  }

  TEST_CASE("masked pixels never influence an estimate") {
    std::mt19937_64 rng(10);
    auto img = test::random_image(24, 24, rng, 0.05, 0.8);
    std::vector<std::uint8_t> mask(24 * 24, 0);
    for (std::size_t y = 4; y < 12; ++y) {
      for (std::size_t x = 10; x < 20; ++x) mask[y * 24 + x] = 1;
    }
    img.set_mask(mask);
    auto painted = img;
    std::uniform_real_distribution<float> u(0.0f, 50.0f);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) {
        for (int c = 0; c < 3; ++c) painted.pixels()[i * 3 + c] = u(rng);
      }
    }
    for (const auto& spec : all_specs()) CHECK(estimate_baseline(spec, painted) == estimate_baseline(spec, img));
    img.set_mask(std::vector<std::uint8_t>(24 * 24, 1));
    CHECK_THROWS_AS(estimate_baseline({}, img), DataError);
  }

  TEST_CASE("gray edge ignores a constant offset") {
    std::mt19937_64 rng(12);
    const auto img = test::random_image(20, 20, rng, 0.1, 0.5);
    auto shifted = img;
    for (auto& v : shifted.pixels()) v += 0.25f;
    for (int order : {1, 2}) {
      auto spec = BaselineSpec::defaults(Method::gray_edge);
      spec.derivative_order = order;
      CHECK(angular_error(estimate_baseline(spec, shifted).rgb, estimate_baseline(spec, img).rgb) < 1e-3);
    }
  }
}
