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

#include <cmath>
#include <numbers>
#include <random>

#include "illumkit/color/color.hpp"
#include "test_support.hpp"

using namespace illumkit;
using namespace illumkit::color;

namespace {

Rgb random_rgb(std::mt19937_64& rng, double lo = 0.05, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

double max_abs_diff(const LinearImage& a, const LinearImage& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) m = std::max(m, std::abs(double(a.pixels()[i]) - b.pixels()[i]));
  return m;
}

}  // namespace

TEST_SUITE("color") {
  TEST_CASE("normalize_illuminant examples") {
    const auto e = normalize_illuminant({2, 2, 2});
    for (double c : e.rgb) CHECK(c == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(normalize_illuminant({1, 0, 0}).rgb == Rgb{1, 0, 0});
    CHECK_THROWS_AS(normalize_illuminant({0, 0, 0}), DegenerateIlluminantError);
    CHECK_THROWS_AS(normalize_illuminant({1e-13, 0, 0}), DegenerateIlluminantError);
    CHECK_THROWS_AS(normalize_illuminant({-1, 1, 1}), DegenerateIlluminantError);
    CHECK_THROWS_AS(normalize_illuminant({NAN, 1, 1}), NumericError);
  }

  TEST_CASE("normalized illuminants are unit length") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
      const auto e = normalize_illuminant(random_rgb(rng, 1e-6, 1e3));
      CHECK(std::abs(std::hypot(e.rgb[0], e.rgb[1], e.rgb[2]) - 1.0) < 1e-9);
    }
  }

  TEST_CASE("angular_error examples") {
    CHECK(angular_error({0.3, 0.5, 0.7}, {0.3, 0.5, 0.7}) == 0.0);
    CHECK(angular_error({1, 0, 0}, {0, 1, 0}) == doctest::Approx(90.0).epsilon(1e-14));
    CHECK(angular_error({1, 1, 0}, {1, 0, 0}) == doctest::Approx(45.0).epsilon(1e-14));
    CHECK(angular_error({1, 0, 0}, {-1, 0, 0}) == doctest::Approx(180.0).epsilon(1e-14));
    CHECK_THROWS_AS(angular_error({0, 0, 0}, {1, 0, 0}), DegenerateIlluminantError);
  }

  TEST_CASE("angular_error is symmetric, scale invariant and bounded") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    for (int i = 0; i < 1000; ++i) {
      const Rgb a = random_rgb(rng, -1.0, 1.0), b = random_rgb(rng, -1.0, 1.0);
      const double e = angular_error(a, b);
      CHECK(e >= 0.0);
      CHECK(e <= 180.0);
      CHECK(angular_error(b, a) == doctest::Approx(e).epsilon(1e-12));
      const double s = scale(rng);
      CHECK(std::abs(angular_error({a[0] * s, a[1] * s, a[2] * s}, b) - e) < 1e-9);
    }
  }

  TEST_CASE("diagonal correction of a neutral light is the identity") {
    std::mt19937_64 rng(3);
    const auto img = test::random_image(9, 7, rng);
    const auto out = diagonal_correct(neutral_illuminant(), img);
    CHECK(max_abs_diff(out, img) <= 1e-12);
    const auto patch = test::random_tensor<double>({3, 4, 4}, rng);
    const auto p = diagonal_correct(neutral_illuminant(), patch);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - patch[i]) <= 1e-12);
    CHECK(correction_gains(neutral_illuminant()) == Rgb{1.0, 1.0, 1.0});
  }

  TEST_CASE("render then correct under (2,3,6) recovers the scene") {
    std::mt19937_64 rng(4);
    const auto canonical = test::random_image(16, 16, rng);
    const auto e = normalize_illuminant({2, 3, 6});
    CHECK(max_abs_diff(diagonal_correct(e, render_under_illuminant(canonical, e)), canonical) < 1e-6);
  }

  TEST_CASE("gray pixel rendered under (2,3,6)/7") {
    LinearImage gray(1, 1, 0.5f);
    const Illuminant e{{2.0 / 7, 3.0 / 7, 6.0 / 7}};
    const auto out = render_under_illuminant(gray, e);
    for (int c = 0; c < 3; ++c) {
      CHECK(out.at(0, 0, c) == doctest::Approx(0.5 * std::numbers::sqrt3 * e.rgb[c]).epsilon(1e-7));
    }
  }

  TEST_CASE("zero or tiny channels cannot be corrected or rendered") {
    LinearImage img(2, 2, 0.5f);
    CHECK_THROWS_AS(diagonal_correct(Illuminant{{0.0, 0.6, 0.8}}, img), DegenerateIlluminantError);
    CHECK_THROWS_AS(diagonal_correct(Illuminant{{1e-7, 0.6, 0.8}}, img), DegenerateIlluminantError);
    CHECK_THROWS_AS(render_under_illuminant(img, Illuminant{{0.6, 0.0, 0.8}}), DegenerateIlluminantError);
    CHECK_THROWS_AS(diagonal_correct(neutral_illuminant(), nn::Tensor<float>({4, 2, 2})), ShapeError);
  }

  TEST_CASE("round trip over 100 random scenes and lights") {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto canonical = test::random_image(12, 10, rng);
      const auto e = normalize_illuminant(random_rgb(rng, 0.11, 1.0));
      worst = std::max(worst, max_abs_diff(diagonal_correct(e, render_under_illuminant(canonical, e)), canonical));
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("correction is invariant to the scale of the light before normalization") {
    std::mt19937_64 rng(6);
    const auto img = test::random_image(5, 5, rng);
    for (int i = 0; i < 50; ++i) {
      const Rgb v = random_rgb(rng);
      const Rgb w{v[0] * 7.5, v[1] * 7.5, v[2] * 7.5};
      CHECK(max_abs_diff(diagonal_correct(normalize_illuminant(v), img),
                         diagonal_correct(normalize_illuminant(w), img)) < 1e-6);
    }
  }

  TEST_CASE("correction leaves values unclamped") {
    LinearImage img(1, 1, 0.9f);
    const auto out = diagonal_correct(normalize_illuminant({0.1, 1, 1}), img);
    CHECK(out.at(0, 0, 0) > 1.0f);
  }

  TEST_CASE("gamma encoding") {
    CHECK(gamma_encode(0.0) == 0.0);
    CHECK(gamma_encode(1.0) == 1.0);
    CHECK(gamma_encode(0.25) == std::pow(0.25, 1.0 / 2.2));
    CHECK(gamma_encode(0.25) == doctest::Approx(0.5325205447).epsilon(1e-9));
    CHECK(gamma_encode(-0.5) == 0.0);
    CHECK(gamma_encode(3.0) == 1.0);
    double prev = gamma_encode(0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double v = gamma_encode(i / 1000.0);
      CHECK(v > prev);
      CHECK(v <= 1.0);
      prev = v;
    }
    for (int i = 0; i <= 100; ++i) CHECK(gamma_decode(gamma_encode(i / 100.0)) == doctest::Approx(i / 100.0));
    LinearImage img(2, 1, 0.25f);
    img.at(1, 0, 2) = 4.0f;
    const auto enc = gamma_encode(img);
    CHECK(enc.at(0, 0, 0) == doctest::Approx(std::pow(0.25, 1.0 / 2.2)).epsilon(1e-6));
    CHECK(enc.at(1, 0, 2) == 1.0f);
  }

  TEST_CASE("image validation and masks") {
    LinearImage img(3, 2, 0.5f);
    CHECK_NOTHROW(img.validate());
    CHECK(img.valid_count() == 6);
    std::vector<std::uint8_t> mask(6, 0);
    mask[4] = 1;
    img.set_mask(mask);
    CHECK(img.masked(1, 1));
    CHECK_FALSE(img.masked(0, 1));
    CHECK(img.valid_count() == 5);
    CHECK_THROWS_AS(img.set_mask(std::vector<std::uint8_t>(5, 0)), DataError);
    img.at(0, 0, 1) = -0.1f;
    CHECK_THROWS_AS(img.validate(), DataError);
    img.at(0, 0, 1) = INFINITY;
    CHECK_THROWS_AS(img.validate(), DataError);
  }
}
