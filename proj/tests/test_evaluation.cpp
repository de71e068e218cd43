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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "illumkit/evaluation/evaluation.hpp"
#include "illumkit/io/synthetic.hpp"
#include "pipeline_check.hpp"

using namespace illumkit;
using namespace illumkit::evaluation;

namespace {

MetricsReport random_report(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 20.0);
  return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), 10};
}

nets::FinalEstimate est(double r, double g, double b, bool degenerate = false) {
  return {color::Illuminant{{r, g, b}}, degenerate};
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("metrics golden values") {
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
    const auto r = compute_metrics(v);
    CHECK(r.mean == 4.5);
    CHECK(r.median == 4.5);
    CHECK(r.best25 == 1.5);
    CHECK(r.worst25 == 7.5);
    CHECK(r.trimean == 4.5);
    CHECK(quantile(v, 0.25) == 2.75);
    CHECK(quantile(v, 0.75) == 6.25);
    CHECK(r.pct95 == doctest::Approx(7.65).epsilon(1e-14));
    CHECK(r.n == 8);

    const auto c = compute_metrics(std::vector<double>{2, 2, 2, 2});
    for (double f : {c.mean, c.median, c.trimean, c.best25, c.worst25, c.pct95}) CHECK(f == 2.0);
  }

  TEST_CASE("metrics rounding and errors") {
    const auto r = compute_metrics(std::vector<double>{1, 2, 3, 4, 5});
    CHECK(r.median == 3.0);
    CHECK(r.best25 == 1.5);   // ceil(5/4) = 2 smallest
    CHECK(r.worst25 == 4.5);
    CHECK(compute_metrics(std::vector<double>{4, 1, 3, 2}).median == 2.5);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{1, 2, 3}), DataError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{1, 2, 3, -1}), DataError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{1, 2, 3, NAN}), DataError);
  }

  TEST_CASE("metrics are permutation invariant, ordered and monotone") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 30.0);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> v(4 + rng() % 40);
      for (auto& x : v) x = u(rng);
      const auto r = compute_metrics(v);
      auto w = v;
      std::shuffle(w.begin(), w.end(), rng);
      CHECK(compute_metrics(w) == r);
      CHECK(r.best25 <= r.median);
      CHECK(r.median <= r.worst25);
      CHECK(r.best25 >= 0.0);
      w.push_back(*std::max_element(v.begin(), v.end()) + u(rng) + 1e-9);
      const auto grown = compute_metrics(w);
      CHECK(grown.mean >= r.mean);
      CHECK(grown.worst25 >= r.worst25);
      CHECK(grown.pct95 >= r.pct95);
    }
  }

  TEST_CASE("folds") {
    std::vector<std::size_t> ids(9);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    auto f = make_folds(ids, 3, 5);
    for (const auto& fold : f.folds) CHECK(fold.size() == 3);
    ids.push_back(9);
    f = make_folds(ids, 3, 5);
    CHECK(f.folds[0].size() == 4);
    CHECK(f.folds[1].size() == 3);
    CHECK(f.folds[2].size() == 3);
    std::multiset<std::size_t> all;
    for (const auto& fold : f.folds) all.insert(fold.begin(), fold.end());
    CHECK(all == std::multiset<std::size_t>(ids.begin(), ids.end()));
    for (std::size_t id : ids) {
      const auto& fold = f.folds[f.fold_of(id)];
      CHECK(std::find(fold.begin(), fold.end(), id) != fold.end());
    }
    CHECK(make_folds(ids, 3, 5).folds == f.folds);
    CHECK(make_folds(ids, 3, 6).folds != f.folds);
    CHECK_THROWS_AS(make_folds(ids, 1, 0), ConfigError);
    CHECK_THROWS_AS(make_folds({1, 2}, 3, 0), ConfigError);
    CHECK_THROWS_AS(f.fold_of(99), DataError);
  }

  TEST_CASE("geomean") {
    std::mt19937_64 rng(8);
    const auto r = random_report(rng);
    const std::vector<MetricsReport> same(5, r);
    CHECK(geomean_report(same) == r);

    MetricsReport a{1, 1, 1, 1, 1, 1, 4}, b{4, 4, 4, 4, 4, 4, 6};
    const std::vector<MetricsReport> ab{a, b};
    CHECK(geomean_report(ab).mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(geomean_report(ab).n == 5);

    std::vector<MetricsReport> eight;
    for (int i = 0; i < 8; ++i) eight.push_back(random_report(rng));
    const auto g = geomean_report(eight);
    const auto oracle = [&](double MetricsReport::*field) {
      double s = 0.0;
      for (const auto& x : eight) s += std::log(x.*field);
      return std::exp(s / 8.0);
    };
    for (auto field : {&MetricsReport::mean, &MetricsReport::median, &MetricsReport::trimean, &MetricsReport::best25,
                       &MetricsReport::worst25, &MetricsReport::pct95}) {
      CHECK(g.*field == doctest::Approx(oracle(field)).epsilon(1e-12));
    }

    auto bad = eight;
    bad[3].median = 0.0;
    CHECK_THROWS_AS(geomean_report(bad), DataError);
    bad[3].median = -1.0;
    CHECK_THROWS_AS(geomean_report(bad), DataError);
    CHECK_THROWS_AS(geomean_report(std::vector<MetricsReport>{}), DataError);
  }

  TEST_CASE("median pooling") {
    const std::vector<nets::FinalEstimate> three{est(0.5, 0.5, 0.7), est(0.6, 0.5, 0.6), est(0.4, 0.6, 0.7)};
    const auto g = median_pool(three);
    const auto expect = color::normalize_illuminant({0.5, 0.5, 0.7});
    for (int c = 0; c < 3; ++c) CHECK(g.e.rgb[c] == doctest::Approx(expect.rgb[c]).epsilon(1e-15));

    const auto e = color::normalize_illuminant({0.3, 0.6, 0.4});
    std::vector<nets::FinalEstimate> same(15, nets::FinalEstimate{e, false});
    CHECK(median_pool(same).e == e);
    same[7] = est(0.99, 0.01, 0.01);
    CHECK(color::angular_error(median_pool(same).e.rgb, e.rgb) < 1e-12);

    std::vector<nets::FinalEstimate> flagged{est(1, 0, 0, true), est(0.5, 0.5, 0.7), est(0, 0, 1, true)};
    const auto f = median_pool(flagged);
    CHECK(f.flagged == 2);
    CHECK(f.patches == 3);
    CHECK(color::angular_error(f.e.rgb, {0.5, 0.5, 0.7}) < 1e-12);
    flagged[1].degenerate = true;
    const auto all = median_pool(flagged);
    CHECK(all.all_flagged);
    CHECK(all.e == color::neutral_illuminant());
  }

  TEST_CASE("median pooling is order free") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int t = 0; t < 100; ++t) {
      std::vector<nets::FinalEstimate> v(1 + rng() % 20);
      for (auto& x : v) x = est(u(rng), u(rng), u(rng));
      const auto g = median_pool(v);
      std::shuffle(v.begin(), v.end(), rng);
      CHECK(median_pool(v).e == g.e);
    }
  }

  TEST_CASE("global inference returns a unit estimate and is reproducible") {
    auto arch = test::tiny_arch();
    const auto model = nets::build_net<float>(arch, 4);
    sampling::SamplerConfig s;
    s.patch_size = 8;
    s.seed = 12;
    io::SyntheticSceneSpec spec;
    spec.width = spec.height = 48;
    const auto img = io::generate_scene(spec, 0).image;
    for (auto o : {nets::Output::e1, nets::Output::e2, nets::Output::final}) {
      const auto g = infer_global(model, img, s, o);
      CHECK(g.patches == s.num_patches);
      CHECK(std::hypot(g.e.rgb[0], g.e.rgb[1], g.e.rgb[2]) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(infer_global(model, img, s, o).e == g.e);
    }
    CHECK_THROWS_AS(infer_global(model, color::LinearImage(4, 4, 0.5f), s, nets::Output::final), DataError);
  }
}
