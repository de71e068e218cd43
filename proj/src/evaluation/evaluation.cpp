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

#include "illumkit/evaluation/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "illumkit/common/parallel.hpp"

namespace illumkit::evaluation {

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of an empty list");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MetricsReport compute_metrics(std::span<const double> errors) {
  const std::size_t n = errors.size();
  if (n < 4) throw DataError("metrics need at least 4 errors, got " + std::to_string(n));
  std::vector<double> v(errors.begin(), errors.end());
  for (double e : v) {
    if (!std::isfinite(e) || e < 0.0) throw DataError("angular errors must be finite and nonnegative");
  }
  std::sort(v.begin(), v.end());
  const auto mean_of = [](auto first, auto last) {
    return std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
  };
  const auto quarter = static_cast<std::ptrdiff_t>((n + 3) / 4);
  MetricsReport r;
  r.n = n;
  r.mean = mean_of(v.begin(), v.end());
  r.median = quantile(v, 0.5);
  r.trimean = (quantile(v, 0.25) + 2.0 * r.median + quantile(v, 0.75)) / 4.0;
  r.best25 = mean_of(v.begin(), v.begin() + quarter);
  r.worst25 = mean_of(v.end() - quarter, v.end());
  r.pct95 = quantile(v, 0.95);
  return r;
}

MetricsReport geomean_report(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw DataError("geomean of no reports");
  constexpr std::size_t kFields = 6;
  const auto fields = [](const MetricsReport& r) {
    return std::array<double, kFields>{r.mean, r.median, r.trimean, r.best25, r.worst25, r.pct95};
  };
  const auto base = fields(reports.front());
  std::array<double, kFields> log_sum{};
  double n_sum = 0.0;
  for (const auto& r : reports) {
    const auto f = fields(r);
    for (std::size_t k = 0; k < kFields; ++k) {
      if (!(f[k] > 0.0) || !std::isfinite(f[k])) throw DataError("geomean needs strictly positive metrics");
      log_sum[k] += std::log(f[k] / base[k]);
    }
    n_sum += static_cast<double>(r.n);
  }
  const double count = static_cast<double>(reports.size());
  std::array<double, kFields> g{};
  for (std::size_t k = 0; k < kFields; ++k) g[k] = base[k] * std::exp(log_sum[k] / count);
  MetricsReport out{g[0], g[1], g[2], g[3], g[4], g[5], static_cast<std::size_t>(std::llround(n_sum / count))};
  return out;
}

std::size_t FoldSplit::fold_of(std::size_t id) const {
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (std::find(folds[f].begin(), folds[f].end(), id) != folds[f].end()) return f;
  }
  throw DataError("id " + std::to_string(id) + " is in no fold");
}

FoldSplit make_folds(const std::vector<std::size_t>& ids, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("need at least 2 folds");
  if (ids.size() < k) throw ConfigError("fewer ids than folds");
  std::vector<std::size_t> order = ids;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the split does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  FoldSplit split;
  split.folds.resize(k);
  for (std::size_t i = 0; i < order.size(); ++i) split.folds[i % k].push_back(order[i]);
  return split;
}

GlobalEstimate median_pool(std::span<const nets::FinalEstimate> estimates) {
  GlobalEstimate g;
  g.patches = estimates.size();
  std::array<std::vector<double>, 3> ch;
  for (const auto& e : estimates) {
    if (e.degenerate) {
      ++g.flagged;
      continue;
    }
    for (std::size_t c = 0; c < 3; ++c) ch[c].push_back(e.e.rgb[c]);
  }
  if (ch[0].empty()) {
    g.all_flagged = true;
    g.e = color::neutral_illuminant();
    return g;
  }
  color::Rgb m{};
  for (std::size_t c = 0; c < 3; ++c) {
    std::sort(ch[c].begin(), ch[c].end());
    m[c] = quantile(ch[c], 0.5);
  }
  g.e = color::normalize_illuminant(m);
  return g;
}

GlobalEstimate infer_global(const nets::Model<float>& model, const color::LinearImage& image,
                            const sampling::SamplerConfig& sampler, nets::Output output) {
  const auto sample = sampling::sample_patch_pairs(image, sampler);
  std::vector<nets::FinalEstimate> est(sample.pairs.size());
  parallel_for(est.size(), [&](std::size_t i) {
    est[i] = nets::estimate_patch(model, sample.pairs[i].central, sample.pairs[i].surround, output);
  });
  GlobalEstimate g = median_pool(est);
  g.sampler_fell_back = sample.fell_back_to_random;
  return g;
}

}  // namespace illumkit::evaluation
