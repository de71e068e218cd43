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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "illumkit/color/color.hpp"
#include "illumkit/nets/forward.hpp"
#include "illumkit/sampling/sampling.hpp"

namespace illumkit::evaluation {

/// Angular-error summary in degrees.
struct MetricsReport {
  double mean = 0.0;
  double median = 0.0;
  double trimean = 0.0;
  double best25 = 0.0;
  double worst25 = 0.0;
  double pct95 = 0.0;
  std::size_t n = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Quantile of ascending `sorted` by linear interpolation at h = (n-1) p.
double quantile(std::span<const double> sorted, double p);

/// Requires n >= 4. best25/worst25 average the ceil(n/4) smallest/largest
/// errors; trimean is (Q1 + 2 Q2 + Q3) / 4.
MetricsReport compute_metrics(std::span<const double> errors);

/// Field-wise geometric mean; n becomes the rounded mean subset size.
/// Every field must be strictly positive.
MetricsReport geomean_report(std::span<const MetricsReport> reports);

struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;
  /// Fold containing `id`.
  std::size_t fold_of(std::size_t id) const;
};

/// Seeded shuffle, then round-robin assignment to k folds.
FoldSplit make_folds(const std::vector<std::size_t>& ids, std::size_t k, std::uint64_t seed);

struct GlobalEstimate {
  color::Illuminant e;
  std::size_t patches = 0;
  std::size_t flagged = 0;
  /// Every patch estimate was degenerate; `e` is the neutral light.
  bool all_flagged = false;
  bool sampler_fell_back = false;
};

/// Per-channel median of the non-degenerate estimates, renormalized.
GlobalEstimate median_pool(std::span<const nets::FinalEstimate> estimates);

/// Samples patch pairs with `sampler` and median-pools the per-patch estimates.
GlobalEstimate infer_global(const nets::Model<float>& model, const color::LinearImage& image,
                            const sampling::SamplerConfig& sampler, nets::Output output);

}  // namespace illumkit::evaluation
