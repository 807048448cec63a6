// Copyright 2026 The Panoptic Toolkit Authors.
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

// Analyses over whole evaluations: bootstrap intervals over images, the
// distribution of matched overlaps, and IoU-threshold sweeps.

#ifndef PANOPTIC_STATS_H_
#define PANOPTIC_STATS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "panoptic/evaluator.h"
#include "panoptic/metrics.h"
#include "panoptic/model.h"

namespace panoptic {

inline constexpr int kDefaultResamples = 1000;

// Interval for one aggregate, named "<scope>.<metric>", e.g. "things.pq".
struct BootstrapResult {
  std::string metric;
  double point = 0.0;
  double lo = 0.0;  // 5th nearest-rank percentile
  double hi = 0.0;  // 95th nearest-rank percentile
  int n_resamples = 0;
  uint64_t seed = 0;
  // Resamples in which the aggregate was defined; percentiles use only these.
  int n_defined = 0;
};

// Resamples images with replacement. Resample r draws from a generator keyed
// by (seed, r), so the result does not depend on `threads`. One entry per
// aggregate that is defined on the full set, in the order all, stuff,
// things and pq, sq, rq within each.
std::vector<BootstrapResult> BootstrapPQ(std::span<const PQStat> per_image,
                                         const ClassRegistry& registry,
                                         const MetricConfig& config = {},
                                         int n_resamples = kDefaultResamples,
                                         uint64_t seed = 0,
                                         unsigned threads = 1);

// Value at nearest rank ceil(p * n / 100) of sorted `values`. `p` in (0, 100].
double NearestRankPercentile(std::span<const double> sorted_values, double p);

struct CdfPoint {
  double iou = 0.0;
  double fraction = 0.0;  // share of matched pairs with IoU <= iou
};

// Empirical CDF over the IoUs of all matched pairs, one point per distinct
// IoU value.
std::vector<CdfPoint> OverlapCdf(std::span<const MatchResult> matches);

// Matches every pair with any positive IoU counted as a candidate and
// returns the CDF of the optimal matching's IoUs.
std::vector<CdfPoint> OverlapCdf(const PairSource& source,
                                 const ClassRegistry& registry,
                                 unsigned threads = 1);

struct SweepPoint {
  double threshold = 0.0;
  PQResult result;
};

// Full evaluation at each threshold, each in (0, 1). `base` supplies alpha,
// beta and the class subset.
std::vector<SweepPoint> ThresholdSweep(const PairSource& source,
                                       const ClassRegistry& registry,
                                       std::span<const double> thresholds,
                                       unsigned threads = 1,
                                       const MetricConfig& base = {});

// CSV tables with four-decimal reals.
std::string FormatBootstrapCsv(std::span<const BootstrapResult> results);
std::string FormatCdfCsv(std::span<const CdfPoint> cdf);
std::string FormatSweepCsv(std::span<const SweepPoint> sweep);
// One row per stratum with a defined aggregate, with its area range.
std::string FormatScaleCsv(const ScaleCuts& cuts,
                           const ScaleBreakdown& breakdown);
std::string FormatMeanIouCsv(const MeanIouResult& miou,
                             const ClassRegistry& registry);

}  // namespace panoptic

#endif  // PANOPTIC_STATS_H_
