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

#include "panoptic/stats.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <tuple>

#include "panoptic/status.h"
#include "rng.h"

namespace panoptic {

namespace {

constexpr int kNumAggregates = 9;
constexpr std::array<const char*, kNumAggregates> kAggregateNames = {
    "all.pq",   "all.sq",   "all.rq",    "stuff.pq", "stuff.sq",
    "stuff.rq", "things.pq", "things.sq", "things.rq"};

using AggregateValues = std::array<std::optional<double>, kNumAggregates>;

AggregateValues Flatten(const PQResult& r) {
  AggregateValues out;
  const AggregateMetrics* scopes[] = {&r.all, &r.stuff, &r.things};
  for (int s = 0; s < 3; ++s) {
    if (!scopes[s]->defined()) continue;
    out[3 * s] = scopes[s]->pq;
    out[3 * s + 1] = scopes[s]->sq;
    out[3 * s + 2] = scopes[s]->rq;
  }
  return out;
}

std::string Fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

double NearestRankPercentile(std::span<const double> sorted_values, double p) {
  if (sorted_values.empty()) {
    throw InvalidArgumentError("percentile of an empty sample");
  }
  if (!(p > 0.0 && p <= 100.0)) {
    throw InvalidArgumentError("percentile must lie in (0, 100]");
  }
  const double n = static_cast<double>(sorted_values.size());
  size_t rank = static_cast<size_t>(std::ceil(p * n / 100.0));
  rank = std::clamp<size_t>(rank, 1, sorted_values.size());
  return sorted_values[rank - 1];
}

std::vector<BootstrapResult> BootstrapPQ(std::span<const PQStat> per_image,
                                         const ClassRegistry& registry,
                                         const MetricConfig& config,
                                         int n_resamples, uint64_t seed,
                                         unsigned threads) {
  if (per_image.empty()) {
    throw InvalidArgumentError("bootstrap needs at least one image");
  }
  if (n_resamples < 1) {
    throw InvalidArgumentError("n_resamples must be >= 1");
  }
  config.Validate();

  PQStat total;
  for (const PQStat& s : per_image) total.Merge(s);
  const AggregateValues point = Flatten(ComputePq(total, registry, config));

  const size_t n = per_image.size();
  std::vector<AggregateValues> samples(n_resamples);
  ParallelFor(n_resamples, threads, [&](size_t r) {
    internal::Rng rng = internal::Rng::ForStream(seed, r);
    PQStat merged;
    for (size_t k = 0; k < n; ++k) merged.Merge(per_image[rng.Below(n)]);
    samples[r] = Flatten(ComputePq(merged, registry, config));
  });

  std::vector<BootstrapResult> out;
  for (int m = 0; m < kNumAggregates; ++m) {
    if (!point[m]) continue;
    std::vector<double> values;
    values.reserve(samples.size());
    for (const AggregateValues& s : samples) {
      if (s[m]) values.push_back(*s[m]);
    }
    std::sort(values.begin(), values.end());
    BootstrapResult r;
    r.metric = kAggregateNames[m];
    r.point = *point[m];
    r.n_resamples = n_resamples;
    r.seed = seed;
    r.n_defined = static_cast<int>(values.size());
    if (values.empty()) {
      r.lo = r.hi = r.point;
    } else {
      r.lo = NearestRankPercentile(values, 5.0);
      r.hi = NearestRankPercentile(values, 95.0);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CdfPoint> OverlapCdf(std::span<const MatchResult> matches) {
  std::vector<double> ious;
  for (const MatchResult& m : matches) {
    for (const ClassMatch& c : m.classes) {
      for (const MatchedPair& p : c.tp) ious.push_back(p.iou);
    }
  }
  std::sort(ious.begin(), ious.end());
  std::vector<CdfPoint> cdf;
  const double total = static_cast<double>(ious.size());
  for (size_t i = 0; i < ious.size(); ++i) {
    if (i + 1 < ious.size() && ious[i + 1] == ious[i]) continue;
    cdf.push_back({ious[i], static_cast<double>(i + 1) / total});
  }
  return cdf;
}

std::vector<CdfPoint> OverlapCdf(const PairSource& source,
                                 const ClassRegistry& registry,
                                 unsigned threads) {
  MetricConfig config;
  config.iou_threshold = std::numeric_limits<double>::min();
  const std::vector<MatchResult> matches =
      MatchDataset(source, registry, config, threads);
  return OverlapCdf(matches);
}

std::vector<SweepPoint> ThresholdSweep(const PairSource& source,
                                       const ClassRegistry& registry,
                                       std::span<const double> thresholds,
                                       unsigned threads,
                                       const MetricConfig& base) {
  std::vector<MetricConfig> configs;
  for (double t : thresholds) {
    MetricConfig c = base;
    c.iou_threshold = t;
    c.Validate();
    configs.push_back(std::move(c));
  }
  const size_t n = source.size();
  // stats[t * n + i]: image i at threshold t.
  std::vector<PQStat> stats(configs.size() * n);
  ForEachTable(source, registry, threads,
               [&](size_t i, const IntersectionTable& table) {
                 for (size_t t = 0; t < configs.size(); ++t) {
                   stats[t * n + i] = PqStats(
                       Match(table, registry, configs[t].iou_threshold));
                 }
               });
  std::vector<SweepPoint> out;
  for (size_t t = 0; t < configs.size(); ++t) {
    PQStat total;
    for (size_t i = 0; i < n; ++i) total.Merge(stats[t * n + i]);
    out.push_back({configs[t].iou_threshold,
                   ComputePq(total, registry, configs[t])});
  }
  return out;
}

std::string FormatBootstrapCsv(std::span<const BootstrapResult> results) {
  std::string out = "metric,point,lo,hi,n_resamples,n_defined,seed\n";
  for (const BootstrapResult& r : results) {
    out += r.metric + "," + Fixed4(r.point) + "," + Fixed4(r.lo) + "," +
           Fixed4(r.hi) + "," + std::to_string(r.n_resamples) + "," +
           std::to_string(r.n_defined) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

std::string FormatCdfCsv(std::span<const CdfPoint> cdf) {
  std::string out = "iou,fraction\n";
  for (const CdfPoint& p : cdf) {
    out += Fixed4(p.iou) + "," + Fixed4(p.fraction) + "\n";
  }
  return out;
}

std::string FormatSweepCsv(std::span<const SweepPoint> sweep) {
  std::string out =
      "threshold,pq,sq,rq,pq_stuff,sq_stuff,rq_stuff,pq_things,sq_things,"
      "rq_things,tp,fp,fn\n";
  for (const SweepPoint& p : sweep) {
    out += Fixed4(p.threshold);
    for (const AggregateMetrics* a :
         {&p.result.all, &p.result.stuff, &p.result.things}) {
      for (double v : {a->pq, a->sq, a->rq}) {
        out += ",";
        if (a->defined()) out += Fixed4(v);
      }
    }
    out += "," + std::to_string(p.result.all.tp) + "," +
           std::to_string(p.result.all.fp) + "," +
           std::to_string(p.result.all.fn) + "\n";
  }
  return out;
}

std::string FormatScaleCsv(const ScaleCuts& cuts,
                           const ScaleBreakdown& breakdown) {
  std::string out = "stratum,min_area,max_area,pq,sq,rq,num_classes,tp,fp,fn\n";
  const std::tuple<const char*, const PQResult*, std::string, std::string>
      rows[] = {
          {"small", &breakdown.small, "1", std::to_string(cuts.small)},
          {"medium", &breakdown.medium, std::to_string(cuts.small + 1),
           std::to_string(cuts.large)},
          {"large", &breakdown.large, std::to_string(cuts.large + 1), ""},
      };
  for (const auto& [name, result, lo, hi] : rows) {
    const AggregateMetrics& a = result->all;
    if (!a.defined()) continue;
    out += std::string(name) + "," + lo + "," + hi + "," + Fixed4(a.pq) + "," +
           Fixed4(a.sq) + "," + Fixed4(a.rq) + "," +
           std::to_string(a.num_classes) + "," + std::to_string(a.tp) + "," +
           std::to_string(a.fp) + "," + std::to_string(a.fn) + "\n";
  }
  return out;
}

std::string FormatMeanIouCsv(const MeanIouResult& miou,
                             const ClassRegistry& registry) {
  std::string out = "class_id,name,iou\n";
  for (const auto& [id, iou] : miou.per_class) {
    const ClassInfo* info = registry.Find(id);
    out += std::to_string(id) + "," + (info ? info->name : "") + "," +
           Fixed4(iou) + "\n";
  }
  if (miou.num_classes > 0) out += "mean,," + Fixed4(miou.mean) + "\n";
  return out;
}

}  // namespace panoptic
