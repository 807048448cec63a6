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

#include "panoptic/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "panoptic/status.h"

namespace panoptic {

const ClassStat* PQStat::Find(uint32_t class_id) const {
  auto it = per_class_.find(class_id);
  return it == per_class_.end() ? nullptr : &it->second;
}

PQStat& PQStat::Merge(const PQStat& other) {
  for (const auto& [id, s] : other.per_class_) {
    ClassStat& mine = per_class_[id];
    mine.iou_sum += s.iou_sum;
    mine.tp += s.tp;
    mine.fp += s.fp;
    mine.fn += s.fn;
  }
  return *this;
}

PQStat MergeStats(const PQStat& a, const PQStat& b) {
  PQStat out = a;
  out.Merge(b);
  return out;
}

PQStat PqStats(const MatchResult& match) {
  PQStat stats;
  for (const ClassMatch& cm : match.classes) {
    ClassStat s;
    for (const MatchedPair& pair : cm.tp) s.iou_sum += pair.iou;
    s.tp = static_cast<int64_t>(cm.tp.size());
    s.fp = static_cast<int64_t>(cm.fp.size());
    s.fn = static_cast<int64_t>(cm.fn.size());
    if (!s.empty()) stats[cm.class_id] = s;
  }
  return stats;
}

void MetricConfig::Validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw InvalidArgumentError("iou_threshold must lie in (0, 1)");
  }
  if (!std::isfinite(alpha) || alpha < 0.0 || !std::isfinite(beta) ||
      beta < 0.0) {
    throw InvalidArgumentError("alpha and beta must be finite and >= 0");
  }
}

const ClassMetrics* PQResult::Find(uint32_t class_id) const {
  for (const ClassMetrics& m : per_class) {
    if (m.class_id == class_id) return &m;
  }
  return nullptr;
}

namespace {

void Accumulate(AggregateMetrics& agg, const ClassMetrics& m) {
  agg.pq += m.pq;
  agg.sq += m.sq;
  agg.rq += m.rq;
  agg.num_classes += 1;
  agg.tp += m.stat.tp;
  agg.fp += m.stat.fp;
  agg.fn += m.stat.fn;
}

void Finish(AggregateMetrics& agg) {
  if (agg.num_classes == 0) return;
  agg.pq /= agg.num_classes;
  agg.sq /= agg.num_classes;
  agg.rq /= agg.num_classes;
}

}  // namespace

PQResult ComputePq(const PQStat& stats, const ClassRegistry& registry,
                   const MetricConfig& config) {
  PQResult result;
  for (const auto& [id, s] : stats.per_class()) {
    if (s.empty()) continue;
    if (config.class_subset && !config.class_subset->count(id)) continue;
    const ClassInfo* info = registry.Find(id);
    if (info == nullptr) continue;
    ClassMetrics m;
    m.class_id = id;
    m.name = info->name;
    m.kind = info->kind;
    m.stat = s;
    const double denom = static_cast<double>(s.tp) + 0.5 * s.fp + 0.5 * s.fn;
    m.pq = s.iou_sum / denom;
    m.rq = static_cast<double>(s.tp) / denom;
    m.sq = s.tp > 0 ? s.iou_sum / static_cast<double>(s.tp) : 0.0;
    Accumulate(result.all, m);
    Accumulate(m.kind == SegmentKind::kThing ? result.things : result.stuff, m);
    result.per_class.push_back(std::move(m));
  }
  Finish(result.all);
  Finish(result.stuff);
  Finish(result.things);
  return result;
}

std::map<uint32_t, double> RqAlphaBeta(const PQStat& stats, double alpha,
                                       double beta) {
  if (!std::isfinite(alpha) || alpha < 0.0 || !std::isfinite(beta) ||
      beta < 0.0) {
    throw InvalidArgumentError("alpha and beta must be finite and >= 0");
  }
  std::map<uint32_t, double> out;
  for (const auto& [id, s] : stats.per_class()) {
    const double denom = static_cast<double>(s.tp) + alpha * s.fp + beta * s.fn;
    if (denom > 0.0) out[id] = static_cast<double>(s.tp) / denom;
  }
  return out;
}

ScaleCuts ScaleThresholds(std::span<const int64_t> areas) {
  if (areas.size() < 4) {
    throw InvalidArgumentError(
        "scale thresholds need at least 4 segments, got " +
        std::to_string(areas.size()));
  }
  std::vector<int64_t> sorted(areas.begin(), areas.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  // Nearest rank: ceil(p * n / 100), 1-based.
  const size_t rank25 = (25 * n + 99) / 100;
  const size_t rank75 = (75 * n + 99) / 100;
  return {sorted[rank25 - 1], sorted[rank75 - 1]};
}

ScaleCuts ScaleThresholds(std::span<const PanopticMap> gt_maps,
                          const ClassRegistry& registry, bool things_only) {
  std::vector<int64_t> areas;
  for (const PanopticMap& map : gt_maps) {
    for (const Segment& s :
         ExtractSegments(CanonicalizeStuff(map, registry), registry)) {
      if (s.is_crowd) continue;
      if (things_only && s.kind != SegmentKind::kThing) continue;
      areas.push_back(s.area);
    }
  }
  return ScaleThresholds(areas);
}

ScaleCuts ScaleThresholds(std::span<const MatchResult> matches,
                          const ClassRegistry& registry, bool things_only) {
  std::vector<int64_t> areas;
  for (const MatchResult& m : matches) {
    for (const ClassMatch& cm : m.classes) {
      if (things_only && !registry.IsThing(cm.class_id)) continue;
      for (const MatchedPair& p : cm.tp) areas.push_back(p.gt_area);
      for (const UnmatchedSegment& s : cm.fn) areas.push_back(s.area);
    }
  }
  return ScaleThresholds(areas);
}

Scale ScaleOf(int64_t area, const ScaleCuts& cuts) {
  if (area <= cuts.small) return Scale::kSmall;
  if (area <= cuts.large) return Scale::kMedium;
  return Scale::kLarge;
}

ScaleBreakdown ComputeScaleBreakdown(std::span<const MatchResult> matches,
                                     const ScaleCuts& cuts,
                                     const ClassRegistry& registry,
                                     const MetricConfig& config,
                                     bool things_only) {
  PQStat strata[3];
  for (const MatchResult& m : matches) {
    for (const ClassMatch& cm : m.classes) {
      if (things_only && !registry.IsThing(cm.class_id)) continue;
      for (const MatchedPair& p : cm.tp) {
        ClassStat& s = strata[static_cast<int>(ScaleOf(p.gt_area, cuts))]
                             [cm.class_id];
        s.iou_sum += p.iou;
        s.tp += 1;
      }
      for (const UnmatchedSegment& u : cm.fn) {
        strata[static_cast<int>(ScaleOf(u.area, cuts))][cm.class_id].fn += 1;
      }
      for (const UnmatchedSegment& u : cm.fp) {
        strata[static_cast<int>(ScaleOf(u.area, cuts))][cm.class_id].fp += 1;
      }
    }
  }
  return {ComputePq(strata[0], registry, config),
          ComputePq(strata[1], registry, config),
          ComputePq(strata[2], registry, config)};
}

void SemanticConfusion::Add(const PanopticMap& gt, const PanopticMap& pred) {
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    throw InvalidArgumentError("dimension mismatch in mean IoU");
  }
  std::unordered_map<uint32_t, Counts> local;
  const auto g = gt.labels();
  const auto p = pred.labels();
  const size_t n = g.size();
  size_t i = 0;
  while (i < n) {
    const uint32_t gc = g[i].class_id;
    const uint32_t pc = p[i].class_id;
    size_t j = i + 1;
    while (j < n && g[j].class_id == gc && p[j].class_id == pc) ++j;
    const int64_t run = static_cast<int64_t>(j - i);
    if (gc != kVoidClassId) {
      if (gc == pc) {
        local[gc].intersection += run;
        local[gc].uni += run;
      } else {
        local[gc].uni += run;
        if (pc != kVoidClassId) local[pc].uni += run;
      }
    }
    i = j;
  }
  for (const auto& [id, c] : local) {
    Counts& mine = per_class_[id];
    mine.intersection += c.intersection;
    mine.uni += c.uni;
  }
}

SemanticConfusion& SemanticConfusion::Merge(const SemanticConfusion& other) {
  for (const auto& [id, c] : other.per_class_) {
    Counts& mine = per_class_[id];
    mine.intersection += c.intersection;
    mine.uni += c.uni;
  }
  return *this;
}

MeanIouResult MeanIou(const SemanticConfusion& confusion,
                      const ClassRegistry& registry) {
  MeanIouResult result;
  double total = 0.0;
  for (const auto& [id, c] : confusion.per_class()) {
    if (!registry.Contains(id)) {
      throw ValidationError("unknown class id " + std::to_string(id) +
                            " in mean IoU");
    }
    if (c.uni == 0) continue;
    const double iou =
        static_cast<double>(c.intersection) / static_cast<double>(c.uni);
    result.per_class[id] = iou;
    total += iou;
    result.num_classes += 1;
  }
  if (result.num_classes > 0) result.mean = total / result.num_classes;
  return result;
}

MeanIouResult MeanIou(const PanopticMap& gt, const PanopticMap& pred,
                      const ClassRegistry& registry) {
  SemanticConfusion confusion;
  confusion.Add(gt, pred);
  return MeanIou(confusion, registry);
}

}  // namespace panoptic
