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

// Panoptic quality and its decomposition.
//
// Per class c with matched pairs TP and unmatched sets FP, FN:
//
//   PQ = sum(IoU over TP) / (|TP| + |FP|/2 + |FN|/2)
//   SQ = sum(IoU over TP) / |TP|
//   RQ = |TP| / (|TP| + |FP|/2 + |FN|/2)
//
// so PQ = SQ * RQ. Dataset-level numbers are unweighted means over the
// classes that have at least one TP, FP or FN.

#ifndef PANOPTIC_METRICS_H_
#define PANOPTIC_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "panoptic/matching.h"
#include "panoptic/model.h"

namespace panoptic {

struct ClassStat {
  double iou_sum = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  bool empty() const { return tp == 0 && fp == 0 && fn == 0; }
  friend bool operator==(const ClassStat&, const ClassStat&) = default;
};

// Per-class accumulator. Merging is a field-wise sum.
class PQStat {
 public:
  PQStat() = default;

  ClassStat& operator[](uint32_t class_id) { return per_class_[class_id]; }
  const ClassStat* Find(uint32_t class_id) const;
  const std::map<uint32_t, ClassStat>& per_class() const { return per_class_; }

  PQStat& Merge(const PQStat& other);

  friend bool operator==(const PQStat&, const PQStat&) = default;

 private:
  std::map<uint32_t, ClassStat> per_class_;
};

PQStat MergeStats(const PQStat& a, const PQStat& b);

// Tallies one image's match partition. Discarded predictions do not count.
PQStat PqStats(const MatchResult& match);

struct MetricConfig {
  double iou_threshold = 0.5;
  double alpha = 0.5;
  double beta = 0.5;
  std::optional<std::set<uint32_t>> class_subset;

  // Throws InvalidArgumentError when out of range.
  void Validate() const;
};

struct ClassMetrics {
  uint32_t class_id = 0;
  std::string name;
  SegmentKind kind = SegmentKind::kStuff;
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  ClassStat stat;
};

struct AggregateMetrics {
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  int num_classes = 0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  bool defined() const { return num_classes > 0; }
};

struct PQResult {
  std::vector<ClassMetrics> per_class;  // participating classes, by id
  AggregateMetrics all;
  AggregateMetrics stuff;
  AggregateMetrics things;

  const ClassMetrics* Find(uint32_t class_id) const;
};

// SQ of a class without TPs is reported as 0. Classes without any TP, FP or
// FN, classes outside config.class_subset and classes missing from the
// registry are left out.
PQResult ComputePq(const PQStat& stats, const ClassRegistry& registry,
                   const MetricConfig& config = {});

// tp / (tp + alpha * fp + beta * fn) per class; classes whose denominator is
// zero are left out.
std::map<uint32_t, double> RqAlphaBeta(const PQStat& stats, double alpha,
                                       double beta);

struct ScaleCuts {
  int64_t small = 0;  // areas <= small are S
  int64_t large = 0;  // areas > large are L, the rest M
};

// 25th and 75th nearest-rank percentiles. Throws InvalidArgumentError on
// fewer than four areas.
ScaleCuts ScaleThresholds(std::span<const int64_t> areas);

// Cuts over the non-crowd GT segments of every map.
ScaleCuts ScaleThresholds(std::span<const PanopticMap> gt_maps,
                          const ClassRegistry& registry,
                          bool things_only = false);

// Cuts over the non-crowd GT segments recorded in match results (TPs and FNs).
ScaleCuts ScaleThresholds(std::span<const MatchResult> matches,
                          const ClassRegistry& registry,
                          bool things_only = false);

enum class Scale { kSmall = 0, kMedium = 1, kLarge = 2 };

Scale ScaleOf(int64_t area, const ScaleCuts& cuts);

struct ScaleBreakdown {
  PQResult small;
  PQResult medium;
  PQResult large;
};

// TPs and FNs go to the stratum of their GT segment, FPs to the stratum of
// the predicted segment.
ScaleBreakdown ComputeScaleBreakdown(std::span<const MatchResult> matches,
                                     const ScaleCuts& cuts,
                                     const ClassRegistry& registry,
                                     const MetricConfig& config = {},
                                     bool things_only = false);

// Pixel counts for semantic mean IoU; mergeable across images.
class SemanticConfusion {
 public:
  // Instance ids are ignored; pixels that are void in `gt` do not count.
  void Add(const PanopticMap& gt, const PanopticMap& pred);
  SemanticConfusion& Merge(const SemanticConfusion& other);

  struct Counts {
    int64_t intersection = 0;
    int64_t uni = 0;
  };
  const std::map<uint32_t, Counts>& per_class() const { return per_class_; }

 private:
  std::map<uint32_t, Counts> per_class_;
};

struct MeanIouResult {
  std::map<uint32_t, double> per_class;
  double mean = 0.0;
  int num_classes = 0;
};

// Classes absent from both maps (after excluding GT void) are left out of the
// mean. Classes unknown to the registry are rejected.
MeanIouResult MeanIou(const SemanticConfusion& confusion,
                      const ClassRegistry& registry);
MeanIouResult MeanIou(const PanopticMap& gt, const PanopticMap& pred,
                      const ClassRegistry& registry);

}  // namespace panoptic

#endif  // PANOPTIC_METRICS_H_
