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

// Segment matching between a ground-truth and a predicted panoptic map.
//
// Matching only pairs segments of the same class. Predicted pixels lying on
// ground-truth void are excised before the union is taken, crowd ground-truth
// segments never take part in matching, and unmatched predictions that sit
// mostly on void or on a same-class crowd region are discarded rather than
// counted as false positives.
//
// Above an IoU of 0.5 each segment has at most one candidate partner, so
// MatchUnique is exact. Lower thresholds need MatchOptimal, which solves a
// maximum-weight bipartite matching on the sparse candidate graph.

#ifndef PANOPTIC_MATCHING_H_
#define PANOPTIC_MATCHING_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "panoptic/model.h"

namespace panoptic {

struct SegmentInfo {
  SegmentKey key;
  int64_t area = 0;
  bool is_crowd = false;
};

// Exact pairwise overlap counts between GT and predicted segments from a
// single joint raster scan. Stuff keys are canonicalized on the fly.
class IntersectionTable {
 public:
  // Index used for the GT-void pseudo segment.
  static constexpr int32_t kVoid = -1;

  struct Entry {
    int32_t gt = kVoid;  // index into gt_segments() or kVoid
    int32_t pred = 0;    // index into pred_segments()
    int64_t count = 0;   // always >= 1
  };

  // Throws InvalidArgumentError on a dimension mismatch and ValidationError
  // on a class id missing from the registry.
  static IntersectionTable Build(const PanopticMap& gt, const PanopticMap& pred,
                                 const ClassRegistry& registry);

  // Sorted by key.
  std::span<const SegmentInfo> gt_segments() const { return gt_; }
  std::span<const SegmentInfo> pred_segments() const { return pred_; }
  // Sorted by (pred, gt), with kVoid first within a prediction.
  std::span<const Entry> entries() const { return entries_; }

  int32_t FindGt(const SegmentKey& key) const;
  int32_t FindPred(const SegmentKey& key) const;

  // 0 when the pair does not overlap or either key is absent.
  int64_t Overlap(const SegmentKey& gt, const SegmentKey& pred) const;
  // Predicted pixels that lie on GT void.
  int64_t VoidOverlap(int32_t pred) const { return void_overlap_[pred]; }
  // Predicted pixels that lie on crowd GT segments of the prediction's class.
  int64_t CrowdOverlap(int32_t pred) const { return crowd_overlap_[pred]; }

  // IoU with GT-void pixels excised from the prediction. Throws
  // InvalidArgumentError on a class mismatch or unknown key.
  double Iou(const SegmentKey& gt, const SegmentKey& pred) const;
  double Iou(const Entry& entry) const;

 private:
  std::vector<SegmentInfo> gt_;
  std::vector<SegmentInfo> pred_;
  std::vector<Entry> entries_;
  std::vector<int64_t> void_overlap_;
  std::vector<int64_t> crowd_overlap_;
};

struct MatchedPair {
  SegmentKey gt;
  SegmentKey pred;
  double iou = 0.0;
  int64_t gt_area = 0;
  int64_t pred_area = 0;
};

struct UnmatchedSegment {
  SegmentKey key;
  int64_t area = 0;
};

// TP/FP/FN partition of one class. Discarded predictions are unmatched
// predictions excused by the void or crowd rule.
struct ClassMatch {
  uint32_t class_id = 0;
  std::vector<MatchedPair> tp;  // sorted by gt key
  std::vector<UnmatchedSegment> fp;
  std::vector<UnmatchedSegment> fn;
  std::vector<UnmatchedSegment> discarded;
};

struct MatchResult {
  double threshold = 0.5;
  // One entry per class present in either map, sorted by class id.
  std::vector<ClassMatch> classes;

  const ClassMatch* Find(uint32_t class_id) const;
};

// Matches pairs with IoU strictly greater than `threshold`, which must be at
// least 0.5. The result does not depend on enumeration order.
MatchResult MatchUnique(const IntersectionTable& table,
                        const ClassRegistry& registry, double threshold = 0.5);
MatchResult MatchUnique(const PanopticMap& gt, const PanopticMap& pred,
                        const ClassRegistry& registry, double threshold = 0.5);

// Per class, the matching of maximum total IoU over candidate pairs. Below
// 0.5 a pair is a candidate when IoU >= threshold; at exactly 0.5 the strict
// rule of MatchUnique applies so that both agree. Among optimal matchings the
// one that includes the lexicographically smallest (gt, pred) edges is
// chosen. `threshold` must lie in (0, 0.5].
MatchResult MatchOptimal(const IntersectionTable& table,
                         const ClassRegistry& registry, double threshold);
MatchResult MatchOptimal(const PanopticMap& gt, const PanopticMap& pred,
                         const ClassRegistry& registry, double threshold);

// MatchUnique above 0.5 and at 0.5, MatchOptimal below.
MatchResult Match(const IntersectionTable& table, const ClassRegistry& registry,
                  double threshold);

struct FilteredPredictions {
  std::vector<int32_t> fp;
  std::vector<int32_t> discarded;
};

// Splits unmatched predictions (indices into the table) into false positives
// and discarded ones. A prediction is discarded when its GT-void fraction or
// its same-class crowd fraction exceeds `threshold`.
FilteredPredictions FilterUnmatched(std::span<const int32_t> unmatched_preds,
                                    const IntersectionTable& table,
                                    double threshold);

// Maximum-weight bipartite matching on a sparse graph with positive weights.
// Exposed for testing; edges are (left, right, weight).
struct WeightedEdge {
  int left = 0;
  int right = 0;
  double weight = 0.0;
};
// Returns indices into `edges` of a maximum-weight matching.
std::vector<int> MaxWeightMatching(int num_left, int num_right,
                                   std::span<const WeightedEdge> edges);

}  // namespace panoptic

#endif  // PANOPTIC_MATCHING_H_
