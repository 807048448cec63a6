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

// Brute-force reference evaluator used as a test oracle. It shares only the
// data types with the library: segments are explicit pixel sets, IoUs come
// from set unions and intersections, and matchings are found by enumerating
// every one-to-one assignment.

#ifndef PANOPTIC_TESTS_ORACLE_H_
#define PANOPTIC_TESTS_ORACLE_H_

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "panoptic/model.h"

namespace panoptic::oracle {

struct OracleClass {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t discarded = 0;
  double iou_sum = 0.0;
  int64_t gt_non_crowd = 0;  // GT segments that can be matched
  int64_t pred_segments = 0;
  std::vector<std::pair<SegmentKey, SegmentKey>> matches;
};

struct OracleResult {
  std::map<uint32_t, OracleClass> per_class;
  double pq_all = 0.0;
  double pq_stuff = 0.0;
  double pq_things = 0.0;
  int classes_all = 0;
};

using PixelSet = std::set<size_t>;

// Pixel sets per canonical key (stuff instance ids collapsed to 0).
std::map<SegmentKey, PixelSet> Segments(const PanopticMap& map,
                                        const ClassRegistry& registry);

// IoU of g and p where the pixels of p lying on GT void leave the union.
double SetIou(const PixelSet& g, const PixelSet& p, const PixelSet& gt_void);

// Matching rule: IoU > t when t >= 0.5, IoU >= t below. Among all
// admissible one-to-one assignments the one with the largest IoU sum wins.
OracleResult Evaluate(const PanopticMap& gt, const PanopticMap& pred,
                      const ClassRegistry& registry, double threshold = 0.5);

// Sums several images and recomputes the averages.
OracleResult Merge(const std::vector<OracleResult>& images,
                   const ClassRegistry& registry);

}  // namespace panoptic::oracle

#endif  // PANOPTIC_TESTS_ORACLE_H_
