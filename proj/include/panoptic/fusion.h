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

// Heuristic panoptic baselines built from separate instance and semantic
// outputs.

#ifndef PANOPTIC_FUSION_H_
#define PANOPTIC_FUSION_H_

#include <span>
#include <vector>

#include "panoptic/metrics.h"
#include "panoptic/model.h"

namespace panoptic {

struct FusionConfig {
  double score_threshold = 0.5;
  double keep_fraction = 0.5;

  void Validate() const;
};

// NMS-like overlap removal. Instances scoring below score_threshold are
// dropped; the rest are visited by descending score (ties: larger area, then
// input order). Each instance loses the pixels already claimed and is kept
// iff remaining / original area >= keep_fraction. Kept instances get
// instance ids 1, 2, ... per class in visiting order.
PanopticMap ResolveOverlaps(int width, int height,
                            std::span<const ScoredInstance> instances,
                            const ClassRegistry& registry,
                            const FusionConfig& config = {});

// Thing pixels win over stuff. Pixels with no instance take the semantic
// stuff label; semantic thing pixels without an instance become void.
PanopticMap Fuse(const PanopticMap& things, const PanopticMap& semantic,
                 const ClassRegistry& registry);

struct FusionSample {
  std::vector<ScoredInstance> instances;
  PanopticMap semantic;
  PanopticMap ground_truth;
};

struct GridSearchResult {
  FusionConfig best;
  double best_pq = 0.0;
  // PQ for every (score, keep) lattice point, row-major over score values.
  std::vector<double> pq;
};

// Exhaustive search over the lattice, maximizing aggregate PQ of the fused
// maps on `validation`. Ties keep the earliest lattice point.
GridSearchResult GridSearchFusion(std::span<const FusionSample> validation,
                                  const ClassRegistry& registry,
                                  std::span<const double> score_thresholds,
                                  std::span<const double> keep_fractions,
                                  const MetricConfig& metric = {});

}  // namespace panoptic

#endif  // PANOPTIC_FUSION_H_
