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

#include "panoptic/fusion.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "panoptic/evaluator.h"
#include "panoptic/status.h"

namespace panoptic {

void FusionConfig::Validate() const {
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw InvalidArgumentError("score_threshold must lie in [0, 1]");
  }
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw InvalidArgumentError("keep_fraction must lie in (0, 1]");
  }
}

PanopticMap ResolveOverlaps(int width, int height,
                            std::span<const ScoredInstance> instances,
                            const ClassRegistry& registry,
                            const FusionConfig& config) {
  config.Validate();
  std::vector<size_t> order;
  std::vector<int64_t> areas(instances.size());
  for (size_t i = 0; i < instances.size(); ++i) {
    const ScoredInstance& inst = instances[i];
    if (inst.mask.width() != width || inst.mask.height() != height) {
      throw InvalidArgumentError(
          "instance " + std::to_string(i) + " mask is " +
          std::to_string(inst.mask.width()) + "x" +
          std::to_string(inst.mask.height()) + ", expected " +
          std::to_string(width) + "x" + std::to_string(height));
    }
    if (!registry.IsThing(inst.class_id)) {
      throw ValidationError("instance " + std::to_string(i) + " has class " +
                            std::to_string(inst.class_id) +
                            " which is not a thing class");
    }
    areas[i] = inst.mask.area();
    if (inst.score >= config.score_threshold) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (instances[a].score != instances[b].score) {
      return instances[a].score > instances[b].score;
    }
    return areas[a] > areas[b];
  });

  std::vector<SegmentKey> labels(static_cast<size_t>(width) * height);
  std::map<uint32_t, uint32_t> next_id;
  std::vector<size_t> free_pixels;
  for (size_t i : order) {
    const BinaryMask& mask = instances[i].mask;
    if (areas[i] == 0) continue;
    free_pixels.clear();
    for (size_t px = 0; px < labels.size(); ++px) {
      if (mask.test(px) && labels[px].is_void()) free_pixels.push_back(px);
    }
    const double remaining = static_cast<double>(free_pixels.size()) /
                             static_cast<double>(areas[i]);
    if (free_pixels.empty() || remaining < config.keep_fraction) continue;
    uint32_t& id = next_id[instances[i].class_id];
    if (id == kMaxInstanceId) {
      throw ValidationError("too many instances of class " +
                            std::to_string(instances[i].class_id));
    }
    ++id;
    const SegmentKey key{instances[i].class_id, id};
    for (size_t px : free_pixels) labels[px] = key;
  }
  return PanopticMap(width, height, std::move(labels));
}

PanopticMap Fuse(const PanopticMap& things, const PanopticMap& semantic,
                 const ClassRegistry& registry) {
  if (things.width() != semantic.width() ||
      things.height() != semantic.height()) {
    throw InvalidArgumentError("dimension mismatch between instance map (" +
                               std::to_string(things.width()) + "x" +
                               std::to_string(things.height()) +
                               ") and semantic map (" +
                               std::to_string(semantic.width()) + "x" +
                               std::to_string(semantic.height()) + ")");
  }
  const auto t = things.labels();
  const auto s = semantic.labels();
  std::vector<SegmentKey> labels(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    if (!t[i].is_void()) {
      if (!registry.IsThing(t[i].class_id)) {
        throw ValidationError("instance map holds non-thing class " +
                              std::to_string(t[i].class_id));
      }
      labels[i] = t[i];
      continue;
    }
    const uint32_t c = s[i].class_id;
    if (c == kVoidClassId) continue;
    const ClassInfo* info = registry.Find(c);
    if (info == nullptr) {
      throw ValidationError("semantic map holds unknown class " +
                            std::to_string(c));
    }
    if (!info->is_thing()) labels[i] = {c, 0};
  }
  std::set<SegmentKey> crowd;
  for (const SegmentKey& k : things.crowd()) crowd.insert(k);
  return PanopticMap(things.width(), things.height(), std::move(labels),
                     std::move(crowd));
}

GridSearchResult GridSearchFusion(std::span<const FusionSample> validation,
                                  const ClassRegistry& registry,
                                  std::span<const double> score_thresholds,
                                  std::span<const double> keep_fractions,
                                  const MetricConfig& metric) {
  if (score_thresholds.empty() || keep_fractions.empty()) {
    throw InvalidArgumentError("grid search needs a non-empty lattice");
  }
  GridSearchResult result;
  bool have_best = false;
  for (double score : score_thresholds) {
    for (double keep : keep_fractions) {
      FusionConfig config{score, keep};
      PQStat total;
      for (const FusionSample& sample : validation) {
        const PanopticMap things =
            ResolveOverlaps(sample.ground_truth.width(),
                            sample.ground_truth.height(), sample.instances,
                            registry, config);
        const PanopticMap fused = Fuse(things, sample.semantic, registry);
        total.Merge(EvaluatePair(sample.ground_truth, fused, registry, metric));
      }
      const double pq = ComputePq(total, registry, metric).all.pq;
      result.pq.push_back(pq);
      if (!have_best || pq > result.best_pq) {
        have_best = true;
        result.best_pq = pq;
        result.best = config;
      }
    }
  }
  return result;
}

}  // namespace panoptic
