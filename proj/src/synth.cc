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

#include "panoptic/synth.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "panoptic/status.h"
#include "rng.h"

namespace panoptic {

namespace {

struct Site {
  int x;
  int y;
  SegmentKey key;
};

uint32_t NextInstanceId(std::span<const SegmentKey> labels, uint32_t class_id) {
  uint32_t max_id = 0;
  for (const SegmentKey& k : labels) {
    if (k.class_id == class_id) max_id = std::max(max_id, k.instance_id);
  }
  if (max_id >= kMaxInstanceId) {
    throw InvalidArgumentError("class " + std::to_string(class_id) +
                               " has no free instance id");
  }
  return max_id + 1;
}

// Drops crowd flags of keys that no longer own pixels.
std::set<SegmentKey> SurvivingCrowd(std::span<const SegmentKey> labels,
                                    const std::set<SegmentKey>& crowd) {
  std::set<SegmentKey> present;
  for (const SegmentKey& k : labels) {
    if (crowd.count(k)) present.insert(k);
  }
  return present;
}

bool Contains(std::span<const SegmentKey> labels, const SegmentKey& key) {
  return std::find(labels.begin(), labels.end(), key) != labels.end();
}

void RequirePresent(std::span<const SegmentKey> labels, const SegmentKey& key) {
  if (key.is_void() || !Contains(labels, key)) {
    throw InvalidArgumentError("segment " + ToString(key) +
                               " is not present in the map");
  }
}

PanopticMap Jitter(const PanopticMap& map, int radius, uint64_t seed) {
  if (radius < 0) throw InvalidArgumentError("jitter radius must be >= 0");
  if (radius == 0) return map;
  internal::Rng rng(internal::Mix64(seed));
  const int w = map.width();
  const int h = map.height();
  std::vector<SegmentKey> labels(map.pixel_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = std::clamp<int>(x + rng.Range(-radius, radius), 0, w - 1);
      const int sy = std::clamp<int>(y + rng.Range(-radius, radius), 0, h - 1);
      labels[static_cast<size_t>(y) * w + x] = map.at(sx, sy);
    }
  }
  std::set<SegmentKey> crowd = SurvivingCrowd(labels, map.crowd());
  return PanopticMap(w, h, std::move(labels), std::move(crowd));
}

PanopticMap Split(const PanopticMap& map, const ClassRegistry& registry,
                  const SegmentKey& target) {
  const auto src = map.labels();
  RequirePresent(src, target);
  if (!registry.IsThing(target.class_id)) {
    throw InvalidArgumentError("only thing segments can be split");
  }
  const int w = map.width();
  std::vector<size_t> pixels;
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i] == target) pixels.push_back(i);
  }
  if (pixels.size() < 2) {
    throw InvalidArgumentError("segment " + ToString(target) +
                               " is too small to split");
  }
  // Column-major order puts the left half first.
  std::sort(pixels.begin(), pixels.end(), [w](size_t a, size_t b) {
    return std::pair(a % w, a / w) < std::pair(b % w, b / w);
  });
  const SegmentKey fresh{target.class_id,
                         NextInstanceId(src, target.class_id)};
  std::vector<SegmentKey> labels(src.begin(), src.end());
  for (size_t k = pixels.size() / 2; k < pixels.size(); ++k) {
    labels[pixels[k]] = fresh;
  }
  std::set<SegmentKey> crowd = map.crowd();
  if (map.IsCrowd(target)) crowd.insert(fresh);
  return PanopticMap(map.width(), map.height(), std::move(labels),
                     std::move(crowd));
}

PanopticMap Merge(const PanopticMap& map, const SegmentKey& target,
                  const SegmentKey& other) {
  const auto src = map.labels();
  RequirePresent(src, target);
  RequirePresent(src, other);
  if (target == other) {
    throw InvalidArgumentError("cannot merge a segment with itself");
  }
  std::vector<SegmentKey> labels(src.begin(), src.end());
  for (SegmentKey& k : labels) {
    if (k == other) k = target;
  }
  std::set<SegmentKey> crowd = map.crowd();
  crowd.erase(other);
  return PanopticMap(map.width(), map.height(), std::move(labels),
                     std::move(crowd));
}

PanopticMap Relabel(const PanopticMap& map, const ClassRegistry& registry,
                    const SegmentKey& target, uint32_t new_class) {
  const auto src = map.labels();
  RequirePresent(src, target);
  if (!registry.Contains(new_class)) {
    throw InvalidArgumentError("unknown class " + std::to_string(new_class));
  }
  if (new_class == target.class_id) {
    throw InvalidArgumentError("relabel must change the class");
  }
  const bool thing = registry.IsThing(new_class);
  const SegmentKey moved{new_class,
                         thing ? NextInstanceId(src, new_class) : 0u};
  std::vector<SegmentKey> labels(src.begin(), src.end());
  for (SegmentKey& k : labels) {
    if (k == target) k = moved;
  }
  std::set<SegmentKey> crowd = map.crowd();
  if (crowd.erase(target) && thing) crowd.insert(moved);
  return PanopticMap(map.width(), map.height(), std::move(labels),
                     std::move(crowd));
}

PanopticMap Drop(const PanopticMap& map, const SegmentKey& target) {
  const auto src = map.labels();
  RequirePresent(src, target);
  std::vector<SegmentKey> labels(src.begin(), src.end());
  for (SegmentKey& k : labels) {
    if (k == target) k = SegmentKey::Void();
  }
  std::set<SegmentKey> crowd = map.crowd();
  crowd.erase(target);
  return PanopticMap(map.width(), map.height(), std::move(labels),
                     std::move(crowd));
}

// Pastes a near-square block of exactly `area` pixels at a random position.
// A stuff class that is already present simply grows.
PanopticMap AddSpurious(const PanopticMap& map, const ClassRegistry& registry,
                        int64_t area, uint32_t class_id, uint64_t seed) {
  if (!registry.Contains(class_id)) {
    throw InvalidArgumentError("unknown class " + std::to_string(class_id));
  }
  const int w = map.width();
  const int h = map.height();
  if (area < 1 || area > static_cast<int64_t>(map.pixel_count())) {
    throw InvalidArgumentError("spurious area must lie in [1, pixels]");
  }
  int64_t bw = static_cast<int64_t>(std::ceil(std::sqrt(double(area))));
  bw = std::min<int64_t>(bw, w);
  int64_t bh = (area + bw - 1) / bw;
  if (bh > h) {
    bw = (area + h - 1) / h;
    bh = (area + bw - 1) / bw;
  }
  internal::Rng rng(internal::Mix64(seed));
  const int64_t x0 = rng.Range(0, w - bw);
  const int64_t y0 = rng.Range(0, h - bh);

  const auto src = map.labels();
  const SegmentKey key{class_id,
                       registry.IsThing(class_id) ? NextInstanceId(src, class_id)
                                                  : 0u};
  std::vector<SegmentKey> labels(src.begin(), src.end());
  for (int64_t k = 0; k < area; ++k) {
    const int64_t x = x0 + k % bw;
    const int64_t y = y0 + k / bw;
    labels[static_cast<size_t>(y * w + x)] = key;
  }
  std::set<SegmentKey> crowd = SurvivingCrowd(labels, map.crowd());
  return PanopticMap(w, h, std::move(labels), std::move(crowd));
}

}  // namespace

void SynthSpec::Validate() const {
  if (width < 1 || height < 1) {
    throw InvalidArgumentError("synthetic map dimensions must be positive");
  }
  if (n_stuff_classes < 0 || n_thing_classes < 0 || n_seeds < 0) {
    throw InvalidArgumentError("class and seed counts must be >= 0");
  }
  if (!(crowd_probability >= 0.0 && crowd_probability <= 1.0) ||
      !(void_fraction >= 0.0 && void_fraction <= 1.0)) {
    throw InvalidArgumentError("probabilities must lie in [0, 1]");
  }
  const int64_t pixels = int64_t{width} * height;
  if (void_fraction < 1.0 || n_seeds > 0) {
    if (n_seeds < 1) {
      throw InvalidArgumentError("a non-void scene needs at least one seed");
    }
    if (n_stuff_classes + n_thing_classes < 1) {
      throw InvalidArgumentError("a non-void scene needs at least one class");
    }
    if (n_seeds > pixels) {
      throw InvalidArgumentError("more seeds than pixels");
    }
    if (n_seeds > static_cast<int64_t>(kMaxInstanceId)) {
      throw InvalidArgumentError("too many seeds for the instance id range");
    }
  }
}

ClassRegistry MakeSynthRegistry(int n_stuff_classes, int n_thing_classes) {
  ClassRegistry registry;
  uint32_t id = 1;
  for (int i = 1; i <= n_stuff_classes; ++i) {
    registry.Add(id++, "stuff_" + std::to_string(i), SegmentKind::kStuff);
  }
  for (int i = 1; i <= n_thing_classes; ++i) {
    registry.Add(id++, "thing_" + std::to_string(i), SegmentKind::kThing);
  }
  return registry;
}

ClassRegistry MakeSynthRegistry(const SynthSpec& spec) {
  return MakeSynthRegistry(spec.n_stuff_classes, spec.n_thing_classes);
}

PanopticMap GenerateGroundTruth(const SynthSpec& spec) {
  spec.Validate();
  const int w = spec.width;
  const int h = spec.height;
  const size_t pixels = static_cast<size_t>(w) * h;
  internal::Rng rng(internal::Mix64(spec.seed));

  const int n_classes = spec.n_stuff_classes + spec.n_thing_classes;
  std::vector<Site> sites;
  std::map<uint32_t, uint32_t> next_instance;
  std::set<SegmentKey> crowd;
  for (int s = 0; s < spec.n_seeds; ++s) {
    Site site;
    site.x = static_cast<int>(rng.Below(w));
    site.y = static_cast<int>(rng.Below(h));
    const uint32_t class_id = 1 + static_cast<uint32_t>(rng.Below(n_classes));
    const bool thing = class_id > static_cast<uint32_t>(spec.n_stuff_classes);
    site.key = {class_id, thing ? ++next_instance[class_id] : 0u};
    // Always draw, so the sequence does not depend on the class mix.
    const bool crowded = rng.Bernoulli(spec.crowd_probability);
    if (thing && crowded) crowd.insert(site.key);
    sites.push_back(site);
  }

  std::vector<SegmentKey> labels(pixels);
  if (!sites.empty()) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int64_t best = INT64_MAX;
        const Site* owner = nullptr;
        for (const Site& s : sites) {
          const int64_t dx = x - s.x;
          const int64_t dy = y - s.y;
          const int64_t d = dx * dx + dy * dy;
          if (d < best) {
            best = d;
            owner = &s;
          }
        }
        labels[static_cast<size_t>(y) * w + x] = owner->key;
      }
    }
  }

  const size_t n_void = static_cast<size_t>(
      std::llround(spec.void_fraction * static_cast<double>(pixels)));
  if (n_void >= pixels) {
    std::fill(labels.begin(), labels.end(), SegmentKey::Void());
  } else if (n_void > 0) {
    const int n_holes = 1 + static_cast<int>(rng.Below(3));
    std::vector<std::pair<int, int>> holes;
    for (int k = 0; k < n_holes; ++k) {
      holes.emplace_back(static_cast<int>(rng.Below(w)),
                         static_cast<int>(rng.Below(h)));
    }
    std::vector<std::pair<int64_t, size_t>> order(pixels);
    for (size_t i = 0; i < pixels; ++i) {
      const int64_t x = static_cast<int64_t>(i % w);
      const int64_t y = static_cast<int64_t>(i / w);
      int64_t best = INT64_MAX;
      for (const auto& [hx, hy] : holes) {
        best = std::min(best, (x - hx) * (x - hx) + (y - hy) * (y - hy));
      }
      order[i] = {best, i};
    }
    std::nth_element(order.begin(), order.begin() + (n_void - 1), order.end());
    for (size_t k = 0; k < n_void; ++k) {
      labels[order[k].second] = SegmentKey::Void();
    }
  }
  crowd = SurvivingCrowd(labels, crowd);
  return PanopticMap(w, h, std::move(labels), std::move(crowd));
}

Perturbation Perturbation::BoundaryJitter(int radius, uint64_t seed) {
  Perturbation p;
  p.kind = Kind::kBoundaryJitter;
  p.radius = radius;
  p.seed = seed;
  return p;
}

Perturbation Perturbation::SplitSegment(SegmentKey target) {
  Perturbation p;
  p.kind = Kind::kSplitSegment;
  p.target = target;
  return p;
}

Perturbation Perturbation::MergeSegments(SegmentKey target, SegmentKey other) {
  Perturbation p;
  p.kind = Kind::kMergeSegments;
  p.target = target;
  p.other = other;
  return p;
}

Perturbation Perturbation::Relabel(SegmentKey target, uint32_t new_class) {
  Perturbation p;
  p.kind = Kind::kRelabel;
  p.target = target;
  p.new_class = new_class;
  return p;
}

Perturbation Perturbation::DropSegment(SegmentKey target) {
  Perturbation p;
  p.kind = Kind::kDropSegment;
  p.target = target;
  return p;
}

Perturbation Perturbation::AddSpurious(int64_t area, uint32_t class_id,
                                       uint64_t seed) {
  Perturbation p;
  p.kind = Kind::kAddSpurious;
  p.area = area;
  p.new_class = class_id;
  p.seed = seed;
  return p;
}

PanopticMap Perturb(const PanopticMap& map, const ClassRegistry& registry,
                    const Perturbation& p) {
  switch (p.kind) {
    case Perturbation::Kind::kBoundaryJitter:
      return Jitter(map, p.radius, p.seed);
    case Perturbation::Kind::kSplitSegment:
      return Split(map, registry, p.target);
    case Perturbation::Kind::kMergeSegments:
      return Merge(map, p.target, p.other);
    case Perturbation::Kind::kRelabel:
      return Relabel(map, registry, p.target, p.new_class);
    case Perturbation::Kind::kDropSegment:
      return Drop(map, p.target);
    case Perturbation::Kind::kAddSpurious:
      return AddSpurious(map, registry, p.area, p.new_class, p.seed);
  }
  throw InvalidArgumentError("unknown perturbation kind");
}

PanopticMap SynthesizePrediction(const PanopticMap& gt,
                                 const ClassRegistry& registry,
                                 const PredictionNoise& noise) {
  internal::Rng rng(internal::Mix64(noise.seed ^ 0x70726564ULL));
  PanopticMap pred = Jitter(gt, noise.jitter_radius, noise.seed);

  for (int k = 0; k < noise.drop; ++k) {
    const std::vector<SegmentKey> keys = pred.Keys();
    if (keys.empty()) break;
    pred = Drop(pred, keys[rng.Below(keys.size())]);
  }
  for (int k = 0; k < noise.split; ++k) {
    std::vector<SegmentKey> eligible;
    for (const Segment& s : ExtractSegments(pred, registry)) {
      if (s.kind == SegmentKind::kThing && s.area >= 2) {
        eligible.push_back(s.key);
      }
    }
    if (eligible.empty()) break;
    pred = Split(pred, registry, eligible[rng.Below(eligible.size())]);
  }
  if (registry.size() >= 2) {
    for (int k = 0; k < noise.relabel; ++k) {
      const std::vector<SegmentKey> keys = pred.Keys();
      if (keys.empty()) break;
      const SegmentKey target = keys[rng.Below(keys.size())];
      uint32_t new_class = target.class_id;
      while (new_class == target.class_id) {
        new_class = registry.classes()[rng.Below(registry.size())].id;
      }
      pred = Relabel(pred, registry, target, new_class);
    }
  }
  if (!registry.empty()) {
    const int64_t area = std::clamp<int64_t>(
        noise.spurious_area, 1, static_cast<int64_t>(pred.pixel_count()));
    for (int k = 0; k < noise.spurious; ++k) {
      const uint32_t class_id =
          registry.classes()[rng.Below(registry.size())].id;
      pred = AddSpurious(pred, registry, area, class_id, rng.Next());
    }
  }
  return pred;
}

FusionSample SynthesizeFusionSample(const PanopticMap& gt,
                                    const ClassRegistry& registry,
                                    const FusionNoise& noise) {
  internal::Rng rng(internal::Mix64(noise.seed ^ 0x667573ULL));
  FusionSample sample;
  sample.ground_truth = gt;

  const PanopticMap jittered = Jitter(gt, noise.jitter_radius, rng.Next());
  std::vector<SegmentKey> semantic(jittered.labels().begin(),
                                   jittered.labels().end());
  for (SegmentKey& k : semantic) k.instance_id = 0;
  sample.semantic =
      PanopticMap(gt.width(), gt.height(), std::move(semantic));

  for (const Segment& s : ExtractSegments(gt, registry)) {
    if (s.kind != SegmentKind::kThing || s.is_crowd) continue;
    const PanopticMap copy = Jitter(gt, noise.jitter_radius, rng.Next());
    ScoredInstance inst;
    inst.class_id = s.key.class_id;
    inst.score = 0.05 + 0.95 * rng.Uniform();
    inst.mask = BinaryMask(gt.width(), gt.height());
    const auto labels = copy.labels();
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == s.key) inst.mask.set(i);
    }
    if (inst.mask.area() > 0) sample.instances.push_back(std::move(inst));
  }

  const std::vector<uint32_t> things = registry.ThingIds();
  if (!things.empty() && gt.pixel_count() > 0) {
    const int64_t area = std::clamp<int64_t>(
        noise.spurious_area, 1, static_cast<int64_t>(gt.pixel_count()));
    for (int k = 0; k < noise.spurious; ++k) {
      const uint32_t class_id = things[rng.Below(things.size())];
      const PanopticMap blob =
          AddSpurious(PanopticMap(gt.width(), gt.height()), registry, area,
                      class_id, rng.Next());
      ScoredInstance inst;
      inst.class_id = class_id;
      inst.score = 0.05 + 0.95 * rng.Uniform();
      inst.mask = BinaryMask(gt.width(), gt.height());
      const auto labels = blob.labels();
      for (size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i].is_void()) inst.mask.set(i);
      }
      sample.instances.push_back(std::move(inst));
    }
  }
  return sample;
}

}  // namespace panoptic
