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

// Seeded synthetic scenes and controlled corruptions of them.

#ifndef PANOPTIC_SYNTH_H_
#define PANOPTIC_SYNTH_H_

#include <cstdint>

#include "panoptic/fusion.h"
#include "panoptic/model.h"

namespace panoptic {

struct SynthSpec {
  int width = 64;
  int height = 64;
  int n_stuff_classes = 2;
  int n_thing_classes = 3;
  int n_seeds = 8;
  double crowd_probability = 0.0;
  double void_fraction = 0.0;
  uint64_t seed = 0;

  void Validate() const;
};

// Stuff classes get ids 1..n_stuff ("stuff_1", ...), thing classes the ids
// that follow ("thing_1", ...).
ClassRegistry MakeSynthRegistry(int n_stuff_classes, int n_thing_classes);
ClassRegistry MakeSynthRegistry(const SynthSpec& spec);

// Voronoi cells of n_seeds random sites, each given a random class from the
// registry of MakeSynthRegistry(spec). Cells of one stuff class form one
// segment; every thing cell is its own instance and is flagged crowd with
// probability crowd_probability. Exactly round(void_fraction * pixels)
// pixels, those nearest to a few random hole centers, are void.
PanopticMap GenerateGroundTruth(const SynthSpec& spec);

struct Perturbation {
  enum class Kind {
    kBoundaryJitter,  // every pixel copies a neighbor within `radius`
    kSplitSegment,    // thing `target` split in two halves along x
    kMergeSegments,   // pixels of `other` join `target`
    kRelabel,         // `target` moves to class `new_class`
    kDropSegment,     // `target` becomes void
    kAddSpurious,     // `area` pixels of class `new_class` pasted at random
  };
  Kind kind = Kind::kBoundaryJitter;
  SegmentKey target;
  SegmentKey other;
  int radius = 1;
  uint32_t new_class = 0;
  int64_t area = 0;
  uint64_t seed = 0;

  static Perturbation BoundaryJitter(int radius, uint64_t seed);
  static Perturbation SplitSegment(SegmentKey target);
  static Perturbation MergeSegments(SegmentKey target, SegmentKey other);
  static Perturbation Relabel(SegmentKey target, uint32_t new_class);
  static Perturbation DropSegment(SegmentKey target);
  static Perturbation AddSpurious(int64_t area, uint32_t class_id,
                                  uint64_t seed);
};

// Applies one error mode. Throws InvalidArgumentError when the target is
// absent or the parameters do not fit the map. New thing segments take the
// next free instance id of their class.
PanopticMap Perturb(const PanopticMap& map, const ClassRegistry& registry,
                    const Perturbation& perturbation);

// A plausible prediction for `gt`: boundary jitter followed by the given
// numbers of dropped, split and relabeled segments and spurious blobs, with
// targets drawn from `seed`. Counts larger than the eligible segments are
// clipped.
struct PredictionNoise {
  int jitter_radius = 1;
  int drop = 0;
  int split = 0;
  int relabel = 0;
  int spurious = 0;
  int64_t spurious_area = 64;
  uint64_t seed = 0;
};

PanopticMap SynthesizePrediction(const PanopticMap& gt,
                                 const ClassRegistry& registry,
                                 const PredictionNoise& noise);

// Inputs for the fusion heuristics derived from `gt`. The semantic map is
// the jittered class raster. Every non-crowd thing segment yields an
// instance whose mask is the segment in an independently jittered copy, so
// neighboring masks overlap; `spurious` extra thing blobs are added. Scores
// are uniform in [0.05, 1).
struct FusionNoise {
  int jitter_radius = 1;
  int spurious = 1;
  int64_t spurious_area = 32;
  uint64_t seed = 0;
};

FusionSample SynthesizeFusionSample(const PanopticMap& gt,
                                    const ClassRegistry& registry,
                                    const FusionNoise& noise);

}  // namespace panoptic

#endif  // PANOPTIC_SYNTH_H_
