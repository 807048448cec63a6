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

#include <gtest/gtest.h>

#include <cmath>

#include "panoptic/status.h"
#include "test_support.h"

namespace panoptic {
namespace {

using testing::Draw;
using testing::SmallRegistry;

int64_t Count(const PanopticMap& m, const SegmentKey& k) {
  return std::count(m.labels().begin(), m.labels().end(), k);
}

TEST(SynthRegistryTest, Layout) {
  const ClassRegistry r = MakeSynthRegistry(1, 2);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r.Find(1)->name, "stuff_1");
  EXPECT_EQ(r.Find(3)->name, "thing_2");
  EXPECT_TRUE(r.IsThing(2));
}

TEST(GroundTruthTest, DeterministicAndValid) {
  SynthSpec spec;
  spec.seed = 5;
  spec.crowd_probability = 0.5;
  spec.void_fraction = 0.1;
  const PanopticMap a = GenerateGroundTruth(spec);
  EXPECT_EQ(a, GenerateGroundTruth(spec));
  spec.seed = 6;
  EXPECT_NE(a, GenerateGroundTruth(spec));
  EXPECT_TRUE(ValidateMap(a, MakeSynthRegistry(spec)).empty());
}

TEST(GroundTruthTest, VoidFractionIsExact) {
  for (double f : {0.0, 0.013, 0.25, 0.5, 1.0}) {
    SynthSpec spec;
    spec.width = 37;
    spec.height = 23;
    spec.void_fraction = f;
    spec.seed = 9;
    const PanopticMap m = GenerateGroundTruth(spec);
    EXPECT_EQ(Count(m, SegmentKey::Void()),
              std::llround(f * 37 * 23)) << f;
  }
}

TEST(GroundTruthTest, VoronoiOwnership) {
  SynthSpec spec;
  spec.width = 20;
  spec.height = 10;
  spec.n_seeds = 1;
  const PanopticMap one = GenerateGroundTruth(spec);
  EXPECT_EQ(one.Keys().size(), 1u);
  spec.n_seeds = 0;
  spec.void_fraction = 1.0;
  EXPECT_TRUE(GenerateGroundTruth(spec).Keys().empty());
}

TEST(GroundTruthTest, RejectsBadSpecs) {
  SynthSpec spec;
  spec.width = 0;
  EXPECT_THROW(GenerateGroundTruth(spec), InvalidArgumentError);
  spec = {};
  spec.crowd_probability = 1.5;
  EXPECT_THROW(GenerateGroundTruth(spec), InvalidArgumentError);
  spec = {};
  spec.n_seeds = 0;
  EXPECT_THROW(GenerateGroundTruth(spec), InvalidArgumentError);
  spec = {};
  spec.width = 2;
  spec.height = 2;
  spec.n_seeds = 5;
  EXPECT_THROW(GenerateGroundTruth(spec), InvalidArgumentError);
}

const PanopticMap& Scene() {
  static const PanopticMap m = Draw(
      {"aaaabbbb", "aaaabbbb", "ccccdddd", "ccccdddd"},
      {{'a', {1, 0}}, {'b', {3, 1}}, {'c', {3, 2}}, {'d', {4, 1}}}, {{3, 2}});
  return m;
}

TEST(PerturbTest, SplitHalvesAlongX) {
  const PanopticMap m =
      Perturb(Scene(), SmallRegistry(), Perturbation::SplitSegment({3, 1}));
  EXPECT_EQ(Count(m, {3, 1}), 4);
  EXPECT_EQ(Count(m, {3, 3}), 4);
  EXPECT_EQ(m.at(4, 1), (SegmentKey{3, 1}));
  EXPECT_EQ(m.at(7, 0), (SegmentKey{3, 3}));
  EXPECT_THROW(
      Perturb(Scene(), SmallRegistry(), Perturbation::SplitSegment({1, 0})),
      InvalidArgumentError);
  const PanopticMap crowd_split =
      Perturb(Scene(), SmallRegistry(), Perturbation::SplitSegment({3, 2}));
  EXPECT_TRUE(crowd_split.IsCrowd({3, 3}));
}

TEST(PerturbTest, MergeRelabelDrop) {
  const ClassRegistry r = SmallRegistry();
  const PanopticMap merged =
      Perturb(Scene(), r, Perturbation::MergeSegments({3, 1}, {3, 2}));
  EXPECT_EQ(Count(merged, {3, 1}), 16);
  EXPECT_TRUE(merged.crowd().empty());
  EXPECT_THROW(Perturb(Scene(), r, Perturbation::MergeSegments({3, 1}, {3, 1})),
               InvalidArgumentError);

  const PanopticMap relabeled =
      Perturb(Scene(), r, Perturbation::Relabel({3, 1}, 4));
  EXPECT_EQ(Count(relabeled, {4, 2}), 8);
  const PanopticMap to_stuff =
      Perturb(Scene(), r, Perturbation::Relabel({3, 2}, 2));
  EXPECT_EQ(Count(to_stuff, {2, 0}), 8);
  EXPECT_TRUE(to_stuff.crowd().empty());
  EXPECT_THROW(Perturb(Scene(), r, Perturbation::Relabel({3, 1}, 3)),
               InvalidArgumentError);
  EXPECT_THROW(Perturb(Scene(), r, Perturbation::Relabel({3, 1}, 9)),
               InvalidArgumentError);

  const PanopticMap dropped = Perturb(Scene(), r, Perturbation::DropSegment({1, 0}));
  EXPECT_EQ(Count(dropped, SegmentKey::Void()), 8);
  EXPECT_THROW(Perturb(Scene(), r, Perturbation::DropSegment({5, 1})),
               InvalidArgumentError);
}

TEST(PerturbTest, JitterAndSpurious) {
  const ClassRegistry r = SmallRegistry();
  EXPECT_EQ(Perturb(Scene(), r, Perturbation::BoundaryJitter(0, 1)), Scene());
  const PanopticMap j = Perturb(Scene(), r, Perturbation::BoundaryJitter(1, 4));
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 8; ++x) {
      bool near = false;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, 7), sy = std::clamp(y + dy, 0, 3);
          near |= Scene().at(sx, sy) == j.at(x, y);
        }
      }
      EXPECT_TRUE(near) << x << "," << y;
    }
  }
  EXPECT_THROW(Perturb(Scene(), r, Perturbation::BoundaryJitter(-1, 0)),
               InvalidArgumentError);

  const PanopticMap s =
      Perturb(Scene(), r, Perturbation::AddSpurious(7, 5, 3));
  EXPECT_EQ(Count(s, {5, 1}), 7);
  // A wide, short map still fits the block.
  const PanopticMap flat(40, 2);
  EXPECT_EQ(Count(Perturb(flat, r, Perturbation::AddSpurious(30, 5, 3)), {5, 1}),
            30);
  EXPECT_THROW(Perturb(Scene(), r, Perturbation::AddSpurious(33, 5, 3)),
               InvalidArgumentError);
}

TEST(PredictionTest, NoiseFreePredictionIsExact) {
  SynthSpec spec;
  spec.seed = 3;
  const PanopticMap gt = GenerateGroundTruth(spec);
  PredictionNoise none;
  none.jitter_radius = 0;
  EXPECT_EQ(SynthesizePrediction(gt, MakeSynthRegistry(spec), none), gt);
  PredictionNoise noisy;
  noisy.drop = 1;
  noisy.spurious = 2;
  noisy.seed = 4;
  const PanopticMap a = SynthesizePrediction(gt, MakeSynthRegistry(spec), noisy);
  EXPECT_EQ(a, SynthesizePrediction(gt, MakeSynthRegistry(spec), noisy));
  EXPECT_NE(a, gt);
}

TEST(FusionSampleTest, OneInstancePerNonCrowdThing) {
  SynthSpec spec;
  spec.seed = 12;
  spec.crowd_probability = 0.3;
  const ClassRegistry r = MakeSynthRegistry(spec);
  const PanopticMap gt = GenerateGroundTruth(spec);
  FusionNoise noise;
  noise.jitter_radius = 0;
  noise.spurious = 2;
  const FusionSample s = SynthesizeFusionSample(gt, r, noise);
  size_t things = 0;
  for (const Segment& seg : ExtractSegments(gt, r)) {
    if (seg.kind == SegmentKind::kThing && !seg.is_crowd) ++things;
  }
  EXPECT_EQ(s.instances.size(), things + 2);
  for (const auto& inst : s.instances) {
    EXPECT_TRUE(r.IsThing(inst.class_id));
    EXPECT_GE(inst.score, 0.05);
    EXPECT_LT(inst.score, 1.0);
  }
  for (size_t i = 0; i < gt.pixel_count(); ++i) {
    EXPECT_EQ(s.semantic.labels()[i].class_id, gt.labels()[i].class_id);
    EXPECT_EQ(s.semantic.labels()[i].instance_id, 0u);
  }
}

}  // namespace
}  // namespace panoptic
