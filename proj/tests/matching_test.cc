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

#include "panoptic/matching.h"

#include <gtest/gtest.h>

#include <random>

#include "panoptic/status.h"
#include "test_support.h"

namespace panoptic {
namespace {

using testing::Describe;
using testing::Draw;
using testing::SmallRegistry;

constexpr SegmentKey kRoad{1, 0};
constexpr SegmentKey kSky{2, 0};
constexpr SegmentKey kCar1{3, 1};
constexpr SegmentKey kCar2{3, 2};
constexpr SegmentKey kPerson1{4, 1};

TEST(IntersectionTableTest, AreasOverlapsAndVoid) {
  const PanopticMap gt = Draw({"aaaa", "bbbb", "...."},
                              {{'a', kRoad}, {'b', kCar1}});
  const PanopticMap pred = Draw({"aaab", "bbbb", "bb.."},
                                {{'a', kRoad}, {'b', kCar2}});
  const auto t = IntersectionTable::Build(gt, pred, SmallRegistry());
  ASSERT_EQ(t.gt_segments().size(), 2u);
  ASSERT_EQ(t.pred_segments().size(), 2u);
  EXPECT_EQ(t.gt_segments()[1].area, 4);
  EXPECT_EQ(t.pred_segments()[1].area, 7);
  EXPECT_EQ(t.Overlap(kCar1, kCar2), 4);
  EXPECT_EQ(t.Overlap(SegmentKey::Void(), kCar2), 2);
  EXPECT_EQ(t.VoidOverlap(t.FindPred(kCar2)), 2);
  // union = 4 + 7 - 4 - 2 (void part of the prediction) = 5
  EXPECT_DOUBLE_EQ(t.Iou(kCar1, kCar2), 4.0 / 5.0);
  EXPECT_DOUBLE_EQ(t.Iou(kRoad, kRoad), 3.0 / 4.0);
  EXPECT_THROW(t.Iou(kRoad, kCar2), InvalidArgumentError);
  EXPECT_THROW(t.Iou(kCar2, kCar2), InvalidArgumentError);
}

TEST(IntersectionTableTest, StuffInstanceIdsAreIgnored) {
  const PanopticMap gt = Draw({"ab"}, {{'a', {1, 3}}, {'b', {1, 9}}});
  const PanopticMap pred = Draw({"aa"}, {{'a', {1, 0}}});
  const auto t = IntersectionTable::Build(gt, pred, SmallRegistry());
  ASSERT_EQ(t.gt_segments().size(), 1u);
  EXPECT_EQ(t.gt_segments()[0].key, kRoad);
  EXPECT_EQ(t.gt_segments()[0].area, 2);
}

TEST(IntersectionTableTest, RejectsMismatchAndUnknownClasses) {
  EXPECT_THROW(IntersectionTable::Build(PanopticMap(2, 2), PanopticMap(2, 3),
                                        SmallRegistry()),
               InvalidArgumentError);
  const PanopticMap bad = Draw({"z"}, {{'z', {77, 0}}});
  EXPECT_THROW(
      IntersectionTable::Build(bad, PanopticMap(1, 1), SmallRegistry()),
      ValidationError);
}

TEST(MatchTest, PerfectPrediction) {
  const PanopticMap gt = Draw({"aabb", "aabb", "ccdd"},
                              {{'a', kRoad}, {'b', kCar1}, {'c', kCar2},
                               {'d', kSky}});
  const MatchResult m = MatchUnique(gt, gt, SmallRegistry());
  int tp = 0;
  for (const auto& c : m.classes) {
    tp += static_cast<int>(c.tp.size());
    EXPECT_TRUE(c.fp.empty());
    EXPECT_TRUE(c.fn.empty());
    for (const auto& p : c.tp) EXPECT_EQ(p.iou, 1.0);
  }
  EXPECT_EQ(tp, 4);
}

TEST(MatchTest, ExactlyHalfIsNotAMatch) {
  // Car overlap 1 px, union 2 px.
  const PanopticMap gt = Draw({"aabb"}, {{'a', kCar1}, {'b', kRoad}});
  const PanopticMap pred = Draw({"abbb"}, {{'a', kCar1}, {'b', kRoad}});
  const auto t = IntersectionTable::Build(gt, pred, SmallRegistry());
  ASSERT_EQ(t.Iou(kCar1, kCar1), 0.5);
  const MatchResult unique = MatchUnique(t, SmallRegistry(), 0.5);
  EXPECT_TRUE(unique.Find(3)->tp.empty());
  EXPECT_EQ(unique.Find(3)->fn.size(), 1u);
  EXPECT_EQ(unique.Find(3)->fp.size(), 1u);
  const MatchResult optimal = MatchOptimal(t, SmallRegistry(), 0.5);
  EXPECT_EQ(Describe(unique), Describe(optimal));
  // Below 0.5 the threshold is inclusive.
  const MatchResult low = MatchOptimal(t, SmallRegistry(), 0.5 - 1e-9);
  EXPECT_EQ(low.Find(3)->tp.size(), 1u);
}

TEST(MatchTest, ThresholdArguments) {
  const auto t = IntersectionTable::Build(PanopticMap(1, 1), PanopticMap(1, 1),
                                          SmallRegistry());
  EXPECT_THROW(MatchUnique(t, SmallRegistry(), 0.4), InvalidArgumentError);
  EXPECT_THROW(MatchUnique(t, SmallRegistry(), 1.0), InvalidArgumentError);
  EXPECT_THROW(MatchOptimal(t, SmallRegistry(), 0.6), InvalidArgumentError);
  EXPECT_THROW(MatchOptimal(t, SmallRegistry(), 0.0), InvalidArgumentError);
  EXPECT_THROW(Match(t, SmallRegistry(), 0.0), InvalidArgumentError);
  EXPECT_THROW(Match(t, SmallRegistry(), 1.0), InvalidArgumentError);
  EXPECT_NO_THROW(Match(t, SmallRegistry(), 0.3));
  EXPECT_NO_THROW(Match(t, SmallRegistry(), 0.7));
}

TEST(MatchTest, VoidHeavyPredictionIsDiscarded) {
  // Person prediction of 10 px: 6 on void, 4 on road.
  const PanopticMap gt = Draw({"......aaaa", "aaaaaaaaaa"}, {{'a', kRoad}});
  const PanopticMap pred =
      Draw({"pppppppppp", "aaaaaaaaaa"}, {{'a', kRoad}, {'p', kPerson1}});
  const MatchResult m = MatchUnique(gt, pred, SmallRegistry());
  const ClassMatch* person = m.Find(4);
  ASSERT_NE(person, nullptr);
  EXPECT_TRUE(person->fp.empty());
  ASSERT_EQ(person->discarded.size(), 1u);
  EXPECT_EQ(person->discarded[0].key, kPerson1);
}

TEST(MatchTest, CrowdRules) {
  // GT crowd of cars covering the right half. A car prediction and a person
  // prediction each have 4 of their 7 pixels inside the crowd.
  const PanopticMap gt = Draw({"aaaaaaaCCCCCCC", "aaaaaaaCCCCCCC"},
                              {{'a', kRoad}, {'C', kCar1}}, {kCar1});
  const PanopticMap pred = Draw({"aaaacccccccaaa", "aaaappppppp..."},
                                {{'a', kRoad}, {'c', kCar2}, {'p', kPerson1}});
  const MatchResult m = MatchUnique(gt, pred, SmallRegistry());
  const ClassMatch* car = m.Find(3);
  ASSERT_NE(car, nullptr);
  EXPECT_TRUE(car->fn.empty());  // crowd regions are never false negatives
  EXPECT_TRUE(car->fp.empty());
  ASSERT_EQ(car->discarded.size(), 1u);
  const ClassMatch* person = m.Find(4);
  ASSERT_NE(person, nullptr);
  EXPECT_EQ(person->fp.size(), 1u);
  EXPECT_TRUE(person->discarded.empty());
}

TEST(MatchTest, CrowdSegmentIsNeverMatched) {
  const PanopticMap gt = Draw({"CCCC"}, {{'C', kCar1}}, {kCar1});
  const MatchResult m = MatchUnique(gt, Draw({"cccc"}, {{'c', kCar2}}),
                                    SmallRegistry());
  EXPECT_TRUE(m.Find(3)->tp.empty());
  EXPECT_EQ(m.Find(3)->discarded.size(), 1u);
}

TEST(MatchTest, InclusiveThresholdBelowHalf) {
  // IoU(A, q) = 0.5, IoU(A, p) = IoU(B, p) = 1/3.
  const PanopticMap gt = Draw({"AAAABBBB"}, {{'A', kCar1}, {'B', kCar2}});
  const PanopticMap pred =
      Draw({"qqpppp.."}, {{'p', SegmentKey{3, 7}}, {'q', SegmentKey{3, 8}}});
  const MatchResult m = MatchOptimal(gt, pred, SmallRegistry(), 0.3);
  const ClassMatch* car = m.Find(3);
  ASSERT_EQ(car->tp.size(), 2u);
  EXPECT_EQ(car->tp[0].pred, (SegmentKey{3, 8}));
  EXPECT_EQ(car->tp[1].pred, (SegmentKey{3, 7}));
}

// Exhaustive search over all matchings as a reference for the flow solver.
double BruteForceBest(int left, int right,
                      const std::vector<WeightedEdge>& edges) {
  std::vector<std::vector<double>> w(left, std::vector<double>(right, -1));
  for (const auto& e : edges) w[e.left][e.right] = std::max(w[e.left][e.right], e.weight);
  std::vector<char> used(right, 0);
  std::function<double(int)> go = [&](int l) -> double {
    if (l == left) return 0.0;
    double best = go(l + 1);
    for (int r = 0; r < right; ++r) {
      if (used[r] || w[l][r] <= 0) continue;
      used[r] = 1;
      best = std::max(best, w[l][r] + go(l + 1));
      used[r] = 0;
    }
    return best;
  };
  return go(0);
}

TEST(MaxWeightMatchingTest, AgreesWithExhaustiveSearch) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int left = std::uniform_int_distribution<>(1, 6)(rng);
    const int right = std::uniform_int_distribution<>(1, 6)(rng);
    std::vector<WeightedEdge> edges;
    for (int l = 0; l < left; ++l) {
      for (int r = 0; r < right; ++r) {
        if (std::uniform_int_distribution<>(0, 2)(rng) == 0) continue;
        edges.push_back(
            {l, r, std::uniform_real_distribution<>(0.01, 1.0)(rng)});
      }
    }
    const auto chosen = MaxWeightMatching(left, right, edges);
    double total = 0;
    std::set<int> ls, rs;
    for (int i : chosen) {
      total += edges[i].weight;
      EXPECT_TRUE(ls.insert(edges[i].left).second);
      EXPECT_TRUE(rs.insert(edges[i].right).second);
    }
    EXPECT_NEAR(total, BruteForceBest(left, right, edges), 1e-12)
        << "trial " << trial;
  }
}

TEST(MaxWeightMatchingTest, RejectsBadEdges) {
  std::vector<WeightedEdge> edges = {{0, 3, 0.5}};
  EXPECT_THROW(MaxWeightMatching(1, 2, edges), InvalidArgumentError);
}

TEST(MatchTest, UniqueAndOptimalAgreeOnRandomPairs) {
  std::mt19937_64 rng(11);
  const ClassRegistry registry = SmallRegistry();
  for (int i = 0; i < 100; ++i) {
    const auto pair = testing::RandomPair(rng);
    const auto t = IntersectionTable::Build(pair.gt, pair.pred, registry);
    EXPECT_EQ(Describe(MatchUnique(t, registry, 0.5)),
              Describe(MatchOptimal(t, registry, 0.5)));
    EXPECT_EQ(Describe(Match(t, registry, 0.5)),
              Describe(MatchUnique(t, registry, 0.5)));
  }
}

TEST(MatchTest, PartitionCoversEverySegment) {
  std::mt19937_64 rng(12);
  const ClassRegistry registry = SmallRegistry();
  for (int i = 0; i < 100; ++i) {
    const auto pair = testing::RandomPair(rng);
    const auto t = IntersectionTable::Build(pair.gt, pair.pred, registry);
    for (double thr : {0.2, 0.5, 0.8}) {
      const MatchResult m = Match(t, registry, thr);
      size_t gt_seen = 0, pred_seen = 0;
      for (const auto& c : m.classes) {
        gt_seen += c.tp.size() + c.fn.size();
        pred_seen += c.tp.size() + c.fp.size() + c.discarded.size();
        for (const auto& p : c.tp) {
          EXPECT_EQ(p.gt.class_id, c.class_id);
          EXPECT_EQ(p.pred.class_id, c.class_id);
          if (thr >= 0.5) {
            EXPECT_GT(p.iou, thr);
          } else {
            EXPECT_GE(p.iou, thr);
          }
        }
      }
      size_t non_crowd = 0;
      for (const auto& s : t.gt_segments()) non_crowd += s.is_crowd ? 0 : 1;
      EXPECT_EQ(gt_seen, non_crowd);
      EXPECT_EQ(pred_seen, t.pred_segments().size());
    }
  }
}

}  // namespace
}  // namespace panoptic
