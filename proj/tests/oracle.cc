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

#include "oracle.h"

#include <algorithm>
#include <iterator>

namespace panoptic::oracle {

namespace {

size_t IntersectionSize(const PixelSet& a, const PixelSet& b) {
  PixelSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.begin()));
  return out.size();
}

struct Search {
  const std::vector<std::vector<double>>* iou;  // [gt][pred], <0 = forbidden
  std::vector<char> pred_used;
  std::vector<int> current;
  std::vector<int> best;
  double best_sum = -1.0;
  double current_sum = 0.0;

  void Run(size_t g) {
    const auto& table = *iou;
    if (g == table.size()) {
      if (current_sum > best_sum) {
        best_sum = current_sum;
        best = current;
      }
      return;
    }
    current[g] = -1;
    Run(g + 1);
    for (size_t p = 0; p < pred_used.size(); ++p) {
      if (pred_used[p] || table[g][p] < 0.0) continue;
      pred_used[p] = 1;
      current[g] = static_cast<int>(p);
      current_sum += table[g][p];
      Run(g + 1);
      current_sum -= table[g][p];
      pred_used[p] = 0;
    }
    current[g] = -1;
  }
};

void Average(OracleResult& r, const ClassRegistry& registry) {
  double sum_all = 0, sum_stuff = 0, sum_things = 0;
  int n_all = 0, n_stuff = 0, n_things = 0;
  for (const auto& [id, c] : r.per_class) {
    if (c.tp + c.fp + c.fn == 0) continue;
    const double pq = c.iou_sum / (c.tp + 0.5 * c.fp + 0.5 * c.fn);
    sum_all += pq;
    ++n_all;
    if (registry.IsThing(id)) {
      sum_things += pq;
      ++n_things;
    } else {
      sum_stuff += pq;
      ++n_stuff;
    }
  }
  r.classes_all = n_all;
  r.pq_all = n_all ? sum_all / n_all : 0.0;
  r.pq_stuff = n_stuff ? sum_stuff / n_stuff : 0.0;
  r.pq_things = n_things ? sum_things / n_things : 0.0;
}

}  // namespace

std::map<SegmentKey, PixelSet> Segments(const PanopticMap& map,
                                        const ClassRegistry& registry) {
  std::map<SegmentKey, PixelSet> out;
  const auto labels = map.labels();
  for (size_t i = 0; i < labels.size(); ++i) {
    SegmentKey k = labels[i];
    if (k.is_void()) continue;
    if (!registry.IsThing(k.class_id)) k.instance_id = 0;
    out[k].insert(i);
  }
  return out;
}

double SetIou(const PixelSet& g, const PixelSet& p, const PixelSet& gt_void) {
  PixelSet uni;
  std::set_union(g.begin(), g.end(), p.begin(), p.end(),
                 std::inserter(uni, uni.begin()));
  PixelSet counted;
  std::set_difference(uni.begin(), uni.end(), gt_void.begin(), gt_void.end(),
                      std::inserter(counted, counted.begin()));
  return static_cast<double>(IntersectionSize(g, p)) /
         static_cast<double>(counted.size());
}

OracleResult Evaluate(const PanopticMap& gt, const PanopticMap& pred,
                      const ClassRegistry& registry, double threshold) {
  const auto gt_segs = Segments(gt, registry);
  const auto pred_segs = Segments(pred, registry);
  PixelSet gt_void;
  for (size_t i = 0; i < gt.labels().size(); ++i) {
    if (gt.labels()[i].is_void()) gt_void.insert(i);
  }

  std::set<uint32_t> classes;
  for (const auto& [k, s] : gt_segs) classes.insert(k.class_id);
  for (const auto& [k, s] : pred_segs) classes.insert(k.class_id);

  OracleResult result;
  for (uint32_t c : classes) {
    OracleClass& oc = result.per_class[c];
    std::vector<SegmentKey> g_keys, p_keys;
    PixelSet crowd_pixels;
    for (const auto& [k, s] : gt_segs) {
      if (k.class_id != c) continue;
      if (registry.IsThing(c) && gt.IsCrowd(k)) {
        crowd_pixels.insert(s.begin(), s.end());
      } else {
        g_keys.push_back(k);
      }
    }
    for (const auto& [k, s] : pred_segs) {
      if (k.class_id == c) p_keys.push_back(k);
    }
    oc.gt_non_crowd = static_cast<int64_t>(g_keys.size());
    oc.pred_segments = static_cast<int64_t>(p_keys.size());

    std::vector<std::vector<double>> iou(
        g_keys.size(), std::vector<double>(p_keys.size(), -1.0));
    for (size_t g = 0; g < g_keys.size(); ++g) {
      for (size_t p = 0; p < p_keys.size(); ++p) {
        const double v = SetIou(gt_segs.at(g_keys[g]), pred_segs.at(p_keys[p]),
                                gt_void);
        const bool ok = threshold >= 0.5 ? v > threshold : v >= threshold;
        if (ok && v > 0.0) iou[g][p] = v;
      }
    }
    Search search;
    search.iou = &iou;
    search.pred_used.assign(p_keys.size(), 0);
    search.current.assign(g_keys.size(), -1);
    search.Run(0);

    std::vector<char> pred_matched(p_keys.size(), 0);
    for (size_t g = 0; g < g_keys.size(); ++g) {
      const int p = search.best[g];
      if (p < 0) {
        ++oc.fn;
        continue;
      }
      ++oc.tp;
      oc.iou_sum += iou[g][p];
      pred_matched[p] = 1;
      oc.matches.emplace_back(g_keys[g], p_keys[p]);
    }
    for (size_t p = 0; p < p_keys.size(); ++p) {
      if (pred_matched[p]) continue;
      const PixelSet& ps = pred_segs.at(p_keys[p]);
      const double area = static_cast<double>(ps.size());
      const double on_void = IntersectionSize(ps, gt_void) / area;
      const double on_crowd = IntersectionSize(ps, crowd_pixels) / area;
      if (on_void > threshold || on_crowd > threshold) {
        ++oc.discarded;
      } else {
        ++oc.fp;
      }
    }
  }
  Average(result, registry);
  return result;
}

OracleResult Merge(const std::vector<OracleResult>& images,
                   const ClassRegistry& registry) {
  OracleResult out;
  for (const OracleResult& r : images) {
    for (const auto& [id, c] : r.per_class) {
      OracleClass& m = out.per_class[id];
      m.tp += c.tp;
      m.fp += c.fp;
      m.fn += c.fn;
      m.discarded += c.discarded;
      m.iou_sum += c.iou_sum;
      m.gt_non_crowd += c.gt_non_crowd;
      m.pred_segments += c.pred_segments;
    }
  }
  Average(out, registry);
  return out;
}

}  // namespace panoptic::oracle
