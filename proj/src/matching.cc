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

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "panoptic/status.h"

namespace panoptic {

namespace {

// Maps raw keys seen during the joint scan to dense indices, canonicalizing
// stuff keys. Runs make consecutive lookups of the same key common, so the
// last lookup is cached.
class KeyIndexer {
 public:
  KeyIndexer(const ClassRegistry& registry, const char* role, int width)
      : registry_(registry), role_(role), width_(width) {}

  int32_t Lookup(const SegmentKey& raw, size_t pixel) {
    if (raw.is_void()) return IntersectionTable::kVoid;
    const uint64_t packed = raw.packed();
    if (has_last_ && packed == last_raw_) return last_index_;
    auto it = raw_to_index_.find(packed);
    int32_t index;
    if (it != raw_to_index_.end()) {
      index = it->second;
    } else {
      const ClassInfo* info = registry_.Find(raw.class_id);
      if (info == nullptr) {
        throw ValidationError(
            std::string(role_) + " map: unknown class id " +
            std::to_string(raw.class_id) + " at pixel (" +
            std::to_string(pixel % width_) + ", " +
            std::to_string(pixel / width_) + ")");
      }
      SegmentKey canonical = raw;
      if (!info->is_thing()) canonical.instance_id = 0;
      auto [cit, inserted] = canonical_to_index_.try_emplace(
          canonical.packed(), static_cast<int32_t>(keys_.size()));
      if (inserted) {
        keys_.push_back(canonical);
        areas_.push_back(0);
      }
      index = cit->second;
      raw_to_index_.emplace(packed, index);
    }
    has_last_ = true;
    last_raw_ = packed;
    last_index_ = index;
    return index;
  }

  void AddArea(int32_t index, int64_t n) { areas_[index] += n; }
  const std::vector<SegmentKey>& keys() const { return keys_; }
  const std::vector<int64_t>& areas() const { return areas_; }

 private:
  const ClassRegistry& registry_;
  const char* role_;
  size_t width_;
  std::unordered_map<uint64_t, int32_t> raw_to_index_;
  std::unordered_map<uint64_t, int32_t> canonical_to_index_;
  std::vector<SegmentKey> keys_;
  std::vector<int64_t> areas_;
  bool has_last_ = false;
  uint64_t last_raw_ = 0;
  int32_t last_index_ = 0;
};

// Permutation that sorts `keys`, and its inverse.
std::pair<std::vector<int32_t>, std::vector<int32_t>> SortOrder(
    const std::vector<SegmentKey>& keys) {
  std::vector<int32_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int32_t a, int32_t b) { return keys[a] < keys[b]; });
  std::vector<int32_t> rank(keys.size());
  for (size_t i = 0; i < order.size(); ++i) {
    rank[order[i]] = static_cast<int32_t>(i);
  }
  return {std::move(order), std::move(rank)};
}

void CheckThreshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgumentError("IoU threshold must lie in (0, 1), got " +
                               std::to_string(threshold));
  }
}

// Builds the per-class partition once the matched (gt, pred) index pairs are
// known.
MatchResult Assemble(const IntersectionTable& table,
                     const std::vector<std::pair<int32_t, int32_t>>& matched,
                     double threshold) {
  const auto gts = table.gt_segments();
  const auto preds = table.pred_segments();
  std::vector<char> gt_used(gts.size(), 0);
  std::vector<char> pred_used(preds.size(), 0);
  std::map<uint32_t, ClassMatch> by_class;
  for (const auto& s : gts) by_class[s.key.class_id].class_id = s.key.class_id;
  for (const auto& s : preds) by_class[s.key.class_id].class_id = s.key.class_id;

  std::vector<std::pair<int32_t, int32_t>> sorted = matched;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [g, p] : sorted) {
    gt_used[g] = 1;
    pred_used[p] = 1;
    by_class[gts[g].key.class_id].tp.push_back(
        {gts[g].key, preds[p].key, table.Iou(gts[g].key, preds[p].key),
         gts[g].area, preds[p].area});
  }
  for (size_t g = 0; g < gts.size(); ++g) {
    if (gt_used[g] || gts[g].is_crowd) continue;
    by_class[gts[g].key.class_id].fn.push_back({gts[g].key, gts[g].area});
  }
  std::vector<int32_t> unmatched;
  for (size_t p = 0; p < preds.size(); ++p) {
    if (!pred_used[p]) unmatched.push_back(static_cast<int32_t>(p));
  }
  const FilteredPredictions filtered =
      FilterUnmatched(unmatched, table, threshold);
  for (int32_t p : filtered.fp) {
    by_class[preds[p].key.class_id].fp.push_back({preds[p].key, preds[p].area});
  }
  for (int32_t p : filtered.discarded) {
    by_class[preds[p].key.class_id].discarded.push_back(
        {preds[p].key, preds[p].area});
  }

  MatchResult result;
  result.threshold = threshold;
  result.classes.reserve(by_class.size());
  for (auto& [id, cm] : by_class) result.classes.push_back(std::move(cm));
  return result;
}

struct Candidate {
  int32_t gt;
  int32_t pred;
  double iou;
};

// Same-class, non-crowd candidate pairs accepted by `accept(iou)`, sorted by
// (gt, pred), i.e. lexicographically by key.
template <typename Accept>
std::vector<Candidate> Candidates(const IntersectionTable& table,
                                  Accept accept) {
  const auto gts = table.gt_segments();
  const auto preds = table.pred_segments();
  std::vector<Candidate> out;
  for (const auto& e : table.entries()) {
    if (e.gt == IntersectionTable::kVoid) continue;
    const SegmentInfo& g = gts[e.gt];
    if (g.is_crowd || g.key.class_id != preds[e.pred].key.class_id) continue;
    const double iou = table.Iou(e);
    if (accept(iou)) out.push_back({e.gt, e.pred, iou});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.gt, a.pred) < std::tie(b.gt, b.pred);
  });
  return out;
}

double TotalWeight(std::span<const WeightedEdge> edges,
                   const std::vector<int>& chosen) {
  double total = 0.0;
  for (int i : chosen) total += edges[i].weight;
  return total;
}

// Maximum-weight matching of one connected component, choosing among optimal
// matchings the one that greedily includes the smallest edges in (left,
// right) order. `edges` must already be sorted that way.
std::vector<int> LexOptimalMatching(int num_left, int num_right,
                                    const std::vector<WeightedEdge>& edges) {
  const double best = TotalWeight(edges, MaxWeightMatching(num_left, num_right,
                                                           edges));
  const double tol = 1e-12 * std::max(1.0, best);
  std::vector<char> left_used(num_left, 0), right_used(num_right, 0);
  std::vector<int> chosen;
  double chosen_weight = 0.0;
  std::vector<WeightedEdge> rest;
  for (size_t i = 0; i < edges.size(); ++i) {
    if (chosen_weight >= best - tol) break;
    const WeightedEdge& e = edges[i];
    if (left_used[e.left] || right_used[e.right]) continue;
    rest.clear();
    for (const WeightedEdge& f : edges) {
      if (left_used[f.left] || right_used[f.right] || f.left == e.left ||
          f.right == e.right) {
        continue;
      }
      rest.push_back(f);
    }
    const double with_e = chosen_weight + e.weight +
                          TotalWeight(rest, MaxWeightMatching(
                                                num_left, num_right, rest));
    if (with_e >= best - tol) {
      chosen.push_back(static_cast<int>(i));
      chosen_weight += e.weight;
      left_used[e.left] = 1;
      right_used[e.right] = 1;
    }
  }
  return chosen;
}

int Find(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

IntersectionTable IntersectionTable::Build(const PanopticMap& gt,
                                           const PanopticMap& pred,
                                           const ClassRegistry& registry) {
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    throw InvalidArgumentError(
        "dimension mismatch: ground truth is " + std::to_string(gt.width()) +
        "x" + std::to_string(gt.height()) + ", prediction is " +
        std::to_string(pred.width()) + "x" + std::to_string(pred.height()));
  }
  const int width = std::max(gt.width(), 1);
  KeyIndexer gt_index(registry, "ground truth", width);
  KeyIndexer pred_index(registry, "prediction", width);
  // (gt index + 1) << 32 | pred index
  std::unordered_map<uint64_t, int64_t> pairs;

  const auto g = gt.labels();
  const auto p = pred.labels();
  const size_t n = g.size();
  size_t i = 0;
  while (i < n) {
    const SegmentKey gk = g[i];
    const SegmentKey pk = p[i];
    size_t j = i + 1;
    while (j < n && g[j] == gk && p[j] == pk) ++j;
    const int64_t run = static_cast<int64_t>(j - i);
    const int32_t gi = gt_index.Lookup(gk, i);
    const int32_t pi = pred_index.Lookup(pk, i);
    if (gi != kVoid) gt_index.AddArea(gi, run);
    if (pi != kVoid) {
      pred_index.AddArea(pi, run);
      pairs[(static_cast<uint64_t>(gi + 1) << 32) | static_cast<uint32_t>(pi)] +=
          run;
    }
    i = j;
  }

  IntersectionTable table;
  const auto [gt_order, gt_rank] = SortOrder(gt_index.keys());
  const auto [pred_order, pred_rank] = SortOrder(pred_index.keys());
  for (int32_t idx : gt_order) {
    const SegmentKey key = gt_index.keys()[idx];
    const bool crowd = registry.IsThing(key.class_id) && gt.IsCrowd(key);
    table.gt_.push_back({key, gt_index.areas()[idx], crowd});
  }
  for (int32_t idx : pred_order) {
    table.pred_.push_back({pred_index.keys()[idx], pred_index.areas()[idx],
                           false});
  }
  table.entries_.reserve(pairs.size());
  for (const auto& [packed, count] : pairs) {
    const int32_t raw_gt = static_cast<int32_t>(packed >> 32) - 1;
    const int32_t raw_pred = static_cast<int32_t>(packed & 0xffffffffu);
    table.entries_.push_back(
        {raw_gt == kVoid ? kVoid : gt_rank[raw_gt], pred_rank[raw_pred], count});
  }
  std::sort(table.entries_.begin(), table.entries_.end(),
            [](const Entry& a, const Entry& b) {
              return std::tie(a.pred, a.gt) < std::tie(b.pred, b.gt);
            });
  table.void_overlap_.assign(table.pred_.size(), 0);
  table.crowd_overlap_.assign(table.pred_.size(), 0);
  for (const Entry& e : table.entries_) {
    if (e.gt == kVoid) {
      table.void_overlap_[e.pred] += e.count;
      continue;
    }
    const SegmentInfo& gs = table.gt_[e.gt];
    if (gs.is_crowd && gs.key.class_id == table.pred_[e.pred].key.class_id) {
      table.crowd_overlap_[e.pred] += e.count;
    }
  }
  return table;
}

int32_t IntersectionTable::FindGt(const SegmentKey& key) const {
  auto it = std::lower_bound(
      gt_.begin(), gt_.end(), key,
      [](const SegmentInfo& s, const SegmentKey& k) { return s.key < k; });
  if (it == gt_.end() || it->key != key) return kVoid;
  return static_cast<int32_t>(it - gt_.begin());
}

int32_t IntersectionTable::FindPred(const SegmentKey& key) const {
  auto it = std::lower_bound(
      pred_.begin(), pred_.end(), key,
      [](const SegmentInfo& s, const SegmentKey& k) { return s.key < k; });
  if (it == pred_.end() || it->key != key) return kVoid;
  return static_cast<int32_t>(it - pred_.begin());
}

int64_t IntersectionTable::Overlap(const SegmentKey& gt,
                                   const SegmentKey& pred) const {
  const int32_t p = FindPred(pred);
  if (p == kVoid) return 0;
  const int32_t g = gt.is_void() ? kVoid : FindGt(gt);
  if (g == kVoid && !gt.is_void()) return 0;
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::make_pair(p, g),
                             [](const Entry& e, const std::pair<int, int>& k) {
                               return std::tie(e.pred, e.gt) <
                                      std::tie(k.first, k.second);
                             });
  if (it == entries_.end() || it->pred != p || it->gt != g) return 0;
  return it->count;
}

double IntersectionTable::Iou(const Entry& entry) const {
  const int64_t g_area = gt_[entry.gt].area;
  const int64_t p_area = pred_[entry.pred].area;
  const int64_t uni =
      g_area + p_area - entry.count - void_overlap_[entry.pred];
  return static_cast<double>(entry.count) / static_cast<double>(uni);
}

double IntersectionTable::Iou(const SegmentKey& gt,
                              const SegmentKey& pred) const {
  if (gt.class_id != pred.class_id) {
    throw InvalidArgumentError("IoU requested across classes: " +
                               ToString(gt) + " vs " + ToString(pred));
  }
  const int32_t g = FindGt(gt);
  const int32_t p = FindPred(pred);
  if (g == kVoid || p == kVoid) {
    throw InvalidArgumentError("IoU requested for absent segment " +
                               ToString(g == kVoid ? gt : pred));
  }
  const int64_t overlap = Overlap(gt, pred);
  const int64_t uni =
      gt_[g].area + pred_[p].area - overlap - void_overlap_[p];
  return static_cast<double>(overlap) / static_cast<double>(uni);
}

const ClassMatch* MatchResult::Find(uint32_t class_id) const {
  auto it = std::lower_bound(
      classes.begin(), classes.end(), class_id,
      [](const ClassMatch& c, uint32_t id) { return c.class_id < id; });
  if (it == classes.end() || it->class_id != class_id) return nullptr;
  return &*it;
}

FilteredPredictions FilterUnmatched(std::span<const int32_t> unmatched_preds,
                                    const IntersectionTable& table,
                                    double threshold) {
  FilteredPredictions out;
  const auto preds = table.pred_segments();
  for (int32_t p : unmatched_preds) {
    const double area = static_cast<double>(preds[p].area);
    const double void_fraction = table.VoidOverlap(p) / area;
    const double crowd_fraction = table.CrowdOverlap(p) / area;
    if (void_fraction > threshold || crowd_fraction > threshold) {
      out.discarded.push_back(p);
    } else {
      out.fp.push_back(p);
    }
  }
  return out;
}

MatchResult MatchUnique(const IntersectionTable& table,
                        const ClassRegistry& registry, double threshold) {
  (void)registry;
  CheckThreshold(threshold);
  if (threshold < 0.5) {
    throw InvalidArgumentError(
        "unique matching requires a threshold of at least 0.5");
  }
  std::vector<Candidate> cands =
      Candidates(table, [threshold](double iou) { return iou > threshold; });
  // Uniqueness makes conflicts impossible; the ordering only fixes which pair
  // would win if that ever failed.
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.iou > b.iou;
                   });
  std::set<int32_t> gt_used, pred_used;
  std::vector<std::pair<int32_t, int32_t>> matched;
  for (const Candidate& c : cands) {
    if (gt_used.count(c.gt) || pred_used.count(c.pred)) continue;
    gt_used.insert(c.gt);
    pred_used.insert(c.pred);
    matched.emplace_back(c.gt, c.pred);
  }
  return Assemble(table, matched, threshold);
}

MatchResult MatchUnique(const PanopticMap& gt, const PanopticMap& pred,
                        const ClassRegistry& registry, double threshold) {
  return MatchUnique(IntersectionTable::Build(gt, pred, registry), registry,
                     threshold);
}

MatchResult MatchOptimal(const IntersectionTable& table,
                         const ClassRegistry& registry, double threshold) {
  (void)registry;
  if (!(threshold > 0.0 && threshold <= 0.5)) {
    throw InvalidArgumentError(
        "optimal matching requires a threshold in (0, 0.5], got " +
        std::to_string(threshold));
  }
  const bool strict = threshold >= 0.5;
  const std::vector<Candidate> cands =
      Candidates(table, [threshold, strict](double iou) {
        return strict ? iou > threshold : iou >= threshold;
      });

  // Connected components over gt nodes [0, G) and pred nodes [G, G + P).
  const int num_gt = static_cast<int>(table.gt_segments().size());
  const int num_pred = static_cast<int>(table.pred_segments().size());
  std::vector<int> parent(num_gt + num_pred);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Candidate& c : cands) {
    const int a = Find(parent, c.gt);
    const int b = Find(parent, num_gt + c.pred);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<int, std::vector<Candidate>> components;
  for (const Candidate& c : cands) {
    components[Find(parent, c.gt)].push_back(c);
  }

  std::vector<std::pair<int32_t, int32_t>> matched;
  for (const auto& [root, edges] : components) {
    if (edges.size() == 1) {
      matched.emplace_back(edges[0].gt, edges[0].pred);
      continue;
    }
    // Local renumbering keeps the (gt, pred) order.
    std::map<int32_t, int> left, right;
    for (const Candidate& c : edges) {
      left.emplace(c.gt, 0);
      right.emplace(c.pred, 0);
    }
    int k = 0;
    for (auto& [g, local] : left) local = k++;
    std::vector<int32_t> right_ids;
    k = 0;
    for (auto& [p, local] : right) {
      local = k++;
      right_ids.push_back(p);
    }
    std::vector<int32_t> left_ids;
    for (const auto& [g, local] : left) left_ids.push_back(g);
    std::vector<WeightedEdge> local_edges;
    local_edges.reserve(edges.size());
    for (const Candidate& c : edges) {
      local_edges.push_back({left[c.gt], right[c.pred], c.iou});
    }
    for (int idx : LexOptimalMatching(static_cast<int>(left.size()),
                                      static_cast<int>(right.size()),
                                      local_edges)) {
      matched.emplace_back(left_ids[local_edges[idx].left],
                           right_ids[local_edges[idx].right]);
    }
  }
  return Assemble(table, matched, threshold);
}

MatchResult MatchOptimal(const PanopticMap& gt, const PanopticMap& pred,
                         const ClassRegistry& registry, double threshold) {
  return MatchOptimal(IntersectionTable::Build(gt, pred, registry), registry,
                      threshold);
}

MatchResult Match(const IntersectionTable& table, const ClassRegistry& registry,
                  double threshold) {
  CheckThreshold(threshold);
  if (threshold >= 0.5) return MatchUnique(table, registry, threshold);
  return MatchOptimal(table, registry, threshold);
}

std::vector<int> MaxWeightMatching(int num_left, int num_right,
                                   std::span<const WeightedEdge> edges) {
  // Successive shortest augmenting paths on the residual flow network
  // source -> left -> right -> sink with cost -weight on the middle arcs.
  // Each augmentation adds one pair; stop once no path has negative cost.
  struct Arc {
    int to;
    int cap;
    double cost;
    int rev;
    int edge;  // index into `edges` for left->right arcs, else -1
  };
  const int source = 0;
  const int sink = num_left + num_right + 1;
  const int num_nodes = sink + 1;
  std::vector<std::vector<Arc>> graph(num_nodes);
  auto add_arc = [&](int from, int to, double cost, int edge) {
    graph[from].push_back({to, 1, cost, static_cast<int>(graph[to].size()),
                           edge});
    graph[to].push_back({from, 0, -cost,
                         static_cast<int>(graph[from].size()) - 1, -1});
  };
  std::vector<char> has_left(num_left, 0), has_right(num_right, 0);
  for (size_t i = 0; i < edges.size(); ++i) {
    const WeightedEdge& e = edges[i];
    if (e.left < 0 || e.left >= num_left || e.right < 0 ||
        e.right >= num_right) {
      throw InvalidArgumentError("matching edge endpoint out of range");
    }
    if (!(e.weight > 0.0)) continue;
    has_left[e.left] = 1;
    has_right[e.right] = 1;
    add_arc(1 + e.left, 1 + num_left + e.right, -e.weight,
            static_cast<int>(i));
  }
  for (int l = 0; l < num_left; ++l) {
    if (has_left[l]) add_arc(source, 1 + l, 0.0, -1);
  }
  for (int r = 0; r < num_right; ++r) {
    if (has_right[r]) add_arc(1 + num_left + r, sink, 0.0, -1);
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(num_nodes);
  std::vector<std::pair<int, int>> prev(num_nodes);  // (node, arc index)
  const int max_pairs = std::min(num_left, num_right);
  for (int round = 0; round < max_pairs; ++round) {
    std::fill(dist.begin(), dist.end(), kInf);
    dist[source] = 0.0;
    // Bellman-Ford; the residual graph never has negative cycles here.
    for (int pass = 0; pass < num_nodes; ++pass) {
      bool changed = false;
      for (int u = 0; u < num_nodes; ++u) {
        if (dist[u] == kInf) continue;
        for (int a = 0; a < static_cast<int>(graph[u].size()); ++a) {
          const Arc& arc = graph[u][a];
          if (arc.cap <= 0) continue;
          const double nd = dist[u] + arc.cost;
          if (nd < dist[arc.to] - 1e-15) {
            dist[arc.to] = nd;
            prev[arc.to] = {u, a};
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[sink] == kInf || dist[sink] >= -1e-15) break;
    for (int v = sink; v != source; v = prev[v].first) {
      Arc& arc = graph[prev[v].first][prev[v].second];
      arc.cap -= 1;
      graph[v][arc.rev].cap += 1;
    }
  }

  std::vector<int> chosen;
  for (int l = 0; l < num_left; ++l) {
    for (const Arc& arc : graph[1 + l]) {
      if (arc.edge >= 0 && arc.cap == 0) chosen.push_back(arc.edge);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace panoptic
