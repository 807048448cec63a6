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

#include "panoptic/model.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "panoptic/status.h"

namespace panoptic {

const char* SegmentKindName(SegmentKind kind) {
  return kind == SegmentKind::kThing ? "thing" : "stuff";
}

std::string ToString(const SegmentKey& key) {
  std::ostringstream out;
  out << "(" << key.class_id << ", " << key.instance_id << ")";
  return out.str();
}

void ClassRegistry::Add(uint32_t id, std::string name, SegmentKind kind) {
  if (id == kVoidClassId) {
    throw InvalidArgumentError("class id 0 is reserved for void");
  }
  if (index_.count(id)) {
    throw InvalidArgumentError("duplicate class id " + std::to_string(id));
  }
  ClassInfo info{id, std::move(name), kind};
  auto pos = std::lower_bound(
      classes_.begin(), classes_.end(), id,
      [](const ClassInfo& c, uint32_t v) { return c.id < v; });
  classes_.insert(pos, std::move(info));
  index_.clear();
  for (size_t i = 0; i < classes_.size(); ++i) index_[classes_[i].id] = i;
}

const ClassInfo* ClassRegistry::Find(uint32_t id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &classes_[it->second];
}

bool ClassRegistry::IsThing(uint32_t id) const {
  const ClassInfo* info = Find(id);
  return info != nullptr && info->is_thing();
}

bool ClassRegistry::IsStuff(uint32_t id) const {
  const ClassInfo* info = Find(id);
  return info != nullptr && !info->is_thing();
}

std::vector<uint32_t> ClassRegistry::StuffIds() const {
  std::vector<uint32_t> ids;
  for (const auto& c : classes_) {
    if (!c.is_thing()) ids.push_back(c.id);
  }
  return ids;
}

std::vector<uint32_t> ClassRegistry::ThingIds() const {
  std::vector<uint32_t> ids;
  for (const auto& c : classes_) {
    if (c.is_thing()) ids.push_back(c.id);
  }
  return ids;
}

PanopticMap::PanopticMap(int width, int height)
    : PanopticMap(width, height,
                  std::vector<SegmentKey>(static_cast<size_t>(width) *
                                          std::max(height, 0))) {}

PanopticMap::PanopticMap(int width, int height, std::vector<SegmentKey> labels,
                         std::set<SegmentKey> crowd)
    : width_(width), height_(height), labels_(std::move(labels)),
      crowd_(std::move(crowd)) {
  if (width < 0 || height < 0) {
    throw InvalidArgumentError("negative map dimensions");
  }
  if (labels_.size() != static_cast<size_t>(width) * height) {
    throw InvalidArgumentError(
        "label buffer has " + std::to_string(labels_.size()) +
        " entries, expected " + std::to_string(int64_t{width} * height));
  }
  if (crowd_.count(SegmentKey::Void())) {
    throw InvalidArgumentError("void cannot be flagged as crowd");
  }
}

std::vector<SegmentKey> PanopticMap::Keys() const {
  std::vector<SegmentKey> keys;
  SegmentKey last = SegmentKey::Void();
  std::set<SegmentKey> seen;
  for (const SegmentKey& k : labels_) {
    if (k.is_void() || k == last) continue;
    last = k;
    seen.insert(k);
  }
  keys.assign(seen.begin(), seen.end());
  return keys;
}

std::vector<Segment> ExtractSegments(const PanopticMap& map,
                                     const ClassRegistry& registry) {
  std::map<SegmentKey, int64_t> areas;
  const auto labels = map.labels();
  size_t i = 0;
  while (i < labels.size()) {
    const SegmentKey key = labels[i];
    size_t j = i + 1;
    while (j < labels.size() && labels[j] == key) ++j;
    if (!key.is_void()) {
      if (!registry.Contains(key.class_id)) {
        const int x = static_cast<int>(i % map.width());
        const int y = static_cast<int>(i / map.width());
        throw ValidationError("unknown class id " +
                              std::to_string(key.class_id) + " at pixel (" +
                              std::to_string(x) + ", " + std::to_string(y) +
                              ")");
      }
      areas[key] += static_cast<int64_t>(j - i);
    }
    i = j;
  }
  std::vector<Segment> segments;
  segments.reserve(areas.size());
  for (const auto& [key, area] : areas) {
    const ClassInfo* info = registry.Find(key.class_id);
    segments.push_back({key, area, info->kind, map.IsCrowd(key)});
  }
  return segments;
}

PanopticMap CanonicalizeStuff(const PanopticMap& map,
                              const ClassRegistry& registry) {
  std::vector<SegmentKey> labels(map.labels().begin(), map.labels().end());
  for (SegmentKey& k : labels) {
    if (!k.is_void() && k.instance_id != 0 && registry.IsStuff(k.class_id)) {
      k.instance_id = 0;
    }
  }
  std::set<SegmentKey> crowd;
  for (const SegmentKey& k : map.crowd()) {
    if (!registry.IsStuff(k.class_id)) crowd.insert(k);
  }
  return PanopticMap(map.width(), map.height(), std::move(labels),
                     std::move(crowd));
}

std::vector<Violation> ValidateMap(const PanopticMap& map,
                                   const ClassRegistry& registry) {
  std::vector<Violation> report;
  std::set<SegmentKey> reported;
  std::set<SegmentKey> present;
  const auto labels = map.labels();
  for (size_t i = 0; i < labels.size(); ++i) {
    const SegmentKey& key = labels[i];
    if (key.is_void()) {
      if (key.instance_id != 0 && reported.insert(key).second) {
        report.push_back({Violation::Kind::kMalformedVoid,
                          "void pixel with nonzero instance id " +
                              std::to_string(key.instance_id)});
      }
      continue;
    }
    if (i > 0 && labels[i - 1] == key) continue;
    present.insert(key);
    if (reported.count(key)) continue;
    const int x = static_cast<int>(i % map.width());
    const int y = static_cast<int>(i / map.width());
    const std::string where =
        " at pixel (" + std::to_string(x) + ", " + std::to_string(y) + ")";
    if (!registry.Contains(key.class_id)) {
      reported.insert(key);
      report.push_back({Violation::Kind::kUnknownClass,
                        "unknown class id " + std::to_string(key.class_id) +
                            where});
    } else if (key.instance_id > kMaxInstanceId) {
      reported.insert(key);
      report.push_back({Violation::Kind::kInstanceIdOverflow,
                        "instance id " + std::to_string(key.instance_id) +
                            " of class " + std::to_string(key.class_id) +
                            " exceeds " + std::to_string(kMaxInstanceId) +
                            where});
    }
  }
  for (const SegmentKey& key : map.crowd()) {
    if (!present.count(key)) {
      report.push_back({Violation::Kind::kCrowdOnAbsentSegment,
                        "crowd flag on absent segment " + ToString(key)});
    } else if (registry.IsStuff(key.class_id)) {
      report.push_back({Violation::Kind::kCrowdOnStuff,
                        "crowd flag on stuff segment " + ToString(key)});
    }
  }
  return report;
}

int64_t BinaryMask::area() const {
  return std::accumulate(bits_.begin(), bits_.end(), int64_t{0});
}

}  // namespace panoptic
