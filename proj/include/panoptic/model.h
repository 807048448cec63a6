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

// Core data model: class registries, panoptic label rasters and segments.
//
// A panoptic map assigns every pixel a (class id, instance id) pair. Class id
// 0 with instance id 0 is the void label. Stuff classes carry no meaningful
// instance id; after CanonicalizeStuff every stuff pixel has instance id 0.

#ifndef PANOPTIC_MODEL_H_
#define PANOPTIC_MODEL_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace panoptic {

inline constexpr uint32_t kVoidClassId = 0;
inline constexpr uint32_t kMaxInstanceId = (1u << 16) - 1;

enum class SegmentKind { kStuff, kThing };

const char* SegmentKindName(SegmentKind kind);

struct SegmentKey {
  uint32_t class_id = kVoidClassId;
  uint32_t instance_id = 0;

  bool is_void() const { return class_id == kVoidClassId; }
  uint64_t packed() const {
    return (static_cast<uint64_t>(class_id) << 32) | instance_id;
  }
  static SegmentKey Void() { return {}; }

  friend auto operator<=>(const SegmentKey&, const SegmentKey&) = default;
};

std::string ToString(const SegmentKey& key);

struct SegmentKeyHash {
  size_t operator()(const SegmentKey& key) const {
    // splitmix64 finalizer
    uint64_t z = key.packed() + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<size_t>(z ^ (z >> 31));
  }
};

struct ClassInfo {
  uint32_t id = 0;
  std::string name;
  SegmentKind kind = SegmentKind::kStuff;

  bool is_thing() const { return kind == SegmentKind::kThing; }
};

// The label set partitioned into stuff and thing classes. Id 0 is reserved
// for void and can never be registered.
class ClassRegistry {
 public:
  ClassRegistry() = default;

  // Throws InvalidArgumentError on id 0 or a duplicate id.
  void Add(uint32_t id, std::string name, SegmentKind kind);

  const ClassInfo* Find(uint32_t id) const;
  bool Contains(uint32_t id) const { return Find(id) != nullptr; }
  bool IsThing(uint32_t id) const;
  bool IsStuff(uint32_t id) const;

  // Sorted by id.
  const std::vector<ClassInfo>& classes() const { return classes_; }
  size_t size() const { return classes_.size(); }
  bool empty() const { return classes_.empty(); }

  std::vector<uint32_t> StuffIds() const;
  std::vector<uint32_t> ThingIds() const;

 private:
  std::vector<ClassInfo> classes_;
  std::unordered_map<uint32_t, size_t> index_;
};

// Per-pixel (class, instance) raster plus the set of segments flagged as
// crowd/group regions. Immutable after construction.
class PanopticMap {
 public:
  PanopticMap() = default;
  PanopticMap(int width, int height);  // all void
  PanopticMap(int width, int height, std::vector<SegmentKey> labels,
              std::set<SegmentKey> crowd = {});

  int width() const { return width_; }
  int height() const { return height_; }
  size_t pixel_count() const { return labels_.size(); }

  const SegmentKey& at(int x, int y) const {
    return labels_[static_cast<size_t>(y) * width_ + x];
  }
  std::span<const SegmentKey> labels() const { return labels_; }
  const std::set<SegmentKey>& crowd() const { return crowd_; }
  bool IsCrowd(const SegmentKey& key) const { return crowd_.count(key) > 0; }

  // Distinct non-void keys, sorted.
  std::vector<SegmentKey> Keys() const;

  friend bool operator==(const PanopticMap&, const PanopticMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<SegmentKey> labels_;
  std::set<SegmentKey> crowd_;
};

struct Segment {
  SegmentKey key;
  int64_t area = 0;
  SegmentKind kind = SegmentKind::kStuff;
  bool is_crowd = false;
};

// One Segment per distinct non-void key, sorted by key. Throws
// ValidationError naming the first pixel whose class id is unknown.
std::vector<Segment> ExtractSegments(const PanopticMap& map,
                                     const ClassRegistry& registry);

// Resets the instance id of every stuff pixel to 0. Crowd flags on stuff
// segments are dropped along with their instance ids. Idempotent.
PanopticMap CanonicalizeStuff(const PanopticMap& map,
                              const ClassRegistry& registry);

struct Violation {
  enum class Kind {
    kUnknownClass,
    kCrowdOnStuff,
    kInstanceIdOverflow,
    kCrowdOnAbsentSegment,
    kMalformedVoid,
  };
  Kind kind;
  std::string message;
};

// Reports every violation; never throws. Empty iff the map is well formed.
// Unknown classes and instance overflows are reported once per offending
// key, at its first pixel in raster order.
std::vector<Violation> ValidateMap(const PanopticMap& map,
                                   const ClassRegistry& registry);

// Row-major binary mask.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height)
      : width_(width), height_(height),
        bits_(static_cast<size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return bits_.size(); }
  bool test(size_t index) const { return bits_[index] != 0; }
  bool test(int x, int y) const {
    return test(static_cast<size_t>(y) * width_ + x);
  }
  void set(size_t index, bool value = true) { bits_[index] = value ? 1 : 0; }
  void set(int x, int y, bool value = true) {
    set(static_cast<size_t>(y) * width_ + x, value);
  }
  int64_t area() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> bits_;
};

// A confidence-scored thing mask, as produced by an instance segmenter.
struct ScoredInstance {
  uint32_t class_id = 0;
  double score = 0.0;
  BinaryMask mask;
};

}  // namespace panoptic

#endif  // PANOPTIC_MODEL_H_
