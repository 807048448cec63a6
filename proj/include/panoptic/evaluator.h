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

// Dataset-level evaluation: pairing of ground-truth and prediction files,
// a worker pool over images, and in-order aggregation of per-image stats.

#ifndef PANOPTIC_EVALUATOR_H_
#define PANOPTIC_EVALUATOR_H_

#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "panoptic/matching.h"
#include "panoptic/metrics.h"
#include "panoptic/model.h"

namespace panoptic {

// Matches one canonicalized pair at config.iou_threshold.
MatchResult MatchPair(const PanopticMap& gt, const PanopticMap& pred,
                      const ClassRegistry& registry,
                      const MetricConfig& config = {});

PQStat EvaluatePair(const PanopticMap& gt, const PanopticMap& pred,
                    const ClassRegistry& registry,
                    const MetricConfig& config = {});

struct ImagePair {
  std::string stem;
  std::shared_ptr<const PanopticMap> gt;
  // Null when the prediction is missing; scored as an all-void map.
  std::shared_ptr<const PanopticMap> pred;
};

class PairSource {
 public:
  virtual ~PairSource() = default;
  virtual size_t size() const = 0;
  virtual std::string stem(size_t index) const = 0;
  // Must be safe to call concurrently for distinct indices.
  virtual ImagePair Load(size_t index) const = 0;
};

// Pairs `<stem>.png` + `<stem>.json` files of two directories by stem, or by
// an explicit manifest of "gt_stem pred_stem" lines.
class DirectoryDataset : public PairSource {
 public:
  // Throws FormatError listing prediction stems with no GT counterpart.
  DirectoryDataset(std::filesystem::path gt_dir,
                   std::filesystem::path pred_dir,
                   const ClassRegistry& registry,
                   const std::filesystem::path& manifest = {});

  size_t size() const override { return entries_.size(); }
  std::string stem(size_t index) const override { return entries_[index].gt; }
  ImagePair Load(size_t index) const override;

  // GT stems with no prediction file.
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  struct Entry {
    std::string gt;
    std::string pred;  // empty when missing
  };
  std::filesystem::path gt_dir_;
  std::filesystem::path pred_dir_;
  const ClassRegistry& registry_;
  std::vector<Entry> entries_;
  std::vector<std::string> missing_;
};

class InMemoryDataset : public PairSource {
 public:
  void Add(std::string stem, std::shared_ptr<const PanopticMap> gt,
           std::shared_ptr<const PanopticMap> pred);

  size_t size() const override { return pairs_.size(); }
  std::string stem(size_t index) const override { return pairs_[index].stem; }
  ImagePair Load(size_t index) const override { return pairs_[index]; }

 private:
  std::vector<ImagePair> pairs_;
};

// Runs fn(i) for i in [0, n) on `threads` workers pulling indices in order.
// The exception of the lowest failing index is rethrown.
void ParallelFor(size_t n, unsigned threads,
                 const std::function<void(size_t)>& fn);

// Matches every pair of `source` at config.iou_threshold.
std::vector<MatchResult> MatchDataset(const PairSource& source,
                                      const ClassRegistry& registry,
                                      const MetricConfig& config,
                                      unsigned threads);

struct Evaluation {
  std::vector<std::string> stems;
  std::vector<PQStat> per_image;
  std::vector<MatchResult> matches;  // filled when requested
  PQStat total;                      // merged in image order
  PQResult result;
};

Evaluation Evaluate(const PairSource& source, const ClassRegistry& registry,
                    const MetricConfig& config, unsigned threads,
                    bool keep_matches = false);

// Runs `fn` on the intersection table of every pair, in parallel.
void ForEachTable(
    const PairSource& source, const ClassRegistry& registry, unsigned threads,
    const std::function<void(size_t, const IntersectionTable&)>& fn);

}  // namespace panoptic

#endif  // PANOPTIC_EVALUATOR_H_
