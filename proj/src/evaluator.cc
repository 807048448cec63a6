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

#include "panoptic/evaluator.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "panoptic/io.h"
#include "panoptic/status.h"

namespace panoptic {

namespace fs = std::filesystem;

namespace {

// Stems of `<stem>.png` files in `dir` that have a `<stem>.json` sidecar.
std::set<std::string> ListStems(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::set<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") {
      continue;
    }
    const std::string stem = entry.path().stem().string();
    if (fs::exists(dir / (stem + ".json"))) stems.insert(stem);
  }
  return stems;
}

std::string JoinStems(const std::vector<std::string>& stems) {
  std::string out;
  for (size_t i = 0; i < stems.size(); ++i) {
    if (i) out += ", ";
    out += stems[i];
  }
  return out;
}

const PanopticMap& PredOrVoid(const ImagePair& pair,
                              std::optional<PanopticMap>& storage) {
  if (pair.pred) return *pair.pred;
  storage.emplace(pair.gt->width(), pair.gt->height());
  return *storage;
}

}  // namespace

MatchResult MatchPair(const PanopticMap& gt, const PanopticMap& pred,
                      const ClassRegistry& registry,
                      const MetricConfig& config) {
  const IntersectionTable table = IntersectionTable::Build(gt, pred, registry);
  return Match(table, registry, config.iou_threshold);
}

PQStat EvaluatePair(const PanopticMap& gt, const PanopticMap& pred,
                    const ClassRegistry& registry,
                    const MetricConfig& config) {
  return PqStats(MatchPair(gt, pred, registry, config));
}

DirectoryDataset::DirectoryDataset(fs::path gt_dir, fs::path pred_dir,
                                   const ClassRegistry& registry,
                                   const fs::path& manifest)
    : gt_dir_(std::move(gt_dir)),
      pred_dir_(std::move(pred_dir)),
      registry_(registry) {
  const std::set<std::string> gt_stems = ListStems(gt_dir_);
  const std::set<std::string> pred_stems = ListStems(pred_dir_);
  std::vector<std::string> unpaired;

  if (!manifest.empty()) {
    std::istringstream lines(ReadTextFile(manifest));
    std::string line;
    int line_no = 0;
    std::set<std::string> listed;
    while (std::getline(lines, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string gt, pred, extra;
      if (!(fields >> gt) || gt[0] == '#') continue;
      if (!(fields >> pred)) pred = gt;
      if (fields >> extra) {
        throw FormatError(manifest.string() + ":" + std::to_string(line_no) +
                          ": expected \"gt_stem [pred_stem]\"");
      }
      if (!gt_stems.count(gt)) {
        throw FormatError(manifest.string() + ":" + std::to_string(line_no) +
                          ": no ground truth for stem " + gt);
      }
      if (!listed.insert(gt).second) {
        throw FormatError(manifest.string() + ":" + std::to_string(line_no) +
                          ": stem " + gt + " listed twice");
      }
      if (pred_stems.count(pred)) {
        entries_.push_back({gt, pred});
      } else {
        entries_.push_back({gt, ""});
        missing_.push_back(gt);
      }
    }
    return;
  }

  for (const std::string& stem : pred_stems) {
    if (!gt_stems.count(stem)) unpaired.push_back(stem);
  }
  if (!unpaired.empty()) {
    throw FormatError("prediction files without ground truth: " +
                      JoinStems(unpaired));
  }
  for (const std::string& stem : gt_stems) {
    if (pred_stems.count(stem)) {
      entries_.push_back({stem, stem});
    } else {
      entries_.push_back({stem, ""});
      missing_.push_back(stem);
    }
  }
}

ImagePair DirectoryDataset::Load(size_t index) const {
  const Entry& e = entries_[index];
  ImagePair pair;
  pair.stem = e.gt;
  pair.gt = std::make_shared<const PanopticMap>(
      ReadPanoptic(PanopticFilePair::ForStem(gt_dir_, e.gt), registry_));
  if (!e.pred.empty()) {
    pair.pred = std::make_shared<const PanopticMap>(
        ReadPanoptic(PanopticFilePair::ForStem(pred_dir_, e.pred), registry_));
  }
  return pair;
}

void InMemoryDataset::Add(std::string stem,
                          std::shared_ptr<const PanopticMap> gt,
                          std::shared_ptr<const PanopticMap> pred) {
  if (!gt) throw InvalidArgumentError("ground truth map is required");
  pairs_.push_back({std::move(stem), std::move(gt), std::move(pred)});
}

void ParallelFor(size_t n, unsigned threads,
                 const std::function<void(size_t)>& fn) {
  if (threads == 0) throw InvalidArgumentError("threads must be >= 1");
  const size_t workers = std::min<size_t>(threads, n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<size_t> first_failure{n};
  std::mutex mu;
  std::exception_ptr failure;
  size_t failure_index = n;

  auto work = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      // Indices past a known failure cannot change which exception wins.
      if (i >= n || i > first_failure.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failure_index) {
          failure_index = i;
          failure = std::current_exception();
          first_failure.store(i);
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void ForEachTable(
    const PairSource& source, const ClassRegistry& registry, unsigned threads,
    const std::function<void(size_t, const IntersectionTable&)>& fn) {
  ParallelFor(source.size(), threads, [&](size_t i) {
    const ImagePair pair = source.Load(i);
    std::optional<PanopticMap> empty;
    const IntersectionTable table =
        IntersectionTable::Build(*pair.gt, PredOrVoid(pair, empty), registry);
    fn(i, table);
  });
}

std::vector<MatchResult> MatchDataset(const PairSource& source,
                                      const ClassRegistry& registry,
                                      const MetricConfig& config,
                                      unsigned threads) {
  config.Validate();
  std::vector<MatchResult> out(source.size());
  ForEachTable(source, registry, threads,
               [&](size_t i, const IntersectionTable& table) {
                 out[i] = Match(table, registry, config.iou_threshold);
               });
  return out;
}

Evaluation Evaluate(const PairSource& source, const ClassRegistry& registry,
                    const MetricConfig& config, unsigned threads,
                    bool keep_matches) {
  config.Validate();
  Evaluation eval;
  const size_t n = source.size();
  eval.stems.reserve(n);
  for (size_t i = 0; i < n; ++i) eval.stems.push_back(source.stem(i));
  eval.per_image.resize(n);
  if (keep_matches) eval.matches.resize(n);
  ForEachTable(source, registry, threads,
               [&](size_t i, const IntersectionTable& table) {
                 MatchResult m = Match(table, registry, config.iou_threshold);
                 eval.per_image[i] = PqStats(m);
                 if (keep_matches) eval.matches[i] = std::move(m);
               });
  for (const PQStat& s : eval.per_image) eval.total.Merge(s);
  eval.result = ComputePq(eval.total, registry, config);
  return eval;
}

}  // namespace panoptic
