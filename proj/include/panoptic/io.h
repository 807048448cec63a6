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

// File formats.
//
// Panoptic maps are stored as a PNG/JSON pair. The 8-bit RGB PNG holds a
// segment id per pixel, id = R + 256 * G + 65536 * B, with 0 for void. The
// JSON sidecar lists every segment id once:
//
//   {"width": W, "height": H,
//    "segments_info": [{"id": 1, "category_id": 7, "instance_id": 1,
//                       "iscrowd": 0}, ...]}
//
// "instance_id" is optional on input; when absent, thing segments of a class
// are numbered 1, 2, ... in id order and stuff segments get 0.
//
// Semantic maps are 16-bit grayscale PNGs holding a class id per pixel.
//
// Class registries are JSON arrays of {"id", "name", "isthing"}; an object
// with a "categories" array is accepted too.
//
// Scored instances are JSON: {"instances": [{"category_id", "score",
// "counts"}]}, where counts are alternating run lengths over the row-major
// mask, starting with a run of zeros.

#ifndef PANOPTIC_IO_H_
#define PANOPTIC_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panoptic/metrics.h"
#include "panoptic/model.h"

namespace panoptic {

struct PanopticFilePair {
  std::filesystem::path raster_path;
  std::filesystem::path sidecar_path;

  // `<stem>.png` and `<stem>.json` inside `dir`.
  static PanopticFilePair ForStem(const std::filesystem::path& dir,
                                  const std::string& stem);
};

// In-memory form of the panoptic pair: packed RGB bytes plus sidecar text.
struct EncodedPanoptic {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // 3 bytes per pixel, row-major
  std::string sidecar;
};

inline constexpr uint32_t kMaxSegmentId = (1u << 24) - 1;

// Segment ids follow first-pixel raster-scan order starting at 1. Throws
// ValidationError when the map holds more than 2^24 - 1 segments.
EncodedPanoptic EncodePanoptic(const PanopticMap& map);
PanopticMap DecodePanoptic(const EncodedPanoptic& encoded,
                           const ClassRegistry& registry);

PanopticMap ReadPanoptic(const PanopticFilePair& pair,
                         const ClassRegistry& registry);
void WritePanoptic(const PanopticMap& map, const PanopticFilePair& pair);

ClassRegistry ParseClassRegistry(const std::string& text);
ClassRegistry ReadClassRegistry(const std::filesystem::path& path);
void WriteClassRegistry(const ClassRegistry& registry,
                        const std::filesystem::path& path);

// Alternating zero/one run lengths, first run counting zeros.
std::vector<int64_t> EncodeRle(const BinaryMask& mask);
BinaryMask DecodeRle(std::span<const int64_t> counts, int width, int height);

std::vector<ScoredInstance> ParseInstances(const std::string& text, int width,
                                           int height,
                                           const ClassRegistry& registry);
std::vector<ScoredInstance> ReadInstances(const std::filesystem::path& path,
                                          int width, int height,
                                          const ClassRegistry& registry);
void WriteInstances(std::span<const ScoredInstance> instances,
                    const std::filesystem::path& path);

// Instance ids are dropped; every pixel gets instance id 0.
PanopticMap ReadSemantic(const std::filesystem::path& path,
                         const ClassRegistry& registry);
void WriteSemantic(const PanopticMap& map, const std::filesystem::path& path);

enum class ReportFormat { kJson, kCsv };

// Picks the format from the extension: ".csv" is CSV, anything else JSON.
ReportFormat ReportFormatFor(const std::filesystem::path& path);

// Reals are printed with four decimals; field order is fixed.
std::string FormatReport(const PQResult& result, ReportFormat format);
void WriteReport(const PQResult& result, ReportFormat format,
                 const std::filesystem::path& path);

// Writes `text` to `path`, throwing IoError when it cannot.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);

// Optional keys of a run-config file. Command-line flags take precedence.
struct RunConfig {
  std::optional<std::string> gt_dir;
  std::optional<std::string> pred_dir;
  std::optional<std::string> categories;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<std::string> manifest;
  std::optional<unsigned> threads;
  std::optional<uint64_t> seed;
  std::optional<double> iou_threshold;
  std::optional<double> alpha;
  std::optional<double> beta;
};

RunConfig ParseRunConfig(const std::string& text);
RunConfig ReadRunConfig(const std::filesystem::path& path);

}  // namespace panoptic

#endif  // PANOPTIC_IO_H_
