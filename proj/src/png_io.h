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

// Minimal libpng wrappers for the two raster layouts the toolkit uses. Any
// other PNG layout is rejected, never converted.

#ifndef PANOPTIC_SRC_PNG_IO_H_
#define PANOPTIC_SRC_PNG_IO_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace panoptic::internal {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // RGBRGB..., row-major
};

struct Gray16Image {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> data;
};

// 8-bit RGB without alpha.
RgbImage ReadRgbPng(const std::filesystem::path& path);
void WriteRgbPng(const RgbImage& image, const std::filesystem::path& path);

// 16-bit single-channel grayscale.
Gray16Image ReadGray16Png(const std::filesystem::path& path);
void WriteGray16Png(const Gray16Image& image,
                    const std::filesystem::path& path);

}  // namespace panoptic::internal

#endif  // PANOPTIC_SRC_PNG_IO_H_
