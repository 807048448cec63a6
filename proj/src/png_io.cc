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

#include "png_io.h"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "panoptic/status.h"

namespace panoptic::internal {

namespace {

struct ErrorState {
  std::jmp_buf jmp;
  char message[256] = {0};
};

void OnError(png_structp png, png_const_charp msg) {
  auto* state = static_cast<ErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  std::longjmp(state->jmp, 1);
}

void OnWarning(png_structp, png_const_charp) {}

struct FileCloser {
  void operator()(FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr OpenForRead(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string() + " for reading");
  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8)) {
    throw FormatError(path.string() + ": not a PNG file");
  }
  return fp;
}

struct Decoded {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  std::vector<uint8_t> bytes;
};

// Reads the raw rows after checking the header against the expected layout.
Decoded ReadRaw(const std::filesystem::path& path, int want_color_type,
                int want_bit_depth, const char* layout) {
  FilePtr fp = OpenForRead(path);
  ErrorState state;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state,
                                           OnError, OnWarning);
  if (png == nullptr) throw Error(ErrorCode::kInternal, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  Decoded out;
  std::vector<png_bytep> rows;
  volatile bool bad_layout = false;
  if (setjmp(state.jmp)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": " + state.message);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  int bit_depth = 0, color_type = 0, interlace = 0;
  png_get_IHDR(png, info, &out.width, &out.height, &bit_depth, &color_type,
               &interlace, nullptr, nullptr);
  if (color_type != want_color_type || bit_depth != want_bit_depth ||
      interlace != PNG_INTERLACE_NONE) {
    bad_layout = true;
  } else {
    const size_t row_bytes = png_get_rowbytes(png, info);
    out.bytes.resize(row_bytes * out.height);
    rows.resize(out.height);
    for (png_uint_32 y = 0; y < out.height; ++y) {
      rows[y] = out.bytes.data() + y * row_bytes;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (bad_layout) {
    throw FormatError(path.string() + ": expected a non-interlaced " +
                      layout + " PNG");
  }
  return out;
}

void WriteRaw(const std::filesystem::path& path, int width, int height,
              int color_type, int bit_depth, const uint8_t* bytes,
              size_t row_bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");
  ErrorState state;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state,
                                            OnError, OnWarning);
  if (png == nullptr) throw Error(ErrorCode::kInternal, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(height);
  if (setjmp(state.jmp)) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": " + state.message);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes + y * row_bytes);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(fp.get()) != 0) {
    throw IoError("failed writing " + path.string());
  }
}

void CheckWritable(int width, int height, const std::filesystem::path& path) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgumentError(path.string() +
                               ": PNG dimensions must be positive");
  }
}

}  // namespace

RgbImage ReadRgbPng(const std::filesystem::path& path) {
  Decoded raw = ReadRaw(path, PNG_COLOR_TYPE_RGB, 8, "8-bit RGB");
  return {static_cast<int>(raw.width), static_cast<int>(raw.height),
          std::move(raw.bytes)};
}

void WriteRgbPng(const RgbImage& image, const std::filesystem::path& path) {
  CheckWritable(image.width, image.height, path);
  WriteRaw(path, image.width, image.height, PNG_COLOR_TYPE_RGB, 8,
           image.data.data(), static_cast<size_t>(image.width) * 3);
}

Gray16Image ReadGray16Png(const std::filesystem::path& path) {
  Decoded raw = ReadRaw(path, PNG_COLOR_TYPE_GRAY, 16, "16-bit grayscale");
  Gray16Image out{static_cast<int>(raw.width), static_cast<int>(raw.height),
                  {}};
  out.data.resize(static_cast<size_t>(raw.width) * raw.height);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = static_cast<uint16_t>((raw.bytes[2 * i] << 8) |
                                        raw.bytes[2 * i + 1]);
  }
  return out;
}

void WriteGray16Png(const Gray16Image& image,
                    const std::filesystem::path& path) {
  CheckWritable(image.width, image.height, path);
  // PNG stores 16-bit samples big-endian.
  std::vector<uint8_t> bytes(image.data.size() * 2);
  for (size_t i = 0; i < image.data.size(); ++i) {
    bytes[2 * i] = static_cast<uint8_t>(image.data[i] >> 8);
    bytes[2 * i + 1] = static_cast<uint8_t>(image.data[i] & 0xff);
  }
  WriteRaw(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, 16,
           bytes.data(), static_cast<size_t>(image.width) * 2);
}

}  // namespace panoptic::internal
