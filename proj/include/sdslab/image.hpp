// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sdslab {

// Planar-interleaved raster: values[(y*width + x)*channels + c], doubles in
// [0, 1] for displayable content.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (gray) or 3 (rgb)
  std::vector<double> values;

  Image() = default;
  Image(int w, int h, int c)
      : width(w), height(h), channels(c),
        values(static_cast<std::size_t>(w) * h * c, 0.0) {}

  double& at(int x, int y, int c = 0) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

// All writers go through a temp-file-then-rename so that re-running into the
// same directory is atomic and idempotent.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& bytes);

void write_pgm(const std::filesystem::path& path, const Image& gray);
void write_ppm(const std::filesystem::path& path, const Image& rgb);
Image read_pnm(const std::filesystem::path& path);  // P5 or P6

// 32-bit float depth raster: magic "SDSLAB-DEPTH" then H, W as little-endian
// int32, then H*W floats row-major.
void write_depth(const std::filesystem::path& path, const Image& depth);

std::uint64_t file_checksum(const std::filesystem::path& path);

// Canonical shortest-round-trip decimal formatting; keeps CSV reports
// byte-stable across runs.
std::string format_double(double v);

}  // namespace sdslab
