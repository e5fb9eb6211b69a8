// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cocoaan {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Reads .png (any color type, converted to gray) or binary/ASCII .pgm.
/// Throws DataError on unreadable files.
GrayImage read_gray_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayImage& image);

/// [0, 255] -> [-1, 1], linear.
std::vector<double> to_signed_unit(std::span<const std::uint8_t> pixels);
/// [-1, 1] -> [0, 255] with clamping and round-half-even.
std::vector<std::uint8_t> to_bytes(std::span<const double> values);

}  // namespace cocoaan
