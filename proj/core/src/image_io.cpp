// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cocoaan/errors.hpp"

namespace cocoaan {
namespace {

GrayImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  GrayImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

// Skips whitespace and '#' comments between PGM header tokens.
int read_pgm_int(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = -1;
  in >> v;
  return v;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw DataError(path.string() + ": not a PGM file");
  GrayImage out;
  out.width = read_pgm_int(in);
  out.height = read_pgm_int(in);
  const int maxval = read_pgm_int(in);
  if (out.width < 1 || out.height < 1 || maxval < 1 || maxval > 255) {
    throw DataError(path.string() + ": unsupported PGM header (8-bit grayscale required)");
  }
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  if (magic == "P5") {
    in.get();
    in.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(out.pixels.size()));
    if (!in) throw DataError(path.string() + ": truncated PGM data");
  } else {
    for (auto& p : out.pixels) {
      int v = -1;
      if (!(in >> v) || v < 0 || v > maxval) throw DataError(path.string() + ": bad PGM sample");
      p = static_cast<std::uint8_t>(v);
    }
  }
  if (maxval != 255) {
    for (auto& p : out.pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
  }
  return out;
}

}  // namespace

GrayImage read_gray_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw DataError("unsupported image type: " + path.string());
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw DataError("write_png: inconsistent image dimensions");
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " + png.message);
  }
}

std::vector<double> to_signed_unit(std::span<const std::uint8_t> pixels) {
  std::vector<double> out(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) out[i] = pixels[i] / 255.0 * 2.0 - 1.0;
  return out;
}

std::vector<std::uint8_t> to_bytes(std::span<const double> values) {
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp((values[i] + 1.0) * 0.5 * 255.0, 0.0, 255.0);
    out[i] = static_cast<std::uint8_t>(std::nearbyint(v));  // default mode rounds half to even
  }
  return out;
}

}  // namespace cocoaan
