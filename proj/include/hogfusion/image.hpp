// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hogfusion::imageio {

/// Interleaved 8-bit RGB, row-major, no padding.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h);
  RgbImage(int w, int h, std::vector<std::uint8_t> pixels);

  std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

/// Real-valued luminance plane with values in [0, 255].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.0f);

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr int kCanonicalSize = 224;

/// Decodes a PNG or JPEG file. The format is chosen from the file signature;
/// a recognised extension with a foreign signature is reported as corrupt.
RgbImage load_image(const std::filesystem::path& path);

void save_png(const RgbImage& img, const std::filesystem::path& path);

/// Bilinear resize. Output pixel (x, y) samples the source at
/// ((x + 0.5) * in_w / out_w - 0.5, (y + 0.5) * in_h / out_h - 0.5), with the
/// sample coordinate clamped to the source extent; results are rounded to the
/// nearest integer, halves away from zero.
RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h);

/// ITU-R BT.601 luma, kept as float.
GrayImage to_grayscale(const RgbImage& img);

}  // namespace hogfusion::imageio
