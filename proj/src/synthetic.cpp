// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hogfusion/error.hpp"
#include "hogfusion/rng.hpp"

namespace hogfusion::datasets {

imageio::RgbImage synthetic_image(int label, int side, std::uint64_t seed) {
  if (label != 0 && label != 1) throw Error(ErrorCode::LabelOutOfRange, "synthetic labels are 0 or 1");
  if (side < 8) throw Error(ErrorCode::InvalidParams, "synthetic images need a side of at least 8");
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(side);
  std::vector<double> field(n * n, 0.0);

  if (label == 0) {
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double period = rng.uniform(4.0, 8.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x)
        field[y * n + x] = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (c * x + s * y) / period + phase);
  } else {
    const int blobs = 2 + static_cast<int>(rng.below(3));
    for (int b = 0; b < blobs; ++b) {
      const double cx = rng.uniform(0.2, 0.8) * side, cy = rng.uniform(0.2, 0.8) * side;
      const double sigma = rng.uniform(0.08, 0.16) * side;
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
          const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          field[y * n + x] += std::exp(-d2 / (2.0 * sigma * sigma));
        }
    }
    for (double& v : field) v = std::min(v, 1.0);
  }

  const double lo = rng.uniform(20.0, 60.0), hi = rng.uniform(180.0, 235.0);
  const double tint[3] = {rng.uniform(0.8, 1.0), rng.uniform(0.8, 1.0), rng.uniform(0.8, 1.0)};
  imageio::RgbImage img(side, side);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const double v = lo + (hi - lo) * field[y * n + x];
      for (int ch = 0; ch < 3; ++ch) {
        const double noisy = v * tint[ch] + 6.0 * rng.normal();
        img.at(static_cast<int>(x), static_cast<int>(y), ch) =
            static_cast<std::uint8_t>(std::clamp(std::lround(noisy), 0L, 255L));
      }
    }
  return img;
}

DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir, int count, int side, std::uint64_t seed) {
  if (count < 2) throw Error(ErrorCode::InvalidParams, "synthetic dataset needs at least two samples");
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + (dir / "images").string());
  DatasetManifest m;
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn%04d", i);
    const int label = i % 2;
    const auto rel = std::filesystem::path("images") / (std::string(id) + ".png");
    imageio::save_png(synthetic_image(label, side, mix_seed(seed, static_cast<std::uint64_t>(i))), dir / rel);
    m.records.push_back({id, rel, label});
  }
  save_manifest(m, dir / "manifest.csv");
  for (auto& r : m.records) r.path = dir / r.path;
  return m;
}

}  // namespace hogfusion::datasets
