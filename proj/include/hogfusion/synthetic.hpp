// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>

#include "hogfusion/datasets.hpp"
#include "hogfusion/image.hpp"

namespace hogfusion::datasets {

/// Class 0: sinusoidal stripes at a random orientation, period and phase.
/// Class 1: a few soft Gaussian blobs. Both carry mild pixel noise and a
/// random tint, so neither colour nor mean brightness separates the classes.
imageio::RgbImage synthetic_image(int label, int side, std::uint64_t seed);

/// Writes `count` PNGs (alternating labels) plus `manifest.csv` into `dir`
/// and returns the manifest.
DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir, int count = 200, int side = 32,
                                        std::uint64_t seed = 7);

}  // namespace hogfusion::datasets
