// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hogfusion/image.hpp"

namespace hogfusion::hog {

struct HogParams {
  int orientations = 9;
  int cell_size = 8;    // pixels per cell side
  int block_size = 2;   // cells per block side
  double clip = 0.2;    // L2-Hys clipping threshold
  double epsilon = 1e-5;

  void validate() const;
};

/// Per-pixel gradient field. Orientation is unsigned, in degrees, [0, 180).
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<float> magnitude;
  std::vector<float> orientation;
};

/// cells_y x cells_x histograms, each of `bins` floats, row-major.
struct CellGrid {
  int cells_x = 0;
  int cells_y = 0;
  int bins = 0;
  std::vector<float> values;

  const float* cell(int cx, int cy) const {
    return values.data() + (static_cast<std::size_t>(cy) * cells_x + cx) * bins;
  }
  float* cell(int cx, int cy) { return values.data() + (static_cast<std::size_t>(cy) * cells_x + cx) * bins; }
};

/// Normalised block vectors laid out block-row-major; each block holds
/// block_size^2 cells (row-major) of `bins` values.
struct BlockGrid {
  int blocks_x = 0;
  int blocks_y = 0;
  int block_length = 0;
  std::vector<float> values;
};

using HogDescriptor = std::vector<float>;

/// Closed-form descriptor length for a width x height image.
std::size_t descriptor_length(int width, int height, const HogParams& params);

GradientField compute_gradients(const imageio::GrayImage& gray);
CellGrid cell_histograms(const GradientField& grad, const HogParams& params);
BlockGrid block_normalize(const CellGrid& cells, const HogParams& params);

/// In-place L2-Hys on one block vector.
void l2_hys(std::span<float> block, double clip, double epsilon);

HogDescriptor hog_descriptor(const imageio::GrayImage& gray, const HogParams& params = {});

/// Full per-image pipeline: resize to side x side, grayscale, descriptor.
HogDescriptor extract(const imageio::RgbImage& img, const HogParams& params = {},
                      int side = imageio::kCanonicalSize);

struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<HogDescriptor> rows;

  std::size_t size() const { return ids.size(); }
  void validate() const;
};

/// CSV `id,f0,...,f{d-1},label`; reals with 9 significant digits, LF endings.
void export_feature_matrix(const FeatureMatrix& fm, const std::filesystem::path& path);
FeatureMatrix import_feature_matrix(const std::filesystem::path& path);

}  // namespace hogfusion::hog
