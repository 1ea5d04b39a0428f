// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/hog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hogfusion/error.hpp"

namespace hogfusion::hog {

void HogParams::validate() const {
  if (orientations < 1 || cell_size < 1 || block_size < 1 || !(clip > 0.0 && clip <= 1.0) || !(epsilon > 0.0))
    throw Error(ErrorCode::InvalidParams, "HOG parameters out of range");
}

std::size_t descriptor_length(int width, int height, const HogParams& params) {
  params.validate();
  const int cx = width / params.cell_size;
  const int cy = height / params.cell_size;
  const int b = params.block_size;
  if (cx < b || cy < b) return 0;
  return static_cast<std::size_t>(cx - b + 1) * static_cast<std::size_t>(cy - b + 1) *
         static_cast<std::size_t>(b * b * params.orientations);
}

GradientField compute_gradients(const imageio::GrayImage& gray) {
  const int w = gray.width;
  const int h = gray.height;
  if (w < 3 || h < 3) throw Error(ErrorCode::ImageTooSmall, "gradient computation needs at least 3x3 pixels");

  GradientField g;
  g.width = w;
  g.height = h;
  g.magnitude.resize(static_cast<std::size_t>(w) * h);
  g.orientation.resize(static_cast<std::size_t>(w) * h);

  // [-1, 0, 1] / 2 in the interior, forward/backward difference on the border,
  // so a unit ramp has unit slope everywhere.
  auto diff = [](float before, float after, int span) { return (after - before) / static_cast<float>(span); };
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(y - 1, 0);
    const int y1 = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(x - 1, 0);
      const int x1 = std::min(x + 1, w - 1);
      const float gx = diff(gray.at(x0, y), gray.at(x1, y), x1 - x0);
      const float gy = diff(gray.at(x, y0), gray.at(x, y1), y1 - y0);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      g.magnitude[i] = std::sqrt(gx * gx + gy * gy);
      float deg = 0.0f;
      if (gx != 0.0f || gy != 0.0f) {
        deg = static_cast<float>(std::atan2(static_cast<double>(gy), static_cast<double>(gx)) * 180.0 /
                                 std::numbers::pi);
        if (deg < 0.0f) deg += 180.0f;
        if (deg >= 180.0f) deg -= 180.0f;
      }
      g.orientation[i] = deg;
    }
  }
  return g;
}

CellGrid cell_histograms(const GradientField& grad, const HogParams& params) {
  params.validate();
  const int cs = params.cell_size;
  if (grad.width < cs || grad.height < cs)
    throw Error(ErrorCode::ImageTooSmall, "image smaller than one cell");

  CellGrid cells;
  cells.cells_x = grad.width / cs;
  cells.cells_y = grad.height / cs;
  cells.bins = params.orientations;
  cells.values.assign(static_cast<std::size_t>(cells.cells_x) * cells.cells_y * cells.bins, 0.0f);

  const int bins = params.orientations;
  const double bin_width = 180.0 / bins;
  for (int y = 0; y < cells.cells_y * cs; ++y) {
    for (int x = 0; x < cells.cells_x * cs; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * grad.width + x;
      const float mag = grad.magnitude[i];
      if (mag == 0.0f) continue;
      // Position relative to bin centres (i + 0.5) * bin_width.
      const double pos = grad.orientation[i] / bin_width - 0.5;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      int b0 = static_cast<int>(lower) % bins;
      if (b0 < 0) b0 += bins;
      const int b1 = (b0 + 1) % bins;
      float* hist = cells.cell(x / cs, y / cs);
      hist[b0] += static_cast<float>(mag * (1.0 - frac));
      hist[b1] += static_cast<float>(mag * frac);
    }
  }
  return cells;
}

void l2_hys(std::span<float> block, double clip, double epsilon) {
  auto normalize = [&] {
    double sq = 0.0;
    for (float v : block) sq += static_cast<double>(v) * v;
    const double scale = 1.0 / std::sqrt(sq + epsilon * epsilon);
    for (float& v : block) v = static_cast<float>(v * scale);
  };
  normalize();
  for (float& v : block) v = std::min(v, static_cast<float>(clip));
  normalize();
}

BlockGrid block_normalize(const CellGrid& cells, const HogParams& params) {
  params.validate();
  const int b = params.block_size;
  if (cells.cells_x < b || cells.cells_y < b)
    throw Error(ErrorCode::GridTooSmall, "cell grid smaller than one block");

  BlockGrid out;
  out.blocks_x = cells.cells_x - b + 1;
  out.blocks_y = cells.cells_y - b + 1;
  out.block_length = b * b * cells.bins;
  out.values.resize(static_cast<std::size_t>(out.blocks_x) * out.blocks_y * out.block_length);

  const auto bins = static_cast<std::size_t>(cells.bins);
  float* dst = out.values.data();
  for (int by = 0; by < out.blocks_y; ++by) {
    for (int bx = 0; bx < out.blocks_x; ++bx) {
      float* block = dst;
      for (int cy = 0; cy < b; ++cy) {
        for (int cx = 0; cx < b; ++cx) {
          const float* src = cells.cell(bx + cx, by + cy);
          dst = std::copy(src, src + bins, dst);
        }
      }
      l2_hys({block, static_cast<std::size_t>(out.block_length)}, params.clip, params.epsilon);
    }
  }
  return out;
}

HogDescriptor hog_descriptor(const imageio::GrayImage& gray, const HogParams& params) {
  params.validate();
  const int min_side = params.cell_size * params.block_size;
  if (gray.width < min_side || gray.height < min_side || gray.width < 3 || gray.height < 3)
    throw Error(ErrorCode::ImageTooSmall, "image smaller than one block");
  return block_normalize(cell_histograms(compute_gradients(gray), params), params).values;
}

HogDescriptor extract(const imageio::RgbImage& img, const HogParams& params, int side) {
  const auto& sized = (img.width == side && img.height == side) ? img : imageio::resize_bilinear(img, side, side);
  return hog_descriptor(imageio::to_grayscale(sized), params);
}

void FeatureMatrix::validate() const {
  if (ids.size() != labels.size() || ids.size() != rows.size())
    throw Error(ErrorCode::LengthMismatch, "feature matrix ids/labels/rows differ in length");
  for (const auto& r : rows)
    if (r.size() != dim) throw Error(ErrorCode::ShapeMismatch, "feature row length differs from dim");
}

namespace {

void append_real(std::string& line, float v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  line.append(buf, res.ptr);
}

}  // namespace

void export_feature_matrix(const FeatureMatrix& fm, const std::filesystem::path& path) {
  fm.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  std::string line = "id";
  for (std::size_t j = 0; j < fm.dim; ++j) line += ",f" + std::to_string(j);
  line += ",label\n";
  out << line;
  for (std::size_t i = 0; i < fm.size(); ++i) {
    line = fm.ids[i];
    for (float v : fm.rows[i]) {
      line += ',';
      append_real(line, v);
    }
    line += ',' + std::to_string(fm.labels[i]) + '\n';
    out << line;
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

FeatureMatrix import_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": missing header");
  const auto fields = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (fields < 2 || line.rfind("id,", 0) != 0 || line.substr(line.size() - 6) != ",label")
    throw Error(ErrorCode::ParseError, path.string() + ": header must be id,f0,...,label");

  FeatureMatrix fm;
  fm.dim = fields - 2;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(row);
    std::size_t start = line.find(',');
    if (start == std::string::npos) throw Error(ErrorCode::ParseError, where + ": malformed row");
    fm.ids.push_back(line.substr(0, start));
    HogDescriptor values;
    values.reserve(fm.dim);
    const char* p = line.data() + start + 1;
    const char* end = line.data() + line.size();
    for (std::size_t j = 0; j < fm.dim; ++j) {
      float v = 0.0f;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc() || res.ptr == end || *res.ptr != ',')
        throw Error(ErrorCode::ParseError, where + ": bad value in column f" + std::to_string(j));
      values.push_back(v);
      p = res.ptr + 1;
    }
    int label = 0;
    const auto res = std::from_chars(p, end, label);
    if (res.ec != std::errc() || res.ptr != end) throw Error(ErrorCode::ParseError, where + ": bad label");
    fm.labels.push_back(label);
    fm.rows.push_back(std::move(values));
  }
  return fm;
}

}  // namespace hogfusion::hog
