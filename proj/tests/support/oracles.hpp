// SPDX-License-Identifier: Apache-2.0
// Independent reference implementations used as test oracles.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "hogfusion/hog.hpp"
#include "hogfusion/image.hpp"
#include "hogfusion/model.hpp"
#include "hogfusion/rng.hpp"
#include "hogfusion/tensor.hpp"

namespace hogfusion::oracle {

inline imageio::GrayImage random_gray(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  imageio::GrayImage g(w, h);
  for (float& v : g.data) v = static_cast<float>(rng.uniform(0.0, 255.0));
  return g;
}

inline imageio::RgbImage random_rgb(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  imageio::RgbImage img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

template <typename T>
nn::BasicTensor<T> random_tensor(nn::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  nn::BasicTensor<T> t(std::move(shape));
  for (auto& v : t.storage()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

/// Straight-line HOG in double precision: per-pixel loops, explicit bin
/// search, explicit block loops. Image y grows downward; gradients use
/// central differences halved in the interior and one-sided differences on
/// the border; orientation is atan2(gy, gx) folded into [0, 180).
inline std::vector<double> naive_hog(const imageio::GrayImage& g, const hog::HogParams& p) {
  const int w = g.width, h = g.height, cs = p.cell_size, bs = p.block_size, nb = p.orientations;
  const int ncx = w / cs, ncy = h / cs;
  auto px = [&](int x, int y) { return static_cast<double>(g.at(x, y)); };
  std::vector<double> hist(static_cast<std::size_t>(ncx * ncy * nb), 0.0);
  for (int cy = 0; cy < ncy; ++cy)
    for (int cx = 0; cx < ncx; ++cx)
      for (int yy = 0; yy < cs; ++yy)
        for (int xx = 0; xx < cs; ++xx) {
          const int x = cx * cs + xx, y = cy * cs + yy;
          double gx, gy;
          if (x == 0) gx = px(1, y) - px(0, y);
          else if (x == w - 1) gx = px(w - 1, y) - px(w - 2, y);
          else gx = (px(x + 1, y) - px(x - 1, y)) / 2.0;
          if (y == 0) gy = px(x, 1) - px(x, 0);
          else if (y == h - 1) gy = px(x, h - 1) - px(x, h - 2);
          else gy = (px(x, y + 1) - px(x, y - 1)) / 2.0;
          const double mag = std::hypot(gx, gy);
          if (mag == 0.0) continue;
          double ang = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
          while (ang < 0.0) ang += 180.0;
          while (ang >= 180.0) ang -= 180.0;
          // Find the two bin centres bracketing the angle, wrapping at 0/180.
          const double width = 180.0 / nb;
          int lo = -1;
          for (int b = 0; b < nb; ++b)
            if ((b + 0.5) * width <= ang) lo = b;
          double lo_centre = lo >= 0 ? (lo + 0.5) * width : (nb - 0.5) * width - 180.0;
          if (lo < 0) lo = nb - 1;
          const int hi = (lo + 1) % nb;
          const double t = (ang - lo_centre) / width;
          double* cell = &hist[static_cast<std::size_t>((cy * ncx + cx) * nb)];
          cell[lo] += mag * (1.0 - t);
          cell[hi] += mag * t;
        }

  std::vector<double> out;
  for (int by = 0; by + bs <= ncy; ++by)
    for (int bx = 0; bx + bs <= ncx; ++bx) {
      std::vector<double> v;
      for (int j = 0; j < bs; ++j)
        for (int i = 0; i < bs; ++i)
          for (int b = 0; b < nb; ++b) v.push_back(hist[static_cast<std::size_t>(((by + j) * ncx + bx + i) * nb + b)]);
      for (int pass = 0; pass < 2; ++pass) {
        double sq = 0.0;
        for (double e : v) sq += e * e;
        const double norm = std::sqrt(sq + p.epsilon * p.epsilon);
        for (double& e : v) {
          e /= norm;
          if (pass == 0 && e > p.clip) e = p.clip;
        }
      }
      out.insert(out.end(), v.begin(), v.end());
    }
  return out;
}

/// Fraction of (positive, negative) pairs ranked correctly, ties worth half.
inline double mann_whitney(std::span<const double> scores, std::span<const int> labels) {
  double credit = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) credit += 1.0;
      else if (scores[i] == scores[j]) credit += 0.5;
    }
  }
  return credit / static_cast<double>(pairs);
}

/// A fused model small enough for exhaustive finite-difference checks.
inline model::ModelConfig tiny_config() {
  model::ModelConfig c;
  c.hog_dim = 12;
  c.hog_hidden = {6, 5, 4};
  c.head_conv_filters = 3;
  c.cnn_embed_dim = 4;
  c.head_hidden = {5, 4};
  c.backbone.input_shape = {10, 10, 3};
  c.backbone.channels = {2};
  c.backbone.input_scale = 1.0;
  return c;
}

}  // namespace hogfusion::oracle
