// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hogfusion/datasets.hpp"
#include "hogfusion/hog.hpp"
#include "hogfusion/metrics.hpp"
#include "hogfusion/model.hpp"
#include "hogfusion/trainer.hpp"

namespace hogfusion::pipeline {

/// Everything a run reads from its JSON config file. Every field is optional.
struct RunConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  hog::HogParams hog;
  int hog_side = imageio::kCanonicalSize;  // images are resized to side x side before HOG
  double split_ratio = 0.8;
  int folds = 5;
  metrics::Averaging averaging = metrics::Averaging::Macro;

  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);

/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& c);

/// Worker count for extraction: HOGFUSION_THREADS when set and positive,
/// otherwise the hardware concurrency (at least 1).
int worker_threads();

struct ExtractionFailure {
  std::string id;
  std::string message;
};

struct ExtractionResult {
  hog::FeatureMatrix features;
  std::vector<ExtractionFailure> failures;
};

/// HOG descriptors for every manifest record, in manifest order. Failed
/// images are listed and left out of the matrix.
ExtractionResult extract_features(const datasets::DatasetManifest& m, const hog::HogParams& params, int side,
                                  int threads, const std::function<void(std::size_t done)>& progress = {});

/// Decodes each image and resizes it to the backbone input, raw [0, 255].
nn::Tensor load_image_batch(const datasets::DatasetManifest& m, const std::array<std::size_t, 3>& shape,
                            int threads);

/// Builds a training/evaluation set in manifest order. HOG rows come from
/// `features` when given (matched by id), otherwise they are extracted.
/// Inputs come from `store` for a precomputed backbone, else from the images.
train::Dataset assemble_dataset(const datasets::DatasetManifest& m, const RunConfig& cfg,
                                const hog::FeatureMatrix* features, const model::FeatureStore* store, int threads);

/// Writes through a temporary sibling file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::function<void(const std::filesystem::path&)>& write);

}  // namespace hogfusion::pipeline
