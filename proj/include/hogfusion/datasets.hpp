// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hogfusion::datasets {

struct ManifestRecord {
  std::string id;
  std::filesystem::path path;
  int label = 0;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;

  std::size_t size() const { return records.size(); }
  std::map<int, std::size_t> class_counts() const;
};

/// Reads a CSV with header columns `id`, `path`, `label` in any order.
/// Relative paths are resolved against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

/// DR grading 0..4 -> 0 (no DR) / 1 (grades 1-4).
DatasetManifest binarize_dr(const DatasetManifest& m);

struct SplitPlan {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

struct FoldPlan {
  std::vector<std::vector<std::string>> folds;
  std::uint64_t seed = 0;
};

/// Stratified split. Each class contributes round(ratio * n_c) samples to the
/// training side; if those do not add to round(ratio * n), the classes with
/// the largest rounding excess (or deficit) are adjusted by one, lowest class
/// first on ties. Ids keep manifest order within each side.
SplitPlan split_train_test(const DatasetManifest& m, double ratio = 0.8, std::uint64_t seed = 0);

/// Stratified k folds: each class is shuffled and the classes, concatenated in
/// ascending label order, are dealt round-robin across folds.
FoldPlan kfold(const DatasetManifest& m, int k = 5, std::uint64_t seed = 0);

void write_plan(const SplitPlan& plan, const std::filesystem::path& path);
void write_plan(const FoldPlan& plan, const std::filesystem::path& path);
SplitPlan read_split_plan(const std::filesystem::path& path);
FoldPlan read_fold_plan(const std::filesystem::path& path);

}  // namespace hogfusion::datasets
