// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hogfusion/hog.hpp"
#include "hogfusion/metrics.hpp"
#include "hogfusion/model.hpp"
#include "hogfusion/nn.hpp"

namespace hogfusion::train {

/// Samples in a fixed order. `inputs` is N x H x W x C (images or
/// precomputed feature maps) and `hogs` is N x d; either may be left empty
/// when the model does not read it.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<int> labels;
  nn::Tensor inputs;
  nn::Tensor hogs;

  std::size_t size() const { return labels.size(); }
  bool has_inputs() const { return inputs.rank() == 4 && inputs.dim(0) == size(); }
  bool has_hogs() const { return hogs.rank() == 2 && hogs.dim(0) == size(); }
  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset subset(std::span<const std::string> wanted_ids) const;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  /// Epochs without improvement before stopping; 0 disables early stopping
  /// and the validation holdout.
  int patience = 10;
  nn::OptimConfig optimizer;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

/// Validation loss must drop by at least this much to count as improvement.
inline constexpr double kMinImprovement = 1e-5;

struct EpochRecord {
  double train_loss = 0.0;
  double train_acc = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_acc;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool stopped_early = false;
  /// Parameter hash of the weights kept at the end of training.
  std::uint64_t best_hash = 0;
};

void to_json(nlohmann::json& j, const TrainHistory& h);
void from_json(const nlohmann::json& j, TrainHistory& h);

/// CSV `epoch,train_loss,train_acc,val_loss,val_acc`; missing validation
/// values are left blank.
std::string history_csv(const TrainHistory& h);
void export_history_csv(const TrainHistory& h, const std::filesystem::path& path);

struct TrainHooks {
  /// Replaces the measured validation loss of an epoch (0-based) when set.
  std::function<double(int epoch, double measured)> validation_loss_override;
  std::function<void(int epoch, const model::FusionModel& m, const EpochRecord& rec)> on_epoch_end;
};

/// Trains on `train_data`, monitoring `validation` for early stopping when
/// given. Ends with the best-validation weights in `m`.
TrainHistory train(model::FusionModel& m, const Dataset& train_data, const Dataset* validation,
                   const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Holds out a stratified, seeded validation_fraction of `data` when early
/// stopping is enabled, then trains on the rest.
TrainHistory train_with_validation(model::FusionModel& m, const Dataset& data, const TrainConfig& cfg,
                                   const TrainHooks& hooks = {});

/// Infer-mode probabilities for every sample, in batches.
nn::Tensor predict_proba(const model::FusionModel& m, const Dataset& data, int batch_size = 32);

/// Mean loss and accuracy over `data` in infer mode.
std::pair<double, double> loss_and_accuracy(const model::FusionModel& m, const Dataset& data, int batch_size = 32);

metrics::MetricsReport evaluate(const model::FusionModel& m, const Dataset& data,
                                metrics::Averaging averaging = metrics::Averaging::Macro, int batch_size = 32);

struct CvResult {
  std::vector<metrics::MetricsReport> folds;
  metrics::MetricsReport mean;
  std::vector<TrainHistory> histories;
};

/// Stratified k-fold: fold i is the test set of a fresh model built with
/// seed + i and trained on the remaining folds.
CvResult cross_validate(const Dataset& data, const model::ModelConfig& mcfg, const TrainConfig& tcfg, int k = 5,
                        metrics::Averaging averaging = metrics::Averaging::Macro);

struct Checkpoint {
  model::FusionModel model;
  TrainHistory history;
  nlohmann::json meta;
};

/// Text header (magic, config, history, meta, parameter table) followed by
/// little-endian float32 parameter values in table order.
void save_checkpoint(const model::FusionModel& m, const TrainHistory& history, const nlohmann::json& meta,
                     const std::filesystem::path& path);

/// Loads a checkpoint. With `expected`, a differing model configuration raises
/// VersionMismatch naming the first differing field.
Checkpoint load_checkpoint(const std::filesystem::path& path, const model::ModelConfig* expected = nullptr);

}  // namespace hogfusion::train
