// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hogfusion/tensor.hpp"

namespace hogfusion::metrics {

/// counts[true * classes + predicted]
struct ConfusionMatrix {
  int classes = 0;
  std::vector<long> counts;

  long at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth * classes + pred)]; }
  long total() const;
  long trace() const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, int classes);

/// Macro: unweighted mean over all classes, a class absent from both truth
/// and predictions scoring 0. Weighted: support-weighted mean. Micro: pooled
/// counts. Binary: the scores of class 1 alone.
enum class Averaging { Macro, Weighted, Micro, Binary };

const char* to_string(Averaging a);
Averaging parse_averaging(const std::string& s);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

struct PrfResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::vector<ClassScores> per_class;
};

/// 0/0 is taken as 0 for every ratio.
PrfResult prf_accuracy(const ConfusionMatrix& cm, Averaging averaging = Averaging::Macro);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// ROC vertices from (0,0) to (1,1), one per distinct score threshold.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under the ROC curve; equal scores form one step, which is
/// the Mann-Whitney statistic with half credit for ties.
double roc_auc_binary(std::span<const double> scores, std::span<const int> labels);

/// One-vs-rest AUC per class present in the labels, macro-averaged. A B x 1
/// (sigmoid) input is treated as the positive-class score of a binary task.
double auc_macro_ovr(const nn::Tensor& probs, std::span<const int> labels);

void export_roc_csv(std::span<const RocPoint> points, const std::filesystem::path& path);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
  Averaging averaging = Averaging::Macro;
  std::string auc_scheme;  // "binary" or "macro_ovr"
  std::vector<ClassScores> per_class;
  ConfusionMatrix confusion;
  long samples = 0;
  std::vector<std::string> warnings;
};

/// Assembles a report from probabilities and labels.
MetricsReport make_report(const nn::Tensor& probs, std::span<const int> labels, int classes,
                          Averaging averaging = Averaging::Macro);

/// Arithmetic mean of each scalar metric (AUC over the reports that have one).
MetricsReport mean_report(std::span<const MetricsReport> reports);

std::string to_text(const MetricsReport& r);
nlohmann::json to_json(const MetricsReport& r);

}  // namespace hogfusion::metrics
