// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "hogfusion/error.hpp"

namespace hogfusion::metrics {

long ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

long ConfusionMatrix::trace() const {
  long t = 0;
  for (int c = 0; c < classes; ++c) t += at(c, c);
  return t;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, int classes) {
  if (truth.size() != pred.size())
    throw Error(ErrorCode::LengthMismatch, "truth has " + std::to_string(truth.size()) + " labels, predictions " +
                                               std::to_string(pred.size()));
  if (classes < 1) throw Error(ErrorCode::InvalidParams, "confusion matrix needs at least one class");
  ConfusionMatrix cm{classes, std::vector<long>(static_cast<std::size_t>(classes * classes), 0)};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= classes || pred[i] < 0 || pred[i] >= classes)
      throw Error(ErrorCode::LabelOutOfRange, "label outside [0, " + std::to_string(classes) + ") at index " +
                                                  std::to_string(i));
    ++cm.counts[static_cast<std::size_t>(truth[i] * classes + pred[i])];
  }
  return cm;
}

const char* to_string(Averaging a) {
  switch (a) {
    case Averaging::Macro: return "macro";
    case Averaging::Weighted: return "weighted";
    case Averaging::Micro: return "micro";
    case Averaging::Binary: return "binary";
  }
  return "macro";
}

Averaging parse_averaging(const std::string& s) {
  for (auto a : {Averaging::Macro, Averaging::Weighted, Averaging::Micro, Averaging::Binary})
    if (s == to_string(a)) return a;
  throw Error(ErrorCode::InvalidConfig, "unknown averaging mode '" + s + "'");
}

namespace {

double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

PrfResult prf_accuracy(const ConfusionMatrix& cm, Averaging averaging) {
  const long total = cm.total();
  if (total == 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix has no samples");
  PrfResult r;
  r.accuracy = ratio(cm.trace(), total);
  long tp_all = 0, fp_all = 0, fn_all = 0;
  for (int c = 0; c < cm.classes; ++c) {
    long tp = cm.at(c, c), fp = 0, fn = 0;
    for (int o = 0; o < cm.classes; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    ClassScores s;
    s.precision = ratio(tp, tp + fp);
    s.recall = ratio(tp, tp + fn);
    s.f1 = harmonic(s.precision, s.recall);
    s.support = tp + fn;
    r.per_class.push_back(s);
  }
  switch (averaging) {
    case Averaging::Macro:
      for (const auto& s : r.per_class) {
        r.precision += s.precision;
        r.recall += s.recall;
        r.f1 += s.f1;
      }
      r.precision /= cm.classes;
      r.recall /= cm.classes;
      r.f1 /= cm.classes;
      break;
    case Averaging::Weighted:
      for (const auto& s : r.per_class) {
        const double w = ratio(s.support, total);
        r.precision += w * s.precision;
        r.recall += w * s.recall;
        r.f1 += w * s.f1;
      }
      break;
    case Averaging::Micro:
      r.precision = ratio(tp_all, tp_all + fp_all);
      r.recall = ratio(tp_all, tp_all + fn_all);
      r.f1 = harmonic(r.precision, r.recall);
      break;
    case Averaging::Binary:
      if (cm.classes != 2) throw Error(ErrorCode::InvalidParams, "binary averaging needs exactly two classes");
      r.precision = r.per_class[1].precision;
      r.recall = r.per_class[1].recall;
      r.f1 = r.per_class[1].f1;
      break;
  }
  return r;
}

namespace {

struct Tally {
  long pos = 0;
  long neg = 0;
};

// Threshold steps from the highest score down; each distinct score is one step.
std::vector<Tally> roc_steps(std::span<const double> scores, std::span<const int> labels, Tally& totals) {
  if (scores.size() != labels.size())
    throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw Error(ErrorCode::NonFiniteInput, "non-finite score at index " + std::to_string(i));
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::LabelOutOfRange, "binary labels must be 0 or 1");
    (labels[i] ? totals.pos : totals.neg) += 1;
  }
  if (totals.pos == 0 || totals.neg == 0)
    throw Error(ErrorCode::SingleClassInput, "ROC analysis needs both classes present");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Tally> steps;
  for (std::size_t i = 0; i < order.size();) {
    Tally t;
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? t.pos : t.neg) += 1;
    steps.push_back(t);
  }
  return steps;
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  Tally totals;
  const auto steps = roc_steps(scores, labels, totals);
  std::vector<RocPoint> pts{{0.0, 0.0}};
  long tp = 0, fp = 0;
  for (const auto& s : steps) {
    tp += s.pos;
    fp += s.neg;
    pts.push_back({ratio(fp, totals.neg), ratio(tp, totals.pos)});
  }
  return pts;
}

double roc_auc_binary(std::span<const double> scores, std::span<const int> labels) {
  Tally totals;
  const auto steps = roc_steps(scores, labels, totals);
  // Twice the area in units of 1/(P*N), accumulated exactly in integers.
  long double twice_area = 0;
  long tp = 0;
  for (const auto& s : steps) {
    twice_area += static_cast<long double>(s.neg) * static_cast<long double>(2 * tp + s.pos);
    tp += s.pos;
  }
  return static_cast<double>(twice_area / (2.0L * totals.pos * totals.neg));
}

double auc_macro_ovr(const nn::Tensor& probs, std::span<const int> labels) {
  if (probs.rank() != 2 || probs.dim(0) != labels.size())
    throw Error(ErrorCode::LengthMismatch, "probabilities and labels differ in length");
  const std::size_t c = probs.dim(1);
  std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2) throw Error(ErrorCode::SingleClassInput, "AUC needs at least two classes present");
  if (c == 1) {
    std::vector<double> s(labels.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = probs.at(i, 0);
    return roc_auc_binary(s, labels);
  }
  double sum = 0.0;
  std::vector<double> s(labels.size());
  std::vector<int> y(labels.size());
  for (int cls : present) {
    if (cls < 0 || static_cast<std::size_t>(cls) >= c)
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(cls) + " has no probability column");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      s[i] = probs.at(i, static_cast<std::size_t>(cls));
      y[i] = labels[i] == cls ? 1 : 0;
    }
    sum += roc_auc_binary(s, y);
  }
  return sum / static_cast<double>(present.size());
}

void export_roc_csv(std::span<const RocPoint> points, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "fpr,tpr\n";
  char a[32], b[32];
  for (const auto& p : points) {
    auto ra = std::to_chars(a, a + sizeof a, p.fpr);
    auto rb = std::to_chars(b, b + sizeof b, p.tpr);
    out << std::string(a, ra.ptr) << ',' << std::string(b, rb.ptr) << '\n';
  }
}

MetricsReport make_report(const nn::Tensor& probs, std::span<const int> labels, int classes, Averaging averaging) {
  if (labels.empty()) throw Error(ErrorCode::EmptyDataset, "no samples to evaluate");
  std::vector<int> pred(probs.dim(0));
  {
    const std::size_t cols = probs.dim(1);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (cols == 1) {
        pred[i] = probs.at(i, 0) > 0.5f ? 1 : 0;
        continue;
      }
      std::size_t best = 0;
      for (std::size_t j = 1; j < cols; ++j)
        if (probs.at(i, j) > probs.at(i, best)) best = j;
      pred[i] = static_cast<int>(best);
    }
  }
  MetricsReport r;
  r.confusion = confusion(labels, pred, classes);
  const auto prf = prf_accuracy(r.confusion, averaging);
  r.accuracy = prf.accuracy;
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  r.per_class = prf.per_class;
  r.averaging = averaging;
  r.samples = static_cast<long>(labels.size());
  r.auc_scheme = classes == 2 ? "binary" : "macro_ovr";
  try {
    r.auc = auc_macro_ovr(probs, labels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingleClassInput) throw;
    r.warnings.push_back("AUC omitted: evaluation labels contain a single class");
  }
  return r;
}

MetricsReport mean_report(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyDataset, "no reports to average");
  MetricsReport m;
  m.averaging = reports.front().averaging;
  m.auc_scheme = reports.front().auc_scheme;
  m.confusion = ConfusionMatrix{reports.front().confusion.classes,
                                std::vector<long>(reports.front().confusion.counts.size(), 0)};
  m.per_class.resize(reports.front().per_class.size());
  double auc_sum = 0.0;
  int auc_n = 0;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    m.accuracy += r.accuracy / n;
    m.precision += r.precision / n;
    m.recall += r.recall / n;
    m.f1 += r.f1 / n;
    m.samples += r.samples;
    if (r.auc) {
      auc_sum += *r.auc;
      ++auc_n;
    }
    for (std::size_t c = 0; c < m.per_class.size() && c < r.per_class.size(); ++c) {
      m.per_class[c].precision += r.per_class[c].precision / n;
      m.per_class[c].recall += r.per_class[c].recall / n;
      m.per_class[c].f1 += r.per_class[c].f1 / n;
      m.per_class[c].support += r.per_class[c].support;
    }
    for (std::size_t i = 0; i < m.confusion.counts.size() && i < r.confusion.counts.size(); ++i)
      m.confusion.counts[i] += r.confusion.counts[i];
  }
  if (auc_n > 0) m.auc = auc_sum / auc_n;
  if (auc_n != static_cast<int>(reports.size()))
    m.warnings.push_back("AUC averaged over " + std::to_string(auc_n) + " of " + std::to_string(reports.size()) +
                         " reports");
  return m;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string to_text(const MetricsReport& r) {
  std::string s;
  s += "samples=" + std::to_string(r.samples) + "\n";
  s += "averaging=" + std::string(to_string(r.averaging)) + "\n";
  s += "accuracy=" + fmt(r.accuracy) + "\n";
  s += "precision=" + fmt(r.precision) + "\n";
  s += "recall=" + fmt(r.recall) + "\n";
  s += "f1=" + fmt(r.f1) + "\n";
  s += "auc=" + (r.auc ? fmt(*r.auc) : std::string("n/a")) + "\n";
  s += "auc_scheme=" + r.auc_scheme + "\n";
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& pc = r.per_class[c];
    const std::string p = "class" + std::to_string(c) + ".";
    s += p + "precision=" + fmt(pc.precision) + "\n";
    s += p + "recall=" + fmt(pc.recall) + "\n";
    s += p + "f1=" + fmt(pc.f1) + "\n";
    s += p + "support=" + std::to_string(pc.support) + "\n";
  }
  for (int t = 0; t < r.confusion.classes; ++t) {
    s += "confusion." + std::to_string(t) + "=";
    for (int p = 0; p < r.confusion.classes; ++p) s += (p ? " " : "") + std::to_string(r.confusion.at(t, p));
    s += "\n";
  }
  for (const auto& w : r.warnings) s += "warning=" + w + "\n";
  return s;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["samples"] = r.samples;
  j["averaging"] = to_string(r.averaging);
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["auc"] = r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr);
  j["auc_scheme"] = r.auc_scheme;
  auto& pcs = j["per_class"] = nlohmann::json::array();
  for (const auto& pc : r.per_class)
    pcs.push_back({{"precision", pc.precision}, {"recall", pc.recall}, {"f1", pc.f1}, {"support", pc.support}});
  auto& cm = j["confusion"] = nlohmann::json::array();
  for (int t = 0; t < r.confusion.classes; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < r.confusion.classes; ++p) row.push_back(r.confusion.at(t, p));
    cm.push_back(row);
  }
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace hogfusion::metrics
