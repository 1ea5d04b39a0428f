// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hogfusion/datasets.hpp"
#include "hogfusion/error.hpp"
#include "hogfusion/rng.hpp"

namespace hogfusion::train {

using nlohmann::json;

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.ids.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw Error(ErrorCode::InvalidParams, "subset index out of range");
    out.ids.push_back(ids[i]);
    out.labels.push_back(labels[i]);
  }
  if (has_inputs()) out.inputs = inputs.gather(indices);
  if (has_hogs()) out.hogs = hogs.gather(indices);
  return out;
}

Dataset Dataset::subset(std::span<const std::string> wanted_ids) const {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  std::vector<std::size_t> rows;
  rows.reserve(wanted_ids.size());
  for (const auto& id : wanted_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorCode::MissingSample, "no sample with id '" + id + "'");
    rows.push_back(it->second);
  }
  return subset(std::span<const std::size_t>(rows));
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be at least 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be at least 1");
  if (patience < 0 || patience > epochs) throw Error(ErrorCode::InvalidConfig, "patience must lie in [0, epochs]");
  if (!(validation_fraction > 0.0 && validation_fraction < 0.5))
    throw Error(ErrorCode::InvalidConfig, "validation_fraction must lie in (0, 0.5)");
  optimizer.validate();
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"patience", c.patience},
           {"seed", c.seed},
           {"validation_fraction", c.validation_fraction},
           {"optimizer",
            {{"learning_rate", c.optimizer.learning_rate},
             {"beta1", c.optimizer.beta1},
             {"beta2", c.optimizer.beta2},
             {"eps", c.optimizer.eps}}}};
}

void from_json(const json& j, TrainConfig& c) {
  c = TrainConfig{};
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      c.optimizer.learning_rate = o.value("learning_rate", c.optimizer.learning_rate);
      c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
      c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
      c.optimizer.eps = o.value("eps", c.optimizer.eps);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("training config: ") + e.what());
  }
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

void to_json(json& j, const TrainHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs)
    epochs.push_back({{"train_loss", e.train_loss},
                      {"train_acc", e.train_acc},
                      {"val_loss", optional_number(e.val_loss)},
                      {"val_acc", optional_number(e.val_acc)}});
  j = json{{"epochs", epochs}, {"best_epoch", h.best_epoch}, {"stopped_early", h.stopped_early},
           {"best_hash", h.best_hash}};
}

void from_json(const json& j, TrainHistory& h) {
  h = TrainHistory{};
  for (const auto& e : j.at("epochs"))
    h.epochs.push_back({e.at("train_loss").get<double>(), e.at("train_acc").get<double>(),
                        read_optional(e, "val_loss"), read_optional(e, "val_acc")});
  h.best_epoch = j.at("best_epoch").get<int>();
  h.stopped_early = j.at("stopped_early").get<bool>();
  h.best_hash = j.at("best_hash").get<std::uint64_t>();
}

namespace {

std::string num(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string history_csv(const TrainHistory& h) {
  std::string s = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    const auto& e = h.epochs[i];
    s += std::to_string(i) + "," + num(e.train_loss) + "," + num(e.train_acc) + "," +
         (e.val_loss ? num(*e.val_loss) : "") + "," + (e.val_acc ? num(*e.val_acc) : "") + "\n";
  }
  return s;
}

void export_history_csv(const TrainHistory& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << history_csv(h);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

void check_data(const model::FusionModel& m, const Dataset& d, const char* what) {
  if (d.size() == 0) throw Error(ErrorCode::EmptyDataset, std::string(what) + " set is empty");
  if (d.ids.size() != d.labels.size())
    throw Error(ErrorCode::LengthMismatch, std::string(what) + " set ids and labels differ in length");
  const auto& cfg = m.config();
  if (cfg.uses_hog()) {
    if (!d.has_hogs()) throw Error(ErrorCode::MissingSample, std::string(what) + " set has no HOG descriptors");
    if (d.hogs.dim(1) != cfg.hog_dim)
      throw Error(ErrorCode::FeatureMismatch, "HOG descriptors have " + std::to_string(d.hogs.dim(1)) +
                                                  " features, model expects " + std::to_string(cfg.hog_dim));
  }
  if (cfg.uses_images() && !d.has_inputs())
    throw Error(ErrorCode::MissingSample, std::string(what) + " set has no image inputs");
  for (int y : d.labels)
    if (y < 0 || y >= cfg.num_classes)
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(y) + " outside [0, " +
                                                  std::to_string(cfg.num_classes) + ")");
}

struct Batch {
  nn::Tensor inputs, hogs;
  std::vector<int> labels;
};

Batch make_batch(const Dataset& d, std::span<const std::size_t> rows) {
  Batch b;
  if (d.has_inputs()) b.inputs = d.inputs.gather(rows);
  if (d.has_hogs()) b.hogs = d.hogs.gather(rows);
  b.labels.reserve(rows.size());
  for (std::size_t r : rows) b.labels.push_back(d.labels[r]);
  return b;
}

std::size_t count_correct(const nn::Tensor& probs, std::span<const int> labels) {
  const auto pred = model::predict(probs);
  std::size_t c = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) c += pred[i] == labels[i];
  return c;
}

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kDropoutStream = 0x44524f50ULL;
constexpr std::uint64_t kHoldoutStream = 0x484f4c44ULL;

}  // namespace

nn::Tensor predict_proba(const model::FusionModel& m, const Dataset& data, int batch_size) {
  check_data(m, data, "evaluation");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be at least 1");
  const std::size_t n = data.size();
  nn::Tensor out({n, m.config().output_width()});
  std::vector<std::size_t> rows;
  for (std::size_t first = 0; first < n; first += static_cast<std::size_t>(batch_size)) {
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(batch_size), n - first);
    rows.resize(count);
    std::iota(rows.begin(), rows.end(), first);
    const Batch b = make_batch(data, rows);
    const nn::Tensor p = m.forward(b.inputs, b.hogs, nn::Mode::Infer, nullptr);
    std::copy(p.values().begin(), p.values().end(), out.data() + first * p.dim(1));
  }
  return out;
}

std::pair<double, double> loss_and_accuracy(const model::FusionModel& m, const Dataset& data, int batch_size) {
  const nn::Tensor probs = predict_proba(m, data, batch_size);
  const double loss = m.loss(probs, data.labels);
  const double acc = static_cast<double>(count_correct(probs, data.labels)) / static_cast<double>(data.size());
  return {loss, acc};
}

TrainHistory train(model::FusionModel& m, const Dataset& train_data, const Dataset* validation,
                   const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  check_data(m, train_data, "training");
  if (validation) check_data(m, *validation, "validation");
  const bool early_stopping = validation != nullptr && cfg.patience > 0;

  const std::size_t n = train_data.size();
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  Rng dropout_rng(mix_seed(cfg.seed, kDropoutStream));
  std::vector<std::size_t> order(n);
  nn::Gradients<float> grads;
  nn::Tensor probs;

  TrainHistory history;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::optional<nn::Parameters> snapshot;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(mix_seed(mix_seed(cfg.seed, kShuffleStream), static_cast<std::uint64_t>(epoch)));
    shuffle.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t first = 0; first < n; first += bs) {
      const std::size_t count = std::min(bs, n - first);
      const Batch b = make_batch(train_data, std::span<const std::size_t>(order).subspan(first, count));
      grads.clear();
      const double loss =
          m.loss_and_gradients(b.inputs, b.hogs, b.labels, nn::Mode::Train, &dropout_rng, grads, &probs);
      nn::adam_step(m.params(), grads, cfg.optimizer);
      loss_sum += loss * static_cast<double>(count);
      correct += count_correct(probs, b.labels);
    }

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    if (validation) {
      auto [vl, va] = loss_and_accuracy(m, *validation, cfg.batch_size);
      if (hooks.validation_loss_override) vl = hooks.validation_loss_override(epoch, vl);
      rec.val_loss = vl;
      rec.val_acc = va;
    }
    history.epochs.push_back(rec);
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, m, rec);

    if (!early_stopping) {
      history.best_epoch = epoch;
      continue;
    }
    if (*rec.val_loss <= best - kMinImprovement) {
      best = *rec.val_loss;
      history.best_epoch = epoch;
      since_best = 0;
      snapshot = m.params();
    } else if (++since_best >= cfg.patience) {
      history.stopped_early = true;
      break;
    }
  }

  if (snapshot) m.params() = std::move(*snapshot);
  history.best_hash = m.params().hash();
  return history;
}

namespace {

datasets::DatasetManifest as_manifest(const Dataset& d) {
  datasets::DatasetManifest m;
  m.records.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.records.push_back({d.ids[i], {}, d.labels[i]});
  return m;
}

}  // namespace

TrainHistory train_with_validation(model::FusionModel& m, const Dataset& data, const TrainConfig& cfg,
                                   const TrainHooks& hooks) {
  cfg.validate();
  if (cfg.patience == 0) return train(m, data, nullptr, cfg, hooks);
  const auto plan =
      datasets::split_train_test(as_manifest(data), 1.0 - cfg.validation_fraction, mix_seed(cfg.seed, kHoldoutStream));
  const Dataset fit = data.subset(std::span<const std::string>(plan.train_ids));
  const Dataset val = data.subset(std::span<const std::string>(plan.test_ids));
  return train(m, fit, &val, cfg, hooks);
}

metrics::MetricsReport evaluate(const model::FusionModel& m, const Dataset& data, metrics::Averaging averaging,
                                int batch_size) {
  const nn::Tensor probs = predict_proba(m, data, batch_size);
  return metrics::make_report(probs, data.labels, m.config().num_classes, averaging);
}

CvResult cross_validate(const Dataset& data, const model::ModelConfig& mcfg, const TrainConfig& tcfg, int k,
                        metrics::Averaging averaging) {
  const auto plan = datasets::kfold(as_manifest(data), k, tcfg.seed);
  CvResult result;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    std::vector<std::string> train_ids;
    for (std::size_t g = 0; g < plan.folds.size(); ++g)
      if (g != f) train_ids.insert(train_ids.end(), plan.folds[g].begin(), plan.folds[g].end());
    const Dataset fit = data.subset(std::span<const std::string>(train_ids));
    const Dataset test = data.subset(std::span<const std::string>(plan.folds[f]));
    auto m = model::FusionModel::build(mcfg, tcfg.seed + f);
    TrainConfig fold_cfg = tcfg;
    fold_cfg.seed = tcfg.seed + f;
    result.histories.push_back(train_with_validation(m, fit, fold_cfg));
    result.folds.push_back(evaluate(m, test, averaging, tcfg.batch_size));
  }
  result.mean = metrics::mean_report(result.folds);
  return result;
}

// ---- checkpoints -----------------------------------------------------------

namespace {

constexpr const char* kCheckpointMagic = "HOGFUSION-CHECKPOINT";
constexpr const char* kCheckpointVersion = "v1";

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::CorruptFile, path.string() + ": " + why);
}

std::string expect_line(std::istream& in, const std::filesystem::path& path, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) corrupt(path, "truncated header, expected '" + key + "'");
  if (line.rfind(key + " ", 0) != 0) corrupt(path, "expected '" + key + "' line");
  return line.substr(key.size() + 1);
}

json parse_json(const std::string& text, const std::filesystem::path& path, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    corrupt(path, "malformed " + what + " record");
  }
}

}  // namespace

void save_checkpoint(const model::FusionModel& m, const TrainHistory& history, const json& meta,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  const auto& slots = m.params().slots();
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "config " << json(m.config()).dump() << '\n';
  out << "history " << json(history).dump() << '\n';
  out << "meta " << meta.dump() << '\n';
  out << "params " << slots.size() << '\n';
  for (const auto& [name, s] : slots) {
    out << "param " << name;
    for (std::size_t d : s.value.shape()) out << ' ' << d;
    out << '\n';
  }
  out << "end\n";
  for (const auto& [name, s] : slots) model::write_f32_le(out, s.value.values());
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const model::ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) corrupt(path, "empty file");
  const std::string magic = kCheckpointMagic;
  if (line.rfind(magic + " ", 0) != 0) corrupt(path, "not a checkpoint");
  if (line != magic + " " + kCheckpointVersion)
    throw Error(ErrorCode::VersionMismatch, path.string() + ": unsupported checkpoint version '" +
                                                line.substr(magic.size() + 1) + "'");

  model::ModelConfig cfg;
  try {
    cfg = parse_json(expect_line(in, path, "config"), path, "config").get<model::ModelConfig>();
  } catch (const json::exception&) {
    corrupt(path, "malformed config record");
  }
  if (expected) {
    if (auto field = model::first_difference(*expected, cfg))
      throw Error(ErrorCode::VersionMismatch, path.string() + ": model configuration differs in field '" + *field + "'");
  }
  TrainHistory history;
  try {
    history = parse_json(expect_line(in, path, "history"), path, "history").get<TrainHistory>();
  } catch (const json::exception&) {
    corrupt(path, "malformed history record");
  }
  json meta = parse_json(expect_line(in, path, "meta"), path, "meta");

  std::size_t count = 0;
  {
    const std::string c = expect_line(in, path, "params");
    auto r = std::from_chars(c.data(), c.data() + c.size(), count);
    if (r.ec != std::errc{} || r.ptr != c.data() + c.size()) corrupt(path, "bad parameter count");
  }
  std::vector<std::pair<std::string, nn::Shape>> table;
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream fields(expect_line(in, path, "param"));
    std::string name;
    fields >> name;
    nn::Shape shape;
    std::size_t d;
    while (fields >> d) shape.push_back(d);
    if (name.empty() || shape.empty() || !fields.eof()) corrupt(path, "bad parameter line");
    table.emplace_back(name, shape);
  }
  if (!std::getline(in, line) || line != "end") corrupt(path, "missing header terminator");

  nn::Parameters params;
  for (const auto& [name, shape] : table) {
    nn::Tensor t(shape);
    model::read_f32_le(in, t.storage());
    if (!in) corrupt(path, "truncated parameter payload");
    params.add(name, std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) corrupt(path, "trailing bytes after payload");

  try {
    return Checkpoint{model::FusionModel(cfg, std::move(params)), std::move(history), std::move(meta)};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    corrupt(path, std::string("parameters do not match configuration: ") + e.what());
  }
}

}  // namespace hogfusion::train
