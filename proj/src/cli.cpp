// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "hogfusion/error.hpp"
#include "hogfusion/pipeline.hpp"
#include "hogfusion/synthetic.hpp"

namespace hogfusion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string manifest, features, config, out, task, backbone, checkpoint, image, id;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  bool skip_bad = false;
  int count = 200;
  int side = 32;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw Error(ErrorCode::InvalidConfig, std::string("--") + what + " is required");
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::FileNotFound, std::string(what) + " not found: " + path);
}

void require_out(const std::string& out) {
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "--out is required");
}

void write_text(const fs::path& path, const std::string& text) {
  pipeline::write_atomic(path, [&](const fs::path& tmp) {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    f << text;
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  });
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

enum class Task { Binary, Multiclass };

Task parse_task(const std::string& s) {
  if (s.empty() || s == "binary") return Task::Binary;
  if (s == "multiclass") return Task::Multiclass;
  throw Error(ErrorCode::InvalidConfig, "unknown task '" + s + "'");
}

const char* to_string(Task t) { return t == Task::Binary ? "binary" : "multiclass"; }

// Binary merges DR grades 1-4; multiclass keeps the five grades.
datasets::DatasetManifest apply_task(const datasets::DatasetManifest& m, Task task) {
  return task == Task::Binary ? datasets::binarize_dr(m) : m;
}

// Resolves the run configuration from the config file and command-line overrides.
pipeline::RunConfig resolve_config(const Options& o, Task task) {
  pipeline::RunConfig cfg;
  if (!o.config.empty()) {
    require_file(o.config, "config");
    cfg = pipeline::load_run_config(o.config);
  }
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.k) cfg.folds = *o.k;
  cfg.model.num_classes = task == Task::Binary ? 2 : 5;
  if (!o.backbone.empty()) {
    const std::string pre = "precomputed:";
    if (o.backbone == "standin") {
      cfg.model.backbone.kind = model::BackboneKind::Standin;
    } else if (o.backbone.rfind(pre, 0) == 0 && o.backbone.size() > pre.size()) {
      cfg.model.backbone.kind = model::BackboneKind::Precomputed;
      cfg.model.backbone.path = o.backbone.substr(pre.size());
    } else {
      throw Error(ErrorCode::InvalidConfig, "--backbone must be 'standin' or 'precomputed:<path>'");
    }
  }
  cfg.validate();
  return cfg;
}

std::optional<model::FeatureStore> load_store(const model::ModelConfig& mc) {
  if (!mc.uses_images() || mc.backbone.kind != model::BackboneKind::Precomputed) return std::nullopt;
  require_file(mc.backbone.path, "backbone feature file");
  return model::FeatureStore::load(mc.backbone.path, mc.backbone.input_shape);
}

std::optional<hog::FeatureMatrix> load_features(const std::string& path) {
  if (path.empty()) return std::nullopt;
  require_file(path, "features");
  return hog::import_feature_matrix(path);
}

train::Dataset load_dataset(const datasets::DatasetManifest& m, const pipeline::RunConfig& cfg,
                            const std::string& features_path) {
  const auto features = cfg.model.uses_hog() ? load_features(features_path) : std::nullopt;
  const auto store = load_store(cfg.model);
  return pipeline::assemble_dataset(m, cfg, features ? &*features : nullptr, store ? &*store : nullptr,
                                    pipeline::worker_threads());
}

json run_record(const std::string& command, const pipeline::RunConfig& cfg, Task task) {
  return json{{"command", command},
              {"seed", cfg.train.seed},
              {"config_hash", pipeline::config_hash(cfg)},
              {"threads", pipeline::worker_threads()},
              {"training_threads", 1},
              {"task", to_string(task)},
              {"config", cfg},
              {"created", utc_timestamp()}};
}

void write_report(const fs::path& dir, const std::string& stem, const metrics::MetricsReport& r) {
  write_text(dir / (stem + ".json"), to_json(r).dump(2) + "\n");
  write_text(dir / (stem + ".txt"), metrics::to_text(r));
}

void write_roc(const fs::path& path, const nn::Tensor& probs, std::span<const int> labels, int classes) {
  if (classes != 2) return;
  const auto scores = model::positive_scores(probs);
  try {
    const auto pts = metrics::roc_curve(scores, labels);
    pipeline::write_atomic(path, [&](const fs::path& tmp) { metrics::export_roc_csv(pts, tmp); });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingleClassInput) throw;
  }
}

// ---- commands --------------------------------------------------------------

int cmd_synth(const Options& o, std::ostream& out) {
  require_out(o.out);
  const std::uint64_t seed = o.seed.value_or(7);
  const auto m = datasets::write_synthetic_dataset(o.out, o.count, o.side, seed);

  pipeline::RunConfig cfg;
  cfg.hog_side = o.side;
  cfg.model.hog_dim = hog::descriptor_length(o.side, o.side, cfg.hog);
  cfg.model.backbone.input_shape = {static_cast<std::size_t>(o.side), static_cast<std::size_t>(o.side), 3};
  cfg.model.backbone.channels = {8, 16};
  cfg.train.seed = seed;
  cfg.validate();
  write_text(fs::path(o.out) / "config.json", json(cfg).dump(2) + "\n");
  out << "wrote " << m.size() << " images, manifest.csv and config.json to " << o.out << "\n";
  return 0;
}

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
  require_file(o.manifest, "manifest");
  require_out(o.out);
  const Task task = parse_task(o.task);
  pipeline::RunConfig cfg;
  if (!o.config.empty()) {
    require_file(o.config, "config");
    cfg = pipeline::load_run_config(o.config);
  }
  cfg.hog.validate();
  const auto m = apply_task(datasets::load_manifest(o.manifest), task);
  const std::size_t n = m.size();
  const auto res = pipeline::extract_features(m, cfg.hog, cfg.hog_side, pipeline::worker_threads(),
                                              [&](std::size_t done) {
                                                if (done == n || done % 100 == 0)
                                                  err << "extracted " << done << "/" << n << "\n";
                                              });
  for (const auto& f : res.failures) err << "failed: " << f.id << ": " << f.message << "\n";
  if (!res.failures.empty() && !o.skip_bad) {
    err << "error: " << res.failures.size() << " image(s) failed; no output written (use --skip-bad to skip them)\n";
    return 1;
  }
  if (res.features.size() == 0) throw Error(ErrorCode::EmptyDataset, "no descriptors extracted");
  pipeline::write_atomic(o.out, [&](const fs::path& tmp) { hog::export_feature_matrix(res.features, tmp); });
  out << "wrote " << res.features.size() << " descriptors of length " << res.features.dim << " to " << o.out
      << "\n";
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  require_file(o.manifest, "manifest");
  require_out(o.out);
  const Task task = parse_task(o.task);
  const auto cfg = resolve_config(o, task);
  const auto m = apply_task(datasets::load_manifest(o.manifest), task);
  const auto data = load_dataset(m, cfg, o.features);

  const auto plan = datasets::split_train_test(m, cfg.split_ratio, cfg.train.seed);
  const auto fit = data.subset(std::span<const std::string>(plan.train_ids));
  const auto test = data.subset(std::span<const std::string>(plan.test_ids));

  auto model = model::FusionModel::build(cfg.model, cfg.train.seed);
  const auto history = train::train_with_validation(model, fit, cfg.train);
  const auto probs = train::predict_proba(model, test, cfg.train.batch_size);
  const auto report = metrics::make_report(probs, test.labels, cfg.model.num_classes, cfg.averaging);

  const fs::path dir = o.out;
  fs::create_directories(dir);
  const json meta{{"run", cfg}, {"task", to_string(task)}};
  const fs::path ckpt = dir / "checkpoint.bin";
  pipeline::write_atomic(ckpt, [&](const fs::path& tmp) { train::save_checkpoint(model, history, meta, tmp); });
  pipeline::write_atomic(dir / "history.csv", [&](const fs::path& tmp) { train::export_history_csv(history, tmp); });
  write_report(dir, "report", report);
  write_roc(dir / "roc.csv", probs, test.labels, cfg.model.num_classes);
  pipeline::write_atomic(dir / "split.txt", [&](const fs::path& tmp) { datasets::write_plan(plan, tmp); });
  write_text(dir / "run.json", run_record("train", cfg, task).dump(2) + "\n");

  // Read back what was written before reporting success.
  const auto reloaded = train::load_checkpoint(ckpt, &cfg.model);
  if (reloaded.model.params().hash() != model.params().hash())
    throw Error(ErrorCode::CorruptFile, "checkpoint readback differs from the trained weights");
  if (read_text(dir / "history.csv") != train::history_csv(history))
    throw Error(ErrorCode::CorruptFile, "history readback differs");

  out << metrics::to_text(report);
  out << "epochs_run=" << history.epochs.size() << "\nbest_epoch=" << history.best_epoch
      << "\nstopped_early=" << (history.stopped_early ? "true" : "false") << "\nartifacts=" << dir.string() << "\n";
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  require_file(o.checkpoint, "checkpoint");
  require_file(o.manifest, "manifest");
  auto ck = train::load_checkpoint(o.checkpoint);
  auto cfg = ck.meta.at("run").get<pipeline::RunConfig>();
  const Task task = parse_task(o.task.empty() ? ck.meta.value("task", std::string("binary")) : o.task);
  if ((task == Task::Binary) != (cfg.model.num_classes == 2))
    throw Error(ErrorCode::VersionMismatch, "checkpoint was trained for a different task");
  if (!o.backbone.empty()) cfg.model.backbone.path = resolve_config(o, task).model.backbone.path;
  const auto m = apply_task(datasets::load_manifest(o.manifest), task);
  const auto data = load_dataset(m, cfg, o.features);
  const auto probs = train::predict_proba(ck.model, data, cfg.train.batch_size);
  const auto report = metrics::make_report(probs, data.labels, cfg.model.num_classes, cfg.averaging);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_report(o.out, "eval_report", report);
    write_roc(fs::path(o.out) / "eval_roc.csv", probs, data.labels, cfg.model.num_classes);
  }
  out << metrics::to_text(report);
  return 0;
}

int cmd_cv(const Options& o, std::ostream& out) {
  require_file(o.manifest, "manifest");
  require_out(o.out);
  const Task task = parse_task(o.task);
  const auto cfg = resolve_config(o, task);
  const auto m = apply_task(datasets::load_manifest(o.manifest), task);
  const auto data = load_dataset(m, cfg, o.features);
  const auto plan = datasets::kfold(m, cfg.folds, cfg.train.seed);
  const auto cv = train::cross_validate(data, cfg.model, cfg.train, cfg.folds, cfg.averaging);

  const fs::path dir = o.out;
  fs::create_directories(dir);
  json folds = json::array();
  std::string text;
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    folds.push_back(to_json(cv.folds[f]));
    text += "[fold " + std::to_string(f) + "]\n" + metrics::to_text(cv.folds[f]);
  }
  text += "[mean]\n" + metrics::to_text(cv.mean);
  write_text(dir / "cv_report.json", json{{"folds", folds}, {"mean", to_json(cv.mean)}}.dump(2) + "\n");
  write_text(dir / "cv_report.txt", text);
  pipeline::write_atomic(dir / "folds.txt", [&](const fs::path& tmp) { datasets::write_plan(plan, tmp); });
  write_text(dir / "run.json", run_record("cv", cfg, task).dump(2) + "\n");
  out << text;
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
  require_file(o.checkpoint, "checkpoint");
  auto ck = train::load_checkpoint(o.checkpoint);
  auto cfg = ck.meta.at("run").get<pipeline::RunConfig>();
  const auto& mc = cfg.model;
  if (!o.backbone.empty()) cfg.model.backbone.path = resolve_config(o, parse_task(ck.meta.value("task", "binary"))).model.backbone.path;

  std::optional<imageio::RgbImage> image;
  if (!o.image.empty()) {
    require_file(o.image, "image");
    image = imageio::load_image(o.image);
  }
  nn::Tensor hogs, inputs;
  if (mc.uses_hog()) {
    if (!o.features.empty()) {
      if (o.id.empty()) throw Error(ErrorCode::InvalidConfig, "--features needs --id");
      const auto fm = *load_features(o.features);
      const auto it = std::find(fm.ids.begin(), fm.ids.end(), o.id);
      if (it == fm.ids.end()) throw Error(ErrorCode::MissingSample, "no row with id '" + o.id + "'");
      const auto& row = fm.rows[static_cast<std::size_t>(it - fm.ids.begin())];
      hogs = nn::Tensor({1, row.size()}, std::vector<float>(row.begin(), row.end()));
    } else if (image) {
      const auto d = hog::extract(*image, cfg.hog, cfg.hog_side);
      hogs = nn::Tensor({1, d.size()}, std::vector<float>(d.begin(), d.end()));
    } else {
      throw Error(ErrorCode::InvalidConfig, "predict needs --image or --features with --id");
    }
    if (hogs.dim(1) != mc.hog_dim)
      throw Error(ErrorCode::FeatureMismatch, "descriptor has " + std::to_string(hogs.dim(1)) +
                                                  " features, model expects " + std::to_string(mc.hog_dim));
  }
  if (mc.uses_images()) {
    if (mc.backbone.kind == model::BackboneKind::Precomputed) {
      if (o.id.empty()) throw Error(ErrorCode::InvalidConfig, "a precomputed backbone needs --id");
      inputs = load_store(cfg.model)->get(o.id);
    } else {
      if (!image) throw Error(ErrorCode::InvalidConfig, "predict needs --image for the image branch");
      const auto& s = mc.backbone.input_shape;
      const auto r = imageio::resize_bilinear(*image, static_cast<int>(s[1]), static_cast<int>(s[0]));
      inputs = nn::Tensor({1, s[0], s[1], 3}, std::vector<float>(r.data.begin(), r.data.end()));
    }
  }

  const auto probs = ck.model.forward(inputs, hogs, nn::Mode::Infer, nullptr);
  const int cls = model::predict(probs).front();
  out << "class=" << cls << "\n";
  std::vector<double> p;
  if (probs.dim(1) == 1) {
    p = {1.0 - probs.at(0, 0), probs.at(0, 0)};
  } else {
    for (std::size_t j = 0; j < probs.dim(1); ++j) p.push_back(probs.at(0, j));
  }
  for (std::size_t j = 0; j < p.size(); ++j) out << "prob[" << j << "]=" << p[j] << "\n";
  const double top = *std::max_element(p.begin(), p.end());
  if (std::count(p.begin(), p.end(), top) > 1)
    out << "note: tie between top classes; resolved to the lowest class index\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid HOG + CNN image classifier"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* c) {
    c->add_option("--manifest", o.manifest, "CSV with id,path,label columns");
    c->add_option("--features", o.features, "HOG feature CSV from extract-hog");
    c->add_option("--config", o.config, "JSON run configuration");
    c->add_option("--out", o.out, "Output directory (file for extract-hog)");
    c->add_option("--seed", o.seed, "Seed for splits, initialisation and shuffling");
    c->add_option("--task", o.task, "binary or multiclass")->check(CLI::IsMember({"binary", "multiclass"}));
    c->add_option("--backbone", o.backbone, "standin or precomputed:<path>");
  };

  auto* synth = app.add_subcommand("synth", "Write the synthetic stripes-vs-blobs dataset");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--seed", o.seed, "Generator seed (default 7)");
  synth->add_option("--count", o.count, "Number of images")->check(CLI::Range(2, 1000000));
  synth->add_option("--side", o.side, "Image side in pixels")->check(CLI::Range(16, 4096));

  auto* extract = app.add_subcommand("extract-hog", "Compute HOG descriptors for a manifest");
  add_common(extract);
  extract->add_flag("--skip-bad", o.skip_bad, "Skip unreadable images instead of failing");

  auto* train_cmd = app.add_subcommand("train", "Train on a stratified split and report test metrics");
  add_common(train_cmd);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  add_common(eval);
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint.bin from train")->required();

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  add_common(cv);
  cv->add_option("--k", o.k, "Number of folds (default 5)");

  auto* predict = app.add_subcommand("predict", "Classify one image or feature row");
  predict->add_option("--checkpoint", o.checkpoint, "checkpoint.bin from train")->required();
  predict->add_option("--image", o.image, "Image file");
  predict->add_option("--features", o.features, "HOG feature CSV");
  predict->add_option("--id", o.id, "Row id in --features or the backbone feature file");
  predict->add_option("--backbone", o.backbone, "precomputed:<path> to override the stored feature file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    if (extract->parsed()) return cmd_extract(o, out, err);
    if (train_cmd->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (cv->parsed()) return cmd_cv(o, out);
    if (predict->parsed()) return cmd_predict(o, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hogfusion::cli
