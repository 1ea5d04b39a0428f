// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "hogfusion/error.hpp"
#include "hogfusion/image.hpp"

namespace hogfusion::pipeline {

using nlohmann::json;

void RunConfig::validate() const {
  model.validate();
  train.validate();
  hog.validate();
  if (hog_side < 1) throw Error(ErrorCode::InvalidConfig, "hog.image_side must be positive");
  const std::size_t d = hog::descriptor_length(hog_side, hog_side, hog);
  if (model.uses_hog() && d != model.hog_dim)
    throw Error(ErrorCode::FeatureMismatch, "HOG settings give " + std::to_string(d) +
                                                " features per image, model.hog_dim is " +
                                                std::to_string(model.hog_dim));
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "split.ratio must lie in (0, 1)");
  if (folds < 2) throw Error(ErrorCode::InvalidConfig, "cv.k must be at least 2");
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"model", c.model},
           {"train", c.train},
           {"hog",
            {{"orientations", c.hog.orientations},
             {"cell_size", c.hog.cell_size},
             {"block_size", c.hog.block_size},
             {"clip", c.hog.clip},
             {"epsilon", c.hog.epsilon},
             {"image_side", c.hog_side}}},
           {"split", {{"ratio", c.split_ratio}}},
           {"cv", {{"k", c.folds}}},
           {"averaging", metrics::to_string(c.averaging)}};
}

void from_json(const json& j, RunConfig& c) {
  c = RunConfig{};
  try {
    if (j.contains("model")) c.model = j.at("model").get<model::ModelConfig>();
    if (j.contains("train")) c.train = j.at("train").get<train::TrainConfig>();
    if (j.contains("hog")) {
      const auto& h = j.at("hog");
      c.hog.orientations = h.value("orientations", c.hog.orientations);
      c.hog.cell_size = h.value("cell_size", c.hog.cell_size);
      c.hog.block_size = h.value("block_size", c.hog.block_size);
      c.hog.clip = h.value("clip", c.hog.clip);
      c.hog.epsilon = h.value("epsilon", c.hog.epsilon);
      c.hog_side = h.value("image_side", c.hog_side);
    }
    if (j.contains("split")) c.split_ratio = j.at("split").value("ratio", c.split_ratio);
    if (j.contains("cv")) c.folds = j.at("cv").value("k", c.folds);
    if (j.contains("averaging")) c.averaging = metrics::parse_averaging(j.at("averaging").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return j.get<RunConfig>();
}

std::string config_hash(const RunConfig& c) {
  const std::string text = json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int worker_threads() {
  if (const char* env = std::getenv("HOGFUSION_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs job(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
}

}  // namespace

ExtractionResult extract_features(const datasets::DatasetManifest& m, const hog::HogParams& params, int side,
                                  int threads, const std::function<void(std::size_t)>& progress) {
  params.validate();
  const std::size_t n = m.size();
  std::vector<hog::HogDescriptor> rows(n);
  std::vector<std::string> errors(n);
  std::vector<char> ok(n, 0);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      rows[i] = hog::extract(imageio::load_image(m.records[i].path), params, side);
      ok[i] = 1;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
    const std::size_t d = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(d);
    }
  });

  ExtractionResult r;
  r.features.dim = hog::descriptor_length(side, side, params);
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) {
      r.failures.push_back({m.records[i].id, errors[i]});
      continue;
    }
    r.features.ids.push_back(m.records[i].id);
    r.features.labels.push_back(m.records[i].label);
    r.features.rows.push_back(std::move(rows[i]));
  }
  return r;
}

nn::Tensor load_image_batch(const datasets::DatasetManifest& m, const std::array<std::size_t, 3>& shape,
                            int threads) {
  if (shape[2] != 3) throw Error(ErrorCode::InvalidConfig, "image backbone needs 3 input channels");
  const std::size_t h = shape[0], w = shape[1], stride = h * w * 3;
  nn::Tensor out({m.size(), h, w, 3});
  std::vector<std::string> errors(m.size());
  parallel_for(m.size(), threads, [&](std::size_t i) {
    try {
      const auto img = imageio::resize_bilinear(imageio::load_image(m.records[i].path), static_cast<int>(w),
                                                static_cast<int>(h));
      float* dst = out.data() + i * stride;
      for (std::size_t k = 0; k < stride; ++k) dst[k] = img.data[k];
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!errors[i].empty()) throw Error(ErrorCode::CorruptImage, m.records[i].id + ": " + errors[i]);
  return out;
}

train::Dataset assemble_dataset(const datasets::DatasetManifest& m, const RunConfig& cfg,
                                const hog::FeatureMatrix* features, const model::FeatureStore* store, int threads) {
  if (m.size() == 0) throw Error(ErrorCode::EmptyDataset, "manifest has no records");
  train::Dataset d;
  for (const auto& r : m.records) {
    d.ids.push_back(r.id);
    d.labels.push_back(r.label);
  }

  if (cfg.model.uses_hog()) {
    hog::FeatureMatrix extracted;
    if (!features) {
      auto res = extract_features(m, cfg.hog, cfg.hog_side, threads);
      if (!res.failures.empty())
        throw Error(ErrorCode::CorruptImage, res.failures.front().id + ": " + res.failures.front().message);
      extracted = std::move(res.features);
      features = &extracted;
    }
    if (features->dim != cfg.model.hog_dim)
      throw Error(ErrorCode::FeatureMismatch, "feature file has " + std::to_string(features->dim) +
                                                  " columns, model expects " + std::to_string(cfg.model.hog_dim));
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < features->ids.size(); ++i) index.emplace(features->ids[i], i);
    d.hogs = nn::Tensor({m.size(), features->dim});
    for (std::size_t i = 0; i < m.size(); ++i) {
      auto it = index.find(m.records[i].id);
      if (it == index.end())
        throw Error(ErrorCode::MissingSample, "no HOG descriptor for id '" + m.records[i].id + "'");
      std::copy(features->rows[it->second].begin(), features->rows[it->second].end(),
                d.hogs.data() + i * features->dim);
    }
  }

  if (cfg.model.uses_images()) {
    const auto& bb = cfg.model.backbone;
    if (bb.kind == model::BackboneKind::Precomputed) {
      if (!store) throw Error(ErrorCode::InvalidConfig, "precomputed backbone needs a feature file");
      const auto& s = bb.input_shape;
      const std::size_t stride = s[0] * s[1] * s[2];
      d.inputs = nn::Tensor({m.size(), s[0], s[1], s[2]});
      for (std::size_t i = 0; i < m.size(); ++i) {
        const auto v = store->view(m.records[i].id);
        std::copy(v.begin(), v.end(), d.inputs.data() + i * stride);
      }
    } else {
      d.inputs = load_image_batch(m, bb.input_shape, threads);
    }
  }
  return d;
}

void write_atomic(const std::filesystem::path& path, const std::function<void(const std::filesystem::path&)>& write) {
  auto tmp = path;
  tmp += ".tmp";
  try {
    write(tmp);
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

}  // namespace hogfusion::pipeline
