// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hogfusion/error.hpp"

namespace hogfusion::model {

using nn::LayerKind;
using nn::LayerSpec;
using nn::Shape;

// ---- config ----------------------------------------------------------------

std::array<std::size_t, 3> BackboneSpec::output_shape() const {
  if (kind == BackboneKind::Precomputed) return input_shape;
  auto [h, w, c] = input_shape;
  for (int ch : channels) {
    if (h < 3 || w < 3) return {0, 0, 0};
    h = (h - 2) / 2;
    w = (w - 2) / 2;
    c = static_cast<std::size_t>(ch);
  }
  return {h, w, c};
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
  if (num_classes < 2) fail("num_classes must be at least 2");
  if (binary_head == BinaryHead::Sigmoid1 && num_classes != 2) fail("sigmoid1 head requires num_classes == 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (head_hidden.empty()) fail("head_hidden must not be empty");
  for (int v : head_hidden)
    if (v < 1) fail("head_hidden widths must be >= 1");
  if (uses_hog()) {
    if (hog_dim < 1) fail("hog_dim must be >= 1");
    if (hog_hidden.empty()) fail("hog_hidden must not be empty");
    for (int v : hog_hidden)
      if (v < 1) fail("hog_hidden widths must be >= 1");
  }
  if (uses_images()) {
    if (head_conv_filters < 1 || cnn_embed_dim < 1) fail("CNN head widths must be >= 1");
    for (std::size_t d : backbone.input_shape)
      if (d < 1) fail("backbone input_shape entries must be >= 1");
    for (int c : backbone.channels)
      if (c < 1) fail("backbone channels must be >= 1");
    if (!(backbone.input_scale > 0.0) || !std::isfinite(backbone.input_scale))
      fail("backbone input_scale must be positive and finite");
    if (backbone.kind == BackboneKind::Standin) {
      auto [h, w, c] = backbone.input_shape;
      for (std::size_t i = 0; i < backbone.channels.size(); ++i) {
        if (h < 4 || w < 4) fail("stand-in backbone input too small for its conv/pool stages");
        h = (h - 2) / 2;
        w = (w - 2) / 2;
      }
    }
    const auto out = backbone.output_shape();
    if (out[0] < 4 || out[1] < 4)
      fail("backbone output " + std::to_string(out[0]) + "x" + std::to_string(out[1]) +
           " leaves no room for the 3x3 conv and 2x2 pool of the CNN head");
  }
}

std::size_t ModelConfig::concat_width() const {
  std::size_t w = 0;
  if (uses_images()) w += static_cast<std::size_t>(cnn_embed_dim);
  if (uses_hog()) w += static_cast<std::size_t>(hog_hidden.back());
  return w;
}

std::size_t ModelConfig::output_width() const {
  return binary_head == BinaryHead::Sigmoid1 ? 1 : static_cast<std::size_t>(num_classes);
}

std::size_t ModelConfig::cnn_flatten_width() const {
  const auto out = backbone.output_shape();
  return ((out[0] - 2) / 2) * ((out[1] - 2) / 2) * static_cast<std::size_t>(head_conv_filters);
}

namespace {

const char* to_string(BackboneKind k) { return k == BackboneKind::Standin ? "standin" : "precomputed"; }
const char* to_string(BinaryHead h) { return h == BinaryHead::Softmax2 ? "softmax2" : "sigmoid1"; }
const char* to_string(Branches b) {
  switch (b) {
    case Branches::Fused: return "fused";
    case Branches::HogOnly: return "hog_only";
    case Branches::CnnOnly: return "cnn_only";
  }
  return "fused";
}

template <typename E>
E parse_enum(const nlohmann::json& j, const char* key, std::initializer_list<std::pair<const char*, E>> options,
             E fallback) {
  if (!j.contains(key)) return fallback;
  const auto s = j.at(key).get<std::string>();
  for (const auto& [name, value] : options)
    if (s == name) return value;
  throw Error(ErrorCode::InvalidConfig, std::string("unknown value '") + s + "' for " + key);
}

}  // namespace

void to_json(nlohmann::json& j, const ModelConfig& cfg) {
  j = nlohmann::json{
      {"num_classes", cfg.num_classes},
      {"hog_dim", cfg.hog_dim},
      {"hog_hidden", cfg.hog_hidden},
      {"head_conv_filters", cfg.head_conv_filters},
      {"cnn_embed_dim", cfg.cnn_embed_dim},
      {"head_hidden", cfg.head_hidden},
      {"dropout_rate", cfg.dropout_rate},
      {"binary_head", to_string(cfg.binary_head)},
      {"branches", to_string(cfg.branches)},
      {"backbone",
       {{"kind", to_string(cfg.backbone.kind)},
        {"input_shape", cfg.backbone.input_shape},
        {"channels", cfg.backbone.channels},
        {"input_scale", cfg.backbone.input_scale},
        {"trainable", cfg.backbone.trainable},
        {"path", cfg.backbone.path}}},
  };
}

void from_json(const nlohmann::json& j, ModelConfig& cfg) {
  try {
    const ModelConfig d;
    cfg.num_classes = j.value("num_classes", d.num_classes);
    cfg.hog_dim = j.value("hog_dim", d.hog_dim);
    cfg.hog_hidden = j.value("hog_hidden", d.hog_hidden);
    cfg.head_conv_filters = j.value("head_conv_filters", d.head_conv_filters);
    cfg.cnn_embed_dim = j.value("cnn_embed_dim", d.cnn_embed_dim);
    cfg.head_hidden = j.value("head_hidden", d.head_hidden);
    cfg.dropout_rate = j.value("dropout_rate", d.dropout_rate);
    cfg.binary_head = parse_enum(j, "binary_head",
                                 {{"softmax2", BinaryHead::Softmax2}, {"sigmoid1", BinaryHead::Sigmoid1}},
                                 d.binary_head);
    cfg.branches = parse_enum(
        j, "branches",
        {{"fused", Branches::Fused}, {"hog_only", Branches::HogOnly}, {"cnn_only", Branches::CnnOnly}}, d.branches);
    cfg.backbone = d.backbone;
    if (j.contains("backbone")) {
      const auto& b = j.at("backbone");
      cfg.backbone.kind = parse_enum(
          b, "kind", {{"standin", BackboneKind::Standin}, {"precomputed", BackboneKind::Precomputed}},
          d.backbone.kind);
      cfg.backbone.input_shape = b.value("input_shape", d.backbone.input_shape);
      cfg.backbone.channels = b.value("channels", d.backbone.channels);
      cfg.backbone.input_scale = b.value("input_scale", d.backbone.input_scale);
      cfg.backbone.trainable = b.value("trainable", d.backbone.trainable);
      cfg.backbone.path = b.value("path", d.backbone.path);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("model config: ") + e.what());
  }
}

namespace {

std::optional<std::string> diff_json(const nlohmann::json& a, const nlohmann::json& b, const std::string& prefix) {
  if (a.is_object() && b.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (!b.contains(it.key())) return key;
      if (auto d = diff_json(it.value(), b.at(it.key()), key)) return d;
    }
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key())) return prefix.empty() ? it.key() : prefix + "." + it.key();
    return std::nullopt;
  }
  if (a != b) return prefix;
  return std::nullopt;
}

}  // namespace

std::optional<std::string> first_difference(const ModelConfig& a, const ModelConfig& b) {
  return diff_json(nlohmann::json(a), nlohmann::json(b), "");
}

// ---- parameter layout ------------------------------------------------------

namespace {

struct ParamPlan {
  std::string name;
  Shape shape;
  bool relu_init;  // He-uniform when true, Glorot-uniform otherwise; biases are zero
};

std::vector<ParamPlan> plan_parameters(const ModelConfig& cfg) {
  std::vector<ParamPlan> plan;
  auto add_dense = [&plan](const std::string& prefix, const std::string& suffix, std::size_t in, std::size_t out,
                           bool relu) {
    plan.push_back({prefix + ".W" + suffix, {in, out}, relu});
    plan.push_back({prefix + ".b" + suffix, {out}, relu});
  };
  auto add_conv = [&plan](const std::string& prefix, std::size_t cin, std::size_t cout) {
    plan.push_back({prefix + ".K", {3, 3, cin, cout}, true});
    plan.push_back({prefix + ".b", {cout}, true});
  };
  if (cfg.uses_images()) {
    std::size_t c = cfg.backbone.input_shape[2];
    if (cfg.backbone.kind == BackboneKind::Standin) {
      for (std::size_t i = 0; i < cfg.backbone.channels.size(); ++i) {
        const auto out = static_cast<std::size_t>(cfg.backbone.channels[i]);
        add_conv("backbone.conv" + std::to_string(i + 1), c, out);
        c = out;
      }
    }
    add_conv("head_conv", c, static_cast<std::size_t>(cfg.head_conv_filters));
    add_dense("cnn_fc", "", cfg.cnn_flatten_width(), static_cast<std::size_t>(cfg.cnn_embed_dim), true);
  }
  if (cfg.uses_hog()) {
    std::size_t in = cfg.hog_dim;
    for (std::size_t i = 0; i < cfg.hog_hidden.size(); ++i) {
      const auto out = static_cast<std::size_t>(cfg.hog_hidden[i]);
      add_dense("hog", std::to_string(i + 1), in, out, true);
      in = out;
    }
  }
  std::size_t in = cfg.concat_width();
  for (std::size_t i = 0; i < cfg.head_hidden.size(); ++i) {
    const auto out = static_cast<std::size_t>(cfg.head_hidden[i]);
    add_dense("cls", std::to_string(i + 1), in, out, true);
    in = out;
  }
  add_dense("out", "", in, cfg.output_width(), false);
  return plan;
}

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

// ---- model -----------------------------------------------------------------

template <typename T>
BasicFusionModel<T> BasicFusionModel<T>::build(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  nn::BasicParameters<T> params;
  for (const auto& p : plan_parameters(cfg)) {
    Tensor t(p.shape);
    const bool is_bias = p.shape.size() == 1;
    if (!is_bias) {
      const std::size_t fan_out = p.shape.back();
      const std::size_t fan_in = t.size() / fan_out;
      const double limit = p.relu_init ? std::sqrt(6.0 / static_cast<double>(fan_in))
                                       : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      Rng rng(mix_seed(seed, name_hash(p.name)));
      for (T& v : t.values()) v = static_cast<T>(rng.uniform(-limit, limit));
    }
    params.add(p.name, std::move(t));
  }
  BasicFusionModel model(cfg, std::move(params), true);

  // Shape audit: a dry run on a zero batch of two must go through.
  const std::size_t batch = 2;
  Tensor images;
  Tensor hogs;
  if (cfg.uses_images()) {
    const auto& s = cfg.backbone.input_shape;
    images = Tensor({batch, s[0], s[1], s[2]});
  }
  if (cfg.uses_hog()) hogs = Tensor({batch, cfg.hog_dim});
  const Tensor probs = model.forward(images, hogs, nn::Mode::Infer, nullptr);
  if (probs.shape() != Shape{batch, cfg.output_width()})
    throw Error(ErrorCode::InvalidConfig, "shape audit failed: output " + nn::shape_string(probs.shape()));
  return model;
}

template <typename T>
BasicFusionModel<T>::BasicFusionModel(ModelConfig cfg, nn::BasicParameters<T> params)
    : BasicFusionModel(std::move(cfg), std::move(params), true) {
  const auto plan = plan_parameters(config_);
  if (plan.size() != params_.size())
    throw Error(ErrorCode::ShapeMismatch, "parameter count " + std::to_string(params_.size()) +
                                              " does not match configuration (" + std::to_string(plan.size()) + ")");
  for (const auto& p : plan) {
    if (!params_.contains(p.name)) throw Error(ErrorCode::UnknownParameter, "missing parameter " + p.name);
    if (params_.get(p.name).shape() != p.shape)
      throw Error(ErrorCode::ShapeMismatch, p.name + " has shape " + nn::shape_string(params_.get(p.name).shape()) +
                                                ", expected " + nn::shape_string(p.shape));
  }
}

template <typename T>
BasicFusionModel<T>::BasicFusionModel(ModelConfig cfg, nn::BasicParameters<T> params, bool)
    : config_(std::move(cfg)), params_(std::move(params)) {
  config_.validate();
  build_stacks();
}

template <typename T>
void BasicFusionModel<T>::build_stacks() {
  std::vector<LayerSpec> layers;
  if (config_.uses_images()) {
    if (config_.backbone.kind == BackboneKind::Standin) {
      for (std::size_t i = 0; i < config_.backbone.channels.size(); ++i) {
        const std::string p = "backbone.conv" + std::to_string(i + 1);
        layers.push_back({LayerKind::Conv2d, p + ".K", p + ".b"});
        layers.push_back({LayerKind::Relu, "", ""});
        layers.push_back({LayerKind::MaxPool, "", ""});
      }
    }
    backbone_ = nn::Stack<T>(std::move(layers));
    cnn_ = nn::Stack<T>({{LayerKind::Conv2d, "head_conv.K", "head_conv.b"},
                         {LayerKind::Relu, "", ""},
                         {LayerKind::MaxPool, "", ""},
                         {LayerKind::Flatten, "", ""},
                         {LayerKind::Dense, "cnn_fc.W", "cnn_fc.b"},
                         {LayerKind::Relu, "", ""}});
  }
  if (config_.uses_hog()) {
    layers.clear();
    for (std::size_t i = 0; i < config_.hog_hidden.size(); ++i) {
      const std::string n = std::to_string(i + 1);
      layers.push_back({LayerKind::Dense, "hog.W" + n, "hog.b" + n});
      layers.push_back({LayerKind::Relu, "", ""});
    }
    hog_ = nn::Stack<T>(std::move(layers));
  }
  layers.clear();
  for (std::size_t i = 0; i < config_.head_hidden.size(); ++i) {
    const std::string n = std::to_string(i + 1);
    layers.push_back({LayerKind::Dense, "cls.W" + n, "cls.b" + n});
    layers.push_back({LayerKind::Relu, "", ""});
  }
  layers.push_back({LayerKind::Dropout, "", "", config_.dropout_rate});
  layers.push_back({LayerKind::Dense, "out.W", "out.b"});
  head_ = nn::Stack<T>(std::move(layers));
}

template <typename T>
bool BasicFusionModel<T>::is_trainable(const std::string& name) const {
  if (name.rfind("backbone.", 0) == 0) return config_.backbone.trainable;
  return params_.contains(name);
}

template <typename T>
void BasicFusionModel<T>::check_inputs(const Tensor& images, const Tensor& hogs) const {
  std::size_t batch = 0;
  bool have_batch = false;
  auto agree = [&](std::size_t b) {
    if (have_batch && b != batch) throw Error(ErrorCode::ShapeMismatch, "image and HOG batch sizes differ");
    batch = b;
    have_batch = true;
  };
  if (config_.uses_images()) {
    const auto& s = config_.backbone.input_shape;
    if (images.rank() != 4 || images.dim(1) != s[0] || images.dim(2) != s[1] || images.dim(3) != s[2])
      throw Error(ErrorCode::ShapeMismatch, "image input " + nn::shape_string(images.shape()) + ", expected Bx" +
                                                std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" +
                                                std::to_string(s[2]));
    agree(images.dim(0));
  }
  if (config_.uses_hog()) {
    if (hogs.rank() != 2 || hogs.dim(1) != config_.hog_dim)
      throw Error(ErrorCode::ShapeMismatch, "HOG input " + nn::shape_string(hogs.shape()) + ", expected Bx" +
                                                std::to_string(config_.hog_dim));
    agree(hogs.dim(0));
  }
}

template <typename T>
typename BasicFusionModel<T>::Tensor BasicFusionModel<T>::backbone_features(const Tensor& images) const {
  return backbone_.forward(params_, backbone_input(images), nn::Mode::Infer, nullptr, nullptr);
}

template <typename T>
typename BasicFusionModel<T>::Tensor BasicFusionModel<T>::backbone_input(const Tensor& images) const {
  if (config_.backbone.kind != BackboneKind::Standin || config_.backbone.input_scale == 1.0) return images;
  Tensor scaled = images;
  const T k = static_cast<T>(config_.backbone.input_scale);
  for (T& v : scaled.storage()) v *= k;
  return scaled;
}

template <typename T>
typename BasicFusionModel<T>::Tensor BasicFusionModel<T>::hog_branch(const Tensor& hogs) const {
  if (!config_.uses_hog()) throw Error(ErrorCode::InvalidConfig, "model has no HOG branch");
  if (hogs.rank() != 2 || hogs.dim(1) != config_.hog_dim)
    throw Error(ErrorCode::ShapeMismatch, "HOG input " + nn::shape_string(hogs.shape()));
  return hog_.forward(params_, hogs, nn::Mode::Infer, nullptr, nullptr);
}

template <typename T>
typename BasicFusionModel<T>::Tensor BasicFusionModel<T>::cnn_branch(const Tensor& fmap) const {
  if (!config_.uses_images()) throw Error(ErrorCode::InvalidConfig, "model has no image branch");
  const auto out = config_.backbone.output_shape();
  if (fmap.rank() != 4) throw Error(ErrorCode::ShapeMismatch, "feature map must be B x H x W x C");
  if (fmap.dim(1) < 4 || fmap.dim(2) < 4)
    throw Error(ErrorCode::InputTooSmall, "feature map " + nn::shape_string(fmap.shape()) + " smaller than 4x4");
  if (fmap.dim(1) != out[0] || fmap.dim(2) != out[1] || fmap.dim(3) != out[2])
    throw Error(ErrorCode::ShapeMismatch, "feature map " + nn::shape_string(fmap.shape()) +
                                              " does not match the audited backbone output");
  return cnn_.forward(params_, fmap, nn::Mode::Infer, nullptr, nullptr);
}

template <typename T>
typename BasicFusionModel<T>::Tensor BasicFusionModel<T>::forward(const Tensor& images, const Tensor& hogs,
                                                                   nn::Mode mode, Rng* rng,
                                                                   ForwardTrace<T>* trace) const {
  check_inputs(images, hogs);
  ForwardTrace<T> local;
  ForwardTrace<T>& t = trace ? *trace : local;
  const bool keep = trace != nullptr;

  std::size_t batch = 0;
  if (config_.uses_images()) {
    const Tensor fmap = backbone_.forward(params_, backbone_input(images), mode, rng, keep ? &t.backbone : nullptr);
    t.f_cnn = cnn_.forward(params_, fmap, mode, rng, keep ? &t.cnn : nullptr);
    batch = images.dim(0);
  }
  if (config_.uses_hog()) {
    t.f_hog = hog_.forward(params_, hogs, mode, rng, keep ? &t.hog : nullptr);
    batch = hogs.dim(0);
  }

  // [F_CNN | F_HOG]
  const std::size_t wc = config_.uses_images() ? t.f_cnn.dim(1) : 0;
  const std::size_t wh = config_.uses_hog() ? t.f_hog.dim(1) : 0;
  t.concat = Tensor({batch, wc + wh});
  for (std::size_t i = 0; i < batch; ++i) {
    T* row = t.concat.data() + i * (wc + wh);
    if (wc) std::copy_n(t.f_cnn.data() + i * wc, wc, row);
    if (wh) std::copy_n(t.f_hog.data() + i * wh, wh, row + wc);
  }

  t.logits = head_.forward(params_, t.concat, mode, rng, keep ? &t.head : nullptr);
  t.probs = config_.binary_head == BinaryHead::Sigmoid1 ? nn::sigmoid(t.logits) : nn::softmax(t.logits);
  return t.probs;
}

namespace {

template <typename T>
nn::BasicTensor<T> targets_for(const ModelConfig& cfg, std::span<const int> labels) {
  const auto hot = nn::one_hot(labels, static_cast<std::size_t>(cfg.num_classes));
  if (cfg.binary_head == BinaryHead::Sigmoid1) {
    nn::BasicTensor<T> t({labels.size(), 1});
    for (std::size_t i = 0; i < labels.size(); ++i) t[i] = static_cast<T>(labels[i]);
    return t;
  }
  return hot.template cast<T>();
}

}  // namespace

template <typename T>
double BasicFusionModel<T>::loss(const Tensor& probs, std::span<const int> labels) const {
  const Tensor targets = targets_for<T>(config_, labels);
  return config_.binary_head == BinaryHead::Sigmoid1 ? nn::binary_cross_entropy(probs, targets)
                                                      : nn::cross_entropy(probs, targets);
}

template <typename T>
double BasicFusionModel<T>::loss_and_gradients(const Tensor& images, const Tensor& hogs, std::span<const int> labels,
                                               nn::Mode mode, Rng* rng, nn::Gradients<T>& grads,
                                               Tensor* probs_out) const {
  ForwardTrace<T> t;
  forward(images, hogs, mode, rng, &t);
  if (t.probs.dim(0) != labels.size()) throw Error(ErrorCode::ShapeMismatch, "label count differs from batch size");
  const Tensor targets = targets_for<T>(config_, labels);
  const double value = config_.binary_head == BinaryHead::Sigmoid1 ? nn::binary_cross_entropy(t.probs, targets)
                                                                    : nn::cross_entropy(t.probs, targets);
  // Both heads reduce to (probs - targets) / B with respect to the logits.
  Tensor dlogits = config_.binary_head == BinaryHead::Sigmoid1
                       ? nn::sigmoid_cross_entropy_backward(t.probs, targets)
                       : nn::softmax_cross_entropy_backward(t.probs, targets);

  const Tensor dconcat = head_.backward(params_, t.head, std::move(dlogits), grads, true);
  const std::size_t batch = dconcat.dim(0);
  const std::size_t wc = config_.uses_images() ? t.f_cnn.dim(1) : 0;
  const std::size_t wh = config_.uses_hog() ? t.f_hog.dim(1) : 0;
  if (wh) {
    Tensor dhog({batch, wh});
    for (std::size_t i = 0; i < batch; ++i) std::copy_n(dconcat.data() + i * (wc + wh) + wc, wh, dhog.data() + i * wh);
    hog_.backward(params_, t.hog, std::move(dhog), grads, false);
  }
  if (wc) {
    Tensor dcnn({batch, wc});
    for (std::size_t i = 0; i < batch; ++i) std::copy_n(dconcat.data() + i * (wc + wh), wc, dcnn.data() + i * wc);
    const bool into_backbone = !backbone_.empty() && config_.backbone.trainable;
    Tensor dfmap = cnn_.backward(params_, t.cnn, std::move(dcnn), grads, into_backbone);
    if (into_backbone) backbone_.backward(params_, t.backbone, std::move(dfmap), grads, false);
  }
  if (probs_out) *probs_out = std::move(t.probs);
  return value;
}

template class BasicFusionModel<float>;
template class BasicFusionModel<double>;

std::vector<int> predict(const nn::Tensor& probs) {
  if (probs.rank() != 2) throw Error(ErrorCode::ShapeMismatch, "predict expects B x C probabilities");
  const std::size_t c = probs.dim(1);
  std::vector<int> out(probs.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (c == 1) {
      // [1 - p, p]: p == 0.5 ties to class 0.
      out[i] = probs.at(i, 0) > 0.5f ? 1 : 0;
      continue;
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (probs.at(i, j) > probs.at(i, best)) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::vector<double> positive_scores(const nn::Tensor& probs) {
  if (probs.rank() != 2 || probs.dim(1) > 2) throw Error(ErrorCode::ShapeMismatch, "expected binary probabilities");
  const std::size_t col = probs.dim(1) - 1;
  std::vector<double> s(probs.dim(0));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = probs.at(i, col);
  return s;
}

// ---- little-endian IO ------------------------------------------------------

void write_f32_le(std::ostream& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (float v : values) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      char b[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8), static_cast<char>(bits >> 16),
                   static_cast<char>(bits >> 24)};
      out.write(b, 4);
    }
  }
}

void read_f32_le(std::istream& in, std::span<float> values) {
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if constexpr (std::endian::native != std::endian::little) {
    for (float& v : values) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
      v = std::bit_cast<float>(bits);
    }
  }
}

// ---- feature store ---------------------------------------------------------

namespace {
constexpr const char* kFeatureMagic = "HOGFUSION-FEATURES";
constexpr int kFeatureVersion = 1;
}  // namespace

void FeatureStore::add(const std::string& id, std::span<const float> values) {
  if (values.size() != stride())
    throw Error(ErrorCode::ShapeMismatch, "feature map for " + id + " has " + std::to_string(values.size()) +
                                              " values, expected " + std::to_string(stride()));
  if (contains(id)) throw Error(ErrorCode::DuplicateId, id);
  index_.emplace(id, ids_.size());
  ids_.push_back(id);
  payload_.insert(payload_.end(), values.begin(), values.end());
}

std::span<const float> FeatureStore::view(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::MissingSample, id);
  return {payload_.data() + it->second * stride(), stride()};
}

nn::Tensor FeatureStore::get(const std::string& id) const {
  const auto v = view(id);
  return nn::Tensor({1, shape_[0], shape_[1], shape_[2]}, std::vector<float>(v.begin(), v.end()));
}

void FeatureStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << kFeatureMagic << " v" << kFeatureVersion << "\n";
  out << "shape " << shape_[0] << " " << shape_[1] << " " << shape_[2] << "\n";
  out << "count " << ids_.size() << "\n";
  for (const auto& id : ids_) out << "id " << id << "\n";
  out << "end\n";
  write_f32_le(out, payload_);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

FeatureStore FeatureStore::load(const std::filesystem::path& path, std::array<std::size_t, 3> expected_shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  auto corrupt = [&](const std::string& why) { return Error(ErrorCode::CorruptFile, path.string() + ": " + why); };

  std::string line;
  if (!std::getline(in, line)) throw corrupt("empty file");
  std::istringstream magic(line);
  std::string word, version;
  magic >> word >> version;
  if (word != kFeatureMagic) throw corrupt("not a feature file");
  if (version != "v" + std::to_string(kFeatureVersion))
    throw Error(ErrorCode::VersionMismatch, path.string() + ": unsupported feature file version " + version);

  std::array<std::size_t, 3> shape{};
  std::size_t count = 0;
  if (!std::getline(in, line)) throw corrupt("missing shape");
  {
    std::istringstream s(line);
    if (!(s >> word >> shape[0] >> shape[1] >> shape[2]) || word != "shape") throw corrupt("bad shape line");
  }
  if (!std::getline(in, line)) throw corrupt("missing count");
  {
    std::istringstream s(line);
    if (!(s >> word >> count) || word != "count") throw corrupt("bad count line");
  }
  if (shape != expected_shape)
    throw Error(ErrorCode::ShapeMismatch, path.string() + ": declared shape " + std::to_string(shape[0]) + "x" +
                                              std::to_string(shape[1]) + "x" + std::to_string(shape[2]) +
                                              " differs from expected " + std::to_string(expected_shape[0]) + "x" +
                                              std::to_string(expected_shape[1]) + "x" +
                                              std::to_string(expected_shape[2]));

  FeatureStore store(shape);
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line) || line.rfind("id ", 0) != 0) throw corrupt("bad id list");
    ids.push_back(line.substr(3));
  }
  if (!std::getline(in, line) || line != "end") throw corrupt("missing end of header");

  const std::streampos payload_start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto payload_bytes = static_cast<std::size_t>(in.tellg() - payload_start);
  const std::size_t expected_bytes = count * store.stride() * sizeof(float);
  if (payload_bytes != expected_bytes)
    throw corrupt("payload is " + std::to_string(payload_bytes) + " bytes, header implies " +
                  std::to_string(expected_bytes));
  in.seekg(payload_start);
  std::vector<float> payload(count * store.stride());
  read_f32_le(in, payload);
  if (!in) throw corrupt("short read");
  for (std::size_t i = 0; i < count; ++i)
    store.add(ids[i], std::span<const float>(payload.data() + i * store.stride(), store.stride()));
  return store;
}

}  // namespace hogfusion::model
