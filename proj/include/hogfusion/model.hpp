// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "hogfusion/layers.hpp"
#include "hogfusion/nn.hpp"

namespace hogfusion::model {

enum class BackboneKind { Standin, Precomputed };
enum class BinaryHead { Softmax2, Sigmoid1 };
/// Which embeddings feed the classifier; the single-branch variants exist for ablations.
enum class Branches { Fused, HogOnly, CnnOnly };

/// Image-side feature extractor ahead of the CNN head.
///
/// Standin: a small conv3x3-ReLU-maxpool stack applied to the raw image of
/// `input_shape` (H, W, C). Precomputed: `input_shape` is the declared feature
/// map shape and inputs pass through unchanged (the frozen-base case).
/// The stand-in multiplies raw pixels by `input_scale` before its first conv,
/// as pretrained backbones carry their own rescaling layer.
struct BackboneSpec {
  BackboneKind kind = BackboneKind::Standin;
  std::array<std::size_t, 3> input_shape{224, 224, 3};
  std::vector<int> channels{8, 16, 32};
  double input_scale = 1.0 / 255.0;
  bool trainable = true;
  std::string path;  // feature file, precomputed only

  std::array<std::size_t, 3> output_shape() const;
};

struct ModelConfig {
  int num_classes = 2;
  std::size_t hog_dim = 26244;
  std::vector<int> hog_hidden{800, 256, 128};
  int head_conv_filters = 64;
  int cnn_embed_dim = 64;
  std::vector<int> head_hidden{256, 128};
  double dropout_rate = 0.2;
  BackboneSpec backbone;
  BinaryHead binary_head = BinaryHead::Softmax2;
  Branches branches = Branches::Fused;

  void validate() const;
  bool uses_hog() const { return branches != Branches::CnnOnly; }
  bool uses_images() const { return branches != Branches::HogOnly; }
  std::size_t concat_width() const;
  std::size_t output_width() const;
  /// Flattened width feeding cnn_fc, from the audited backbone output shape.
  std::size_t cnn_flatten_width() const;
};

void to_json(nlohmann::json& j, const ModelConfig& cfg);
void from_json(const nlohmann::json& j, ModelConfig& cfg);

/// Name of the first field that differs, or nullopt when equal.
std::optional<std::string> first_difference(const ModelConfig& a, const ModelConfig& b);

template <typename T>
struct ForwardTrace {
  nn::StackTrace<T> backbone, cnn, hog, head;
  nn::BasicTensor<T> f_cnn, f_hog, concat, logits, probs;
};

/// The dual-branch classifier: backbone -> conv/pool/flatten/dense(64) on the
/// image side, dense(800, 256, 128) on the HOG side, concatenated as
/// [F_CNN | F_HOG] and classified by dense(256, 128) + dropout + output layer.
template <typename T>
class BasicFusionModel {
 public:
  using Tensor = nn::BasicTensor<T>;

  /// Allocates and initialises every parameter, then dry-runs a batch of two.
  static BasicFusionModel build(const ModelConfig& cfg, std::uint64_t seed);

  /// Adopts existing parameters; names and shapes must match the config exactly.
  BasicFusionModel(ModelConfig cfg, nn::BasicParameters<T> params);

  const ModelConfig& config() const { return config_; }
  nn::BasicParameters<T>& params() { return params_; }
  const nn::BasicParameters<T>& params() const { return params_; }

  /// Parameter names the optimiser may update.
  bool is_trainable(const std::string& name) const;

  Tensor backbone_features(const Tensor& images) const;
  Tensor hog_branch(const Tensor& hogs) const;
  Tensor cnn_branch(const Tensor& fmap) const;

  /// Class probabilities: B x C (softmax) or B x 1 (sigmoid head).
  Tensor forward(const Tensor& images, const Tensor& hogs, nn::Mode mode, Rng* rng,
                 ForwardTrace<T>* trace = nullptr) const;

  /// Batch loss against integer labels.
  double loss(const Tensor& probs, std::span<const int> labels) const;

  /// Forward, loss and backward in one pass. Gradients are produced only for
  /// trainable parameters.
  double loss_and_gradients(const Tensor& images, const Tensor& hogs, std::span<const int> labels, nn::Mode mode,
                            Rng* rng, nn::Gradients<T>& grads, Tensor* probs_out = nullptr) const;

  template <typename U>
  BasicFusionModel<U> cast() const {
    return BasicFusionModel<U>(config_, params_.template cast<U>());
  }

 private:
  BasicFusionModel(ModelConfig cfg, nn::BasicParameters<T> params, bool);
  void build_stacks();
  void check_inputs(const Tensor& images, const Tensor& hogs) const;
  Tensor backbone_input(const Tensor& images) const;

  ModelConfig config_;
  nn::BasicParameters<T> params_;
  nn::Stack<T> backbone_, cnn_, hog_, head_;
};

using FusionModel = BasicFusionModel<float>;

extern template class BasicFusionModel<float>;
extern template class BasicFusionModel<double>;

/// Per-row argmax, ties to the lowest class index. A B x 1 input is read as
/// the positive-class probability of a binary problem.
std::vector<int> predict(const nn::Tensor& probs);

/// Positive-class score per row of a binary model's output.
std::vector<double> positive_scores(const nn::Tensor& probs);

/// Per-sample precomputed backbone feature maps. File layout: a text header
/// (magic, shape, count, one `id` line per sample, `end`) followed by
/// count*H*W*C little-endian float32 values in id order.
class FeatureStore {
 public:
  FeatureStore() = default;
  explicit FeatureStore(std::array<std::size_t, 3> shape) : shape_(shape) {}

  static FeatureStore load(const std::filesystem::path& path, std::array<std::size_t, 3> expected_shape);
  void save(const std::filesystem::path& path) const;

  void add(const std::string& id, std::span<const float> values);
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  /// 1 x H x W x C tensor for `id`.
  nn::Tensor get(const std::string& id) const;
  std::span<const float> view(const std::string& id) const;

  const std::array<std::size_t, 3>& shape() const { return shape_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

 private:
  std::size_t stride() const { return shape_[0] * shape_[1] * shape_[2]; }

  std::array<std::size_t, 3> shape_{0, 0, 0};
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> payload_;
};

// Little-endian float32 block IO shared by the feature store and checkpoints.
void write_f32_le(std::ostream& out, std::span<const float> values);
void read_f32_le(std::istream& in, std::span<float> values);

}  // namespace hogfusion::model
