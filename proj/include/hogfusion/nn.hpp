// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hogfusion/rng.hpp"
#include "hogfusion/tensor.hpp"

namespace hogfusion::nn {

enum class Mode { Train, Infer };

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before taking logs.
inline constexpr double kProbClamp = 1e-7;

// ---- Layers -----------------------------------------------------------------
// Each forward has a matching backward that takes the cached forward inputs and
// the upstream gradient and returns exact analytic gradients.

/// out[B x m] = x[B x n] * W[n x m] + b[m]
template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& x, const BasicTensor<T>& W, const BasicTensor<T>& b);

template <typename T>
struct DenseGrads {
  BasicTensor<T> dx, dW, db;
};

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& x, const BasicTensor<T>& W, const BasicTensor<T>& dout,
                             bool need_dx = true);

/// Valid 3x3 cross-correlation, stride 1, NHWC input, kernels [3 x 3 x Cin x Cout].
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& kernels, const BasicTensor<T>& bias);

template <typename T>
struct Conv2dGrads {
  BasicTensor<T> dx, dK, db;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& kernels, const BasicTensor<T>& dout,
                               bool need_dx = true);

template <typename T>
struct PoolResult {
  BasicTensor<T> out;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

/// 2x2 window, stride 2, trailing odd row/column dropped. Ties resolve to the
/// first element in row-major window order.
template <typename T>
PoolResult<T> maxpool2d(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> maxpool2d_backward(const Shape& input_shape, std::span<const std::size_t> argmax,
                                  const BasicTensor<T>& dout);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dout);

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);
/// Takes the sigmoid output y, not the input.
template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& y, const BasicTensor<T>& dout);

/// Softmax over the last axis with max subtraction.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& x);
/// Takes the softmax output y.
template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T>& y, const BasicTensor<T>& dout);

template <typename T>
struct DropoutResult {
  BasicTensor<T> out;
  BasicTensor<T> mask;  // 0 or 1/(1-p) per element; empty when the layer is the identity
};

/// Inverted dropout. Identity in Infer mode or when rate == 0.
template <typename T>
DropoutResult<T> dropout(const BasicTensor<T>& x, double rate, Mode mode, Rng& rng);
template <typename T>
BasicTensor<T> dropout_backward(const BasicTensor<T>& mask, const BasicTensor<T>& dout);

// ---- Losses -----------------------------------------------------------------

/// Mean categorical cross-entropy over the batch; probs and one-hot targets B x C.
template <typename T>
double cross_entropy(const BasicTensor<T>& probs, const BasicTensor<T>& targets);

/// d loss / d probs. Zero where the clamp is active.
template <typename T>
BasicTensor<T> cross_entropy_backward(const BasicTensor<T>& probs, const BasicTensor<T>& targets);

/// d loss / d logits for softmax followed by cross-entropy: (probs - targets) / B.
template <typename T>
BasicTensor<T> softmax_cross_entropy_backward(const BasicTensor<T>& probs, const BasicTensor<T>& targets);

/// Mean binary cross-entropy; probs and targets B x 1.
template <typename T>
double binary_cross_entropy(const BasicTensor<T>& probs, const BasicTensor<T>& targets);

/// d loss / d logit for sigmoid followed by binary cross-entropy.
template <typename T>
BasicTensor<T> sigmoid_cross_entropy_backward(const BasicTensor<T>& probs, const BasicTensor<T>& targets);

BasicTensor<float> one_hot(std::span<const int> labels, std::size_t classes);

// ---- Parameters and optimiser ----------------------------------------------

template <typename T>
struct ParamSlot {
  BasicTensor<T> value;
  BasicTensor<T> m;  // Adam first moment
  BasicTensor<T> v;  // Adam second moment
  std::int64_t step = 0;
};

template <typename T>
using Gradients = std::map<std::string, BasicTensor<T>>;

/// Named parameter store with per-name Adam state. Iteration order is the
/// lexicographic order of names, which is also the serialisation order.
template <typename T>
class BasicParameters {
 public:
  void add(const std::string& name, BasicTensor<T> value);
  bool contains(const std::string& name) const { return slots_.count(name) != 0; }
  const BasicTensor<T>& get(const std::string& name) const;
  BasicTensor<T>& get(const std::string& name);
  ParamSlot<T>& slot(const std::string& name);
  const ParamSlot<T>& slot(const std::string& name) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return slots_.size(); }
  std::size_t total_values() const;

  const std::map<std::string, ParamSlot<T>>& slots() const { return slots_; }

  /// FNV-1a over names, shapes and value bytes. Filter selects names to include.
  std::uint64_t hash(const std::function<bool(const std::string&)>& filter = {}) const;

  /// Value-only copy (Adam state reset); used for snapshots and precision casts.
  template <typename U>
  BasicParameters<U> cast() const {
    BasicParameters<U> out;
    for (const auto& [name, s] : slots_) out.add(name, s.value.template cast<U>());
    return out;
  }

  void assign_values(const BasicParameters& other);

 private:
  std::map<std::string, ParamSlot<T>> slots_;
};

using Parameters = BasicParameters<float>;

struct OptimConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// One bias-corrected Adam update for every named gradient. Each touched
/// parameter's step counter advances by one.
template <typename T>
void adam_step(BasicParameters<T>& params, const Gradients<T>& grads, const OptimConfig& cfg);

// ---- Gradient checking -----------------------------------------------------

struct GradCheckOptions {
  double epsilon = 1e-3;
  // Coordinates examined; 0 checks every coordinate.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
  // Denominator floor so coordinates whose true gradient is zero are judged on absolute error.
  double abs_floor = 1e-7;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares analytic derivatives of `objective` with respect to `x` against
/// central differences (f(x+e) - f(x-e)) / 2e. `x` is perturbed in place and
/// restored. Relative error is |a - n| / max(|a|, |n|, abs_floor).
template <typename T>
GradCheckReport grad_check(std::span<T> x, std::span<const T> analytic, const std::function<double()>& objective,
                           const GradCheckOptions& opts = {});

void merge(GradCheckReport& into, const GradCheckReport& other);

}  // namespace hogfusion::nn
