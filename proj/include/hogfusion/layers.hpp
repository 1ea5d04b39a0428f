// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hogfusion/nn.hpp"

namespace hogfusion::nn {

enum class LayerKind { Dense, Conv2d, MaxPool, Relu, Sigmoid, Flatten, Dropout };

/// One step of a sequential stack. Dense and Conv2d name their weight and
/// bias entries in the parameter store; Dropout carries its rate.
struct LayerSpec {
  LayerKind kind;
  std::string weight;
  std::string bias;
  double rate = 0.0;
};

template <typename T>
struct StackTrace {
  std::vector<BasicTensor<T>> inputs;                   // input to each layer
  std::vector<std::vector<std::size_t>> pool_argmax;    // per layer, MaxPool only
  std::vector<BasicTensor<T>> dropout_masks;            // per layer, Dropout only
  BasicTensor<T> output;
};

/// A sequential chain of layers sharing one parameter store.
template <typename T>
class Stack {
 public:
  Stack() = default;
  explicit Stack(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {}

  const std::vector<LayerSpec>& layers() const { return layers_; }
  bool empty() const { return layers_.empty(); }

  /// Runs the chain. When `trace` is non-null it receives what backward needs.
  BasicTensor<T> forward(const BasicParameters<T>& params, const BasicTensor<T>& x, Mode mode, Rng* rng,
                         StackTrace<T>* trace) const;

  /// Accumulates parameter gradients into `grads` (adding to existing entries)
  /// and returns d loss / d input, or an empty tensor when not requested.
  BasicTensor<T> backward(const BasicParameters<T>& params, const StackTrace<T>& trace, BasicTensor<T> dout,
                          Gradients<T>& grads, bool need_input_grad) const;

 private:
  std::vector<LayerSpec> layers_;
};

extern template class Stack<float>;
extern template class Stack<double>;

}  // namespace hogfusion::nn
