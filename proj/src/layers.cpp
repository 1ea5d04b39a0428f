// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/layers.hpp"

#include <algorithm>

#include "hogfusion/error.hpp"

namespace hogfusion::nn {

namespace {

template <typename T>
void accumulate(Gradients<T>& grads, const std::string& name, BasicTensor<T>&& g) {
  auto it = grads.find(name);
  if (it == grads.end()) {
    grads.emplace(name, std::move(g));
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
}

}  // namespace

template <typename T>
BasicTensor<T> Stack<T>::forward(const BasicParameters<T>& params, const BasicTensor<T>& x, Mode mode, Rng* rng,
                                 StackTrace<T>* trace) const {
  if (trace) {
    trace->inputs.assign(layers_.size(), BasicTensor<T>());
    trace->pool_argmax.assign(layers_.size(), {});
    trace->dropout_masks.assign(layers_.size(), BasicTensor<T>());
  }
  BasicTensor<T> cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    BasicTensor<T> next;
    switch (l.kind) {
      case LayerKind::Dense: next = dense(cur, params.get(l.weight), params.get(l.bias)); break;
      case LayerKind::Conv2d: next = conv2d(cur, params.get(l.weight), params.get(l.bias)); break;
      case LayerKind::MaxPool: {
        auto r = maxpool2d(cur);
        next = std::move(r.out);
        if (trace) trace->pool_argmax[i] = std::move(r.argmax);
        break;
      }
      case LayerKind::Relu: next = relu(cur); break;
      case LayerKind::Sigmoid: next = sigmoid(cur); break;
      case LayerKind::Flatten: next = cur.reshaped({cur.dim(0), cur.size() / std::max<std::size_t>(cur.dim(0), 1)}); break;
      case LayerKind::Dropout: {
        if (mode == Mode::Train && l.rate > 0.0 && rng == nullptr)
          throw Error(ErrorCode::InvalidConfig, "train-mode dropout needs a random generator");
        Rng unused(0);
        auto r = dropout(cur, l.rate, mode, rng ? *rng : unused);
        next = std::move(r.out);
        if (trace) trace->dropout_masks[i] = std::move(r.mask);
        break;
      }
    }
    if (trace) trace->inputs[i] = std::move(cur);
    cur = std::move(next);
  }
  if (trace) trace->output = cur;
  return cur;
}

template <typename T>
BasicTensor<T> Stack<T>::backward(const BasicParameters<T>& params, const StackTrace<T>& trace, BasicTensor<T> dout,
                                  Gradients<T>& grads, bool need_input_grad) const {
  for (std::size_t n = layers_.size(); n-- > 0;) {
    const LayerSpec& l = layers_[n];
    const BasicTensor<T>& in = trace.inputs[n];
    const bool need_dx = need_input_grad || n > 0;
    switch (l.kind) {
      case LayerKind::Dense: {
        auto g = dense_backward(in, params.get(l.weight), dout, need_dx);
        accumulate(grads, l.weight, std::move(g.dW));
        accumulate(grads, l.bias, std::move(g.db));
        dout = std::move(g.dx);
        break;
      }
      case LayerKind::Conv2d: {
        auto g = conv2d_backward(in, params.get(l.weight), dout, need_dx);
        accumulate(grads, l.weight, std::move(g.dK));
        accumulate(grads, l.bias, std::move(g.db));
        dout = std::move(g.dx);
        break;
      }
      case LayerKind::MaxPool: dout = maxpool2d_backward(in.shape(), trace.pool_argmax[n], dout); break;
      case LayerKind::Relu: dout = relu_backward(in, dout); break;
      case LayerKind::Sigmoid: {
        const BasicTensor<T>& y = n + 1 < layers_.size() ? trace.inputs[n + 1] : trace.output;
        dout = sigmoid_backward(y, dout);
        break;
      }
      case LayerKind::Flatten: dout.reshape(in.shape()); break;
      case LayerKind::Dropout: dout = dropout_backward(trace.dropout_masks[n], dout); break;
    }
  }
  return need_input_grad ? dout : BasicTensor<T>();
}

template class Stack<float>;
template class Stack<double>;

}  // namespace hogfusion::nn
