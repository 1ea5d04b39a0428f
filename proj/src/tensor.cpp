// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "hogfusion/error.hpp"

namespace hogfusion::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s;
}

template <typename T>
void BasicTensor<T>::check_rank(const Shape& shape) {
  if (shape.empty() || shape.size() > 4)
    throw Error(ErrorCode::ShapeMismatch, "tensor rank must be 1..4, got " + std::to_string(shape.size()));
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(std::move(shape)) {
  check_rank(shape_);
  data_.assign(shape_size(shape_), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_rank(shape_);
  if (data_.size() != shape_size(shape_))
    throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) + " does not match shape " +
                                              shape_string(shape_));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const {
  BasicTensor out = *this;
  out.reshape(std::move(shape));
  return out;
}

template <typename T>
void BasicTensor<T>::reshape(Shape shape) {
  check_rank(shape);
  if (shape_size(shape) != data_.size())
    throw Error(ErrorCode::ShapeMismatch, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  shape_ = std::move(shape);
}

template <typename T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::rows(std::size_t first, std::size_t count) const {
  if (first + count > shape_[0]) throw Error(ErrorCode::ShapeMismatch, "row range out of bounds");
  Shape s = shape_;
  s[0] = count;
  const std::size_t stride = shape_[0] ? data_.size() / shape_[0] : 0;
  std::vector<T> d(data_.begin() + static_cast<std::ptrdiff_t>(first * stride),
                   data_.begin() + static_cast<std::ptrdiff_t>((first + count) * stride));
  return BasicTensor(std::move(s), std::move(d));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::gather(std::span<const std::size_t> indices) const {
  Shape s = shape_;
  s[0] = indices.size();
  const std::size_t stride = shape_[0] ? data_.size() / shape_[0] : 0;
  std::vector<T> d;
  d.reserve(indices.size() * stride);
  for (std::size_t i : indices) {
    if (i >= shape_[0]) throw Error(ErrorCode::ShapeMismatch, "gather index out of bounds");
    const auto begin = data_.begin() + static_cast<std::ptrdiff_t>(i * stride);
    d.insert(d.end(), begin, begin + static_cast<std::ptrdiff_t>(stride));
  }
  return BasicTensor(std::move(s), std::move(d));
}

template class BasicTensor<float>;
template class BasicTensor<double>;

}  // namespace hogfusion::nn
