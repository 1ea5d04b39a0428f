// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hogfusion::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of rank 1..4. The engine runs on float; the double
/// instantiation exists so gradient checks are not dominated by rounding.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() : shape_{0} {}
  explicit BasicTensor(Shape shape, T fill = T{0});
  BasicTensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const T& at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  T& at(std::size_t b, std::size_t y, std::size_t x, std::size_t c) { return data_[index4(b, y, x, c)]; }
  const T& at(std::size_t b, std::size_t y, std::size_t x, std::size_t c) const { return data_[index4(b, y, x, c)]; }

  /// Same data under a new shape of equal size.
  BasicTensor reshaped(Shape shape) const;
  void reshape(Shape shape);

  void fill(T value);

  /// Copies rows [first, first + count) of the leading axis.
  BasicTensor rows(std::size_t first, std::size_t count) const;
  /// Gathers the listed rows of the leading axis, in order.
  BasicTensor gather(std::span<const std::size_t> indices) const;

  template <typename U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t index4(std::size_t b, std::size_t y, std::size_t x, std::size_t c) const {
    return ((b * shape_[1] + y) * shape_[2] + x) * shape_[3] + c;
  }
  static void check_rank(const Shape& shape);

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

}  // namespace hogfusion::nn
