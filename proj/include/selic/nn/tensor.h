// Copyright (c) the SELIC Project Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef SELIC_NN_TENSOR_H_
#define SELIC_NN_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace selic::nn {

// Every tensor is NCHW; vectors are N x C x 1 x 1 and scalars 1 x 1 x 1 x 1.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  size_t numel() const { return static_cast<size_t>(n) * c * h * w; }
  size_t plane() const { return static_cast<size_t>(h) * w; }
  size_t sample() const { return static_cast<size_t>(c) * h * w; }
  std::string ToString() const;

  bool operator==(const Shape&) const = default;
};

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.numel(), fill) {}
  Tensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](size_t i) { return data_[i]; }
  T operator[](size_t i) const { return data_[i]; }
  T& at(int n, int c, int h, int w) { return data_[Index(n, c, h, w)]; }
  T at(int n, int c, int h, int w) const { return data_[Index(n, c, h, w)]; }

  T* sample(int n) { return data_.data() + n * shape_.sample(); }
  const T* sample(int n) const { return data_.data() + n * shape_.sample(); }

  void Fill(T value);
  // Same data, new shape of equal element count.
  Tensor Reshaped(Shape shape) const;

  template <typename U>
  Tensor<U> Cast() const {
    Tensor<U> out(shape_);
    for (size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Tensor&) const = default;

 private:
  size_t Index(int n, int c, int h, int w) const {
    return ((static_cast<size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }

  Shape shape_;
  std::vector<T> data_;
};

}  // namespace selic::nn

#endif  // SELIC_NN_TENSOR_H_
