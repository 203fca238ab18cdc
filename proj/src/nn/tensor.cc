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
#include "selic/nn/tensor.h"

#include <algorithm>

#include "selic/core/error.h"

namespace selic::nn {

std::string Shape::ToString() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  Require(data_.size() == shape_.numel(), ErrorKind::kShape,
          "tensor data length does not match shape " + shape_.ToString());
}

template <typename T>
void Tensor<T>::Fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
Tensor<T> Tensor<T>::Reshaped(Shape shape) const {
  Require(shape.numel() == shape_.numel(), ErrorKind::kShape,
          "cannot reshape " + shape_.ToString() + " to " + shape.ToString());
  return Tensor(shape, data_);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace selic::nn
