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
#ifndef SELIC_NN_AUTOGRAD_H_
#define SELIC_NN_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "selic/nn/tensor.h"

namespace selic::nn {

// Graph recording is on by default. Inference code wraps itself in a
// NoGradGuard so intermediate activations are released as soon as the last
// Var referencing them goes away.
bool GradEnabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  // Frozen parameters never accumulate gradients.
  bool frozen = false;

  Tensor<T>& Grad() {
    if (grad.shape() != value.shape()) grad = Tensor<T>(value.shape());
    return grad;
  }
  void ZeroGrad() {
    if (grad.shape() == value.shape()) {
      grad.Fill(T(0));
    } else {
      grad = Tensor<T>(value.shape());
    }
  }
};

template <typename T>
struct Node;

template <typename T>
using Var = std::shared_ptr<Node<T>>;

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<Var<T>> inputs;
  // Reads this->grad and accumulates into inputs' grads and parameter grads.
  std::function<void(Node&)> backward;

  Tensor<T>& Grad() {
    if (grad.shape() != value.shape()) grad = Tensor<T>(value.shape());
    return grad;
  }
  const Shape& shape() const { return value.shape(); }
};

template <typename T>
Var<T> Constant(Tensor<T> value);

// Builds a graph node. When recording is off, or neither an input nor a used
// parameter needs gradients, the node keeps only its value.
template <typename T>
Var<T> MakeNode(Tensor<T> value, std::vector<Var<T>> inputs, bool uses_trainable_params,
                std::function<void(Node<T>&)> backward);

// Reverse-mode sweep from a scalar root (seeded with d root = 1).
template <typename T>
void Backward(const Var<T>& root);

}  // namespace selic::nn

#endif  // SELIC_NN_AUTOGRAD_H_
