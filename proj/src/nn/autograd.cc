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
#include "selic/nn/autograd.h"

#include <unordered_set>
#include <utility>

#include "selic/core/error.h"

namespace selic::nn {
namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Var<T> Constant(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  return node;
}

template <typename T>
Var<T> MakeNode(Tensor<T> value, std::vector<Var<T>> inputs, bool uses_trainable_params,
                std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  if (!g_grad_enabled) return node;
  bool needs = uses_trainable_params;
  for (const auto& in : inputs) needs = needs || in->requires_grad;
  if (!needs) return node;
  node->requires_grad = true;
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  return node;
}

template <typename T>
void Backward(const Var<T>& root) {
  Require(root->value.size() == 1, ErrorKind::kShape, "backward root must be a scalar");
  if (!root->requires_grad) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->Grad()[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

template Var<float> Constant(Tensor<float>);
template Var<double> Constant(Tensor<double>);
template Var<float> MakeNode(Tensor<float>, std::vector<Var<float>>, bool, std::function<void(Node<float>&)>);
template Var<double> MakeNode(Tensor<double>, std::vector<Var<double>>, bool,
                              std::function<void(Node<double>&)>);
template void Backward(const Var<float>&);
template void Backward(const Var<double>&);

}  // namespace selic::nn
