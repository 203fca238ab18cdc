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
#include "selic/nn/adam.h"

#include <cmath>

#include "selic/core/error.h"

namespace selic::nn {

template <typename T>
double Adam<T>::Step(std::span<Parameter<T>* const> params, double learning_rate) {
  double sq = 0;
  for (const Parameter<T>* p : params) {
    if (p->grad.shape() != p->value.shape()) continue;
    for (T g : p->grad.values()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  Require(std::isfinite(norm), ErrorKind::kNumeric, "non-finite gradient norm");
  const double clip = (options_.clip_norm > 0 && norm > options_.clip_norm) ? options_.clip_norm / norm : 1.0;

  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double step_size = learning_rate / correction1;
  for (Parameter<T>* p : params) {
    if (p->frozen) continue;
    auto [it, inserted] = state_.try_emplace(p->name);
    Moments& mom = it->second;
    if (inserted) {
      mom.m = Tensor<T>(p->value.shape());
      mom.v = Tensor<T>(p->value.shape());
    }
    Require(mom.m.shape() == p->value.shape(), ErrorKind::kModel, "optimizer state shape mismatch for " + p->name);
    const bool has_grad = p->grad.shape() == p->value.shape();
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double g = has_grad ? p->grad[i] * clip : 0.0;
      const double m = b1 * mom.m[i] + (1 - b1) * g;
      const double v = b2 * mom.v[i] + (1 - b2) * g * g;
      mom.m[i] = static_cast<T>(m);
      mom.v[i] = static_cast<T>(v);
      p->value[i] -= static_cast<T>(step_size * m / (std::sqrt(v / correction2) + options_.epsilon));
    }
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace selic::nn
