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
#ifndef SELIC_NN_ADAM_H_
#define SELIC_NN_ADAM_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "selic/nn/autograd.h"

namespace selic::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global L2 norm clip applied before the update; <= 0 disables it.
  double clip_norm = 1.0;
};

template <typename T>
class Adam {
 public:
  struct Moments {
    Tensor<T> m;
    Tensor<T> v;
  };

  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // One update of every parameter in `params` from its accumulated grad.
  // Returns the gradient norm measured before clipping.
  double Step(std::span<Parameter<T>* const> params, double learning_rate);

  uint64_t steps() const { return steps_; }
  const std::map<std::string, Moments>& state() const { return state_; }
  void Restore(uint64_t steps, std::map<std::string, Moments> state) {
    steps_ = steps;
    state_ = std::move(state);
  }

 private:
  AdamOptions options_;
  uint64_t steps_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace selic::nn

#endif  // SELIC_NN_ADAM_H_
