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
#ifndef SELIC_ENTROPY_HYPERPRIOR_H_
#define SELIC_ENTROPY_HYPERPRIOR_H_

#include <vector>

#include "selic/core/rng.h"
#include "selic/nn/layers.h"

namespace selic::entropy {

// y (N, M, h, w) -> z (N, Nf, h/4, w/4): two stride-2 3x3 convolutions.
template <typename T>
class HyperAnalysis {
 public:
  HyperAnalysis(int n_filters, int latent_channels, Rng& rng);

  nn::Var<T> operator()(const nn::Var<T>& y);
  void Collect(std::vector<nn::Parameter<T>*>& out);

 private:
  int latent_channels_;
  nn::Conv2dLayer<T> conv1_;
  nn::Conv2dLayer<T> conv2_;
};

// z_hat (N, Nf, h, w) -> hyper features (N, 2M, 4h, 4w).
template <typename T>
class HyperSynthesis {
 public:
  HyperSynthesis(int n_filters, int latent_channels, Rng& rng);

  nn::Var<T> operator()(const nn::Var<T>& z_hat);
  void Collect(std::vector<nn::Parameter<T>*>& out);

 private:
  int n_filters_;
  nn::ConvTranspose2dLayer<T> tconv1_;
  nn::ConvTranspose2dLayer<T> tconv2_;
};

}  // namespace selic::entropy

#endif  // SELIC_ENTROPY_HYPERPRIOR_H_
