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
#include "selic/entropy/hyperprior.h"

#include <string>

#include "selic/core/error.h"

namespace selic::entropy {

template <typename T>
HyperAnalysis<T>::HyperAnalysis(int n_filters, int latent_channels, Rng& rng)
    : latent_channels_(latent_channels),
      conv1_("ha.conv1", latent_channels, n_filters, 3, 2, rng),
      conv2_("ha.conv2", n_filters, n_filters, 3, 2, rng) {}

template <typename T>
nn::Var<T> HyperAnalysis<T>::operator()(const nn::Var<T>& y) {
  const nn::Shape& s = y->shape();
  Require(s.c == latent_channels_, ErrorKind::kShape,
          "hyper analysis expects " + std::to_string(latent_channels_) + " channels, got " + s.ToString());
  Require(s.h % 4 == 0 && s.w % 4 == 0 && s.h > 0 && s.w > 0, ErrorKind::kShape,
          "hyper analysis needs latent sides divisible by 4, got " + s.ToString());
  return conv2_(nn::LeakyRelu(conv1_(y), static_cast<T>(nn::kLeakySlope)));
}

template <typename T>
void HyperAnalysis<T>::Collect(std::vector<nn::Parameter<T>*>& out) {
  conv1_.Collect(out);
  conv2_.Collect(out);
}

template <typename T>
HyperSynthesis<T>::HyperSynthesis(int n_filters, int latent_channels, Rng& rng)
    : n_filters_(n_filters),
      tconv1_("hs.tconv1", n_filters, n_filters, rng),
      tconv2_("hs.tconv2", n_filters, 2 * latent_channels, rng) {}

template <typename T>
nn::Var<T> HyperSynthesis<T>::operator()(const nn::Var<T>& z_hat) {
  Require(z_hat->shape().c == n_filters_, ErrorKind::kShape,
          "hyper synthesis expects " + std::to_string(n_filters_) + " channels, got " + z_hat->shape().ToString());
  return tconv2_(nn::LeakyRelu(tconv1_(z_hat), static_cast<T>(nn::kLeakySlope)));
}

template <typename T>
void HyperSynthesis<T>::Collect(std::vector<nn::Parameter<T>*>& out) {
  tconv1_.Collect(out);
  tconv2_.Collect(out);
}

template class HyperAnalysis<float>;
template class HyperAnalysis<double>;
template class HyperSynthesis<float>;
template class HyperSynthesis<double>;

}  // namespace selic::entropy
