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
#include "selic/nn/layers.h"

#include <cmath>

namespace selic::nn {

template <typename T>
void InitFanIn(Parameter<T>& p, int fan_in, Rng& rng) {
  // Unit-variance gain: Var(w) = 1 / fan_in. The narrower U(+-1/sqrt(fan_in))
  // shrinks activations ~3x per layer and starts y far below the
  // quantization step.
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (T& v : p.value.values()) v = static_cast<T>(rng.Uniform(-bound, bound));
}

template <typename T>
Conv2dLayer<T>::Conv2dLayer(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
                            Rng& rng)
    : stride_(stride) {
  weight_.name = name + ".w";
  weight_.value = Tensor<T>(Shape{out_channels, in_channels, kernel, kernel});
  bias_.name = name + ".b";
  bias_.value = Tensor<T>(Shape{1, out_channels, 1, 1});
  InitFanIn(weight_, in_channels * kernel * kernel, rng);
  InitFanIn(bias_, in_channels * kernel * kernel, rng);
}

template <typename T>
ConvTranspose2dLayer<T>::ConvTranspose2dLayer(const std::string& name, int in_channels, int out_channels,
                                              Rng& rng) {
  weight_.name = name + ".w";
  weight_.value = Tensor<T>(Shape{in_channels, out_channels, 3, 3});
  bias_.name = name + ".b";
  bias_.value = Tensor<T>(Shape{1, out_channels, 1, 1});
  InitFanIn(weight_, out_channels * 9, rng);
  InitFanIn(bias_, out_channels * 9, rng);
}

template <typename T>
LinearLayer<T>::LinearLayer(const std::string& name, int in_features, int out_features, Rng& rng) {
  weight_.name = name + ".w";
  weight_.value = Tensor<T>(Shape{out_features, in_features, 1, 1});
  bias_.name = name + ".b";
  bias_.value = Tensor<T>(Shape{1, out_features, 1, 1});
  InitFanIn(weight_, in_features, rng);
  InitFanIn(bias_, in_features, rng);
}

template <typename T>
ResidualBlock<T>::ResidualBlock(const std::string& name, int channels, Rng& rng)
    : conv1_(name + ".conv1", channels, channels, 3, 1, rng), conv2_(name + ".conv2", channels, channels, 3, 1, rng) {}

template <typename T>
Var<T> ResidualBlock<T>::operator()(const Var<T>& x) {
  return Add(x, conv2_(LeakyRelu(conv1_(x), static_cast<T>(kLeakySlope))));
}

template void InitFanIn(Parameter<float>&, int, Rng&);
template void InitFanIn(Parameter<double>&, int, Rng&);
template class Conv2dLayer<float>;
template class Conv2dLayer<double>;
template class ConvTranspose2dLayer<float>;
template class ConvTranspose2dLayer<double>;
template class LinearLayer<float>;
template class LinearLayer<double>;
template class ResidualBlock<float>;
template class ResidualBlock<double>;

}  // namespace selic::nn
