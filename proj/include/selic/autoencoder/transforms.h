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
#ifndef SELIC_AUTOENCODER_TRANSFORMS_H_
#define SELIC_AUTOENCODER_TRANSFORMS_H_

#include <vector>

#include "selic/core/rng.h"
#include "selic/nn/layers.h"

namespace selic::autoencoder {

inline constexpr int kStages = 4;

// Image (N, 3, H, W) -> visual latent (N, M, H/16, W/16). Each stage is a
// stride-2 3x3 convolution followed by a residual block; the last stage
// emits M channels and the latent is left without an activation.
template <typename T>
class AnalysisTransform {
 public:
  AnalysisTransform(int n_filters, int latent_channels, Rng& rng);

  // H and W must be multiples of 64 (kShape otherwise).
  nn::Var<T> operator()(const nn::Var<T>& image);
  void Collect(std::vector<nn::Parameter<T>*>& out);
  int latent_channels() const { return latent_channels_; }

 private:
  int latent_channels_;
  std::vector<nn::Conv2dLayer<T>> convs_;
  std::vector<nn::ResidualBlock<T>> blocks_;
};

// Mirror of the analysis transform: per stage a residual block, then a
// stride-2 transposed convolution; the last one emits RGB. The output is
// unclamped so training sees true gradients; callers clamp at inference.
template <typename T>
class SynthesisTransform {
 public:
  SynthesisTransform(int n_filters, int latent_channels, Rng& rng);

  nn::Var<T> operator()(const nn::Var<T>& latent);
  void Collect(std::vector<nn::Parameter<T>*>& out);

 private:
  int latent_channels_;
  std::vector<nn::ResidualBlock<T>> blocks_;
  std::vector<nn::ConvTranspose2dLayer<T>> tconvs_;
};

}  // namespace selic::autoencoder

#endif  // SELIC_AUTOENCODER_TRANSFORMS_H_
