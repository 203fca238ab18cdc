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
#include "selic/autoencoder/transforms.h"

#include <string>

#include "selic/core/config.h"
#include "selic/core/error.h"

namespace selic::autoencoder {

template <typename T>
AnalysisTransform<T>::AnalysisTransform(int n_filters, int latent_channels, Rng& rng)
    : latent_channels_(latent_channels) {
  convs_.reserve(kStages);
  blocks_.reserve(kStages);
  for (int i = 0; i < kStages; ++i) {
    const std::string stage = "ga3.stage" + std::to_string(i);
    const int in = i == 0 ? 3 : n_filters;
    const int out = i == kStages - 1 ? latent_channels : n_filters;
    convs_.emplace_back(stage + ".conv", in, out, 3, 2, rng);
    blocks_.emplace_back(stage + ".res", out, rng);
  }
}

template <typename T>
nn::Var<T> AnalysisTransform<T>::operator()(const nn::Var<T>& image) {
  const nn::Shape& s = image->shape();
  Require(s.c == 3, ErrorKind::kShape, "analysis expects 3 channels, got " + s.ToString());
  Require(s.h > 0 && s.w > 0 && s.h % ModelConfig::kPadMultiple == 0 && s.w % ModelConfig::kPadMultiple == 0, ErrorKind::kShape,
          "analysis input " + s.ToString() + " must have sides that are multiples of " +
              std::to_string(ModelConfig::kPadMultiple) + "; pad first");
  nn::Var<T> x = image;
  for (int i = 0; i < kStages; ++i) x = blocks_[i](convs_[i](x));
  return x;
}

template <typename T>
void AnalysisTransform<T>::Collect(std::vector<nn::Parameter<T>*>& out) {
  for (int i = 0; i < kStages; ++i) {
    convs_[i].Collect(out);
    blocks_[i].Collect(out);
  }
}

template <typename T>
SynthesisTransform<T>::SynthesisTransform(int n_filters, int latent_channels, Rng& rng)
    : latent_channels_(latent_channels) {
  blocks_.reserve(kStages);
  tconvs_.reserve(kStages);
  for (int i = 0; i < kStages; ++i) {
    const std::string stage = "gs.stage" + std::to_string(i);
    const int in = i == 0 ? latent_channels : n_filters;
    const int out = i == kStages - 1 ? 3 : n_filters;
    blocks_.emplace_back(stage + ".res", in, rng);
    tconvs_.emplace_back(stage + ".tconv", in, out, rng);
  }
}

template <typename T>
nn::Var<T> SynthesisTransform<T>::operator()(const nn::Var<T>& latent) {
  const nn::Shape& s = latent->shape();
  Require(s.c == latent_channels_, ErrorKind::kShape,
          "synthesis expects " + std::to_string(latent_channels_) + " channels, got " + s.ToString());
  nn::Var<T> x = latent;
  for (int i = 0; i < kStages; ++i) x = tconvs_[i](blocks_[i](x));
  return x;
}

template <typename T>
void SynthesisTransform<T>::Collect(std::vector<nn::Parameter<T>*>& out) {
  for (int i = 0; i < kStages; ++i) {
    blocks_[i].Collect(out);
    tconvs_[i].Collect(out);
  }
}

template class AnalysisTransform<float>;
template class AnalysisTransform<double>;
template class SynthesisTransform<float>;
template class SynthesisTransform<double>;

}  // namespace selic::autoencoder
