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
#include "selic/fusion/fusion.h"

#include <array>
#include <string>

#include "selic/core/error.h"

namespace selic::fusion {

template <typename T>
FusionModule<T>::FusionModule(int text_embed_dim, int latent_channels, FusionKind kind, Rng& rng)
    : text_embed_dim_(text_embed_dim),
      latent_channels_(latent_channels),
      kind_(kind),
      fc1_("fusion.proj.fc1", text_embed_dim, latent_channels, rng),
      fc2_("fusion.proj.fc2", latent_channels, latent_channels, rng),
      conv1_("fusion.refine.conv1", tap_channels(), latent_channels, 1, 1, rng),
      conv2_("fusion.refine.conv2", latent_channels, latent_channels, 3, 1, rng),
      shortcut_("fusion.refine.shortcut", tap_channels(), latent_channels, 1, 1, rng) {
  // Zero projection biases make a zero embedding project to zero.
  fc1_.bias().value.Fill(T(0));
  fc2_.bias().value.Fill(T(0));
}

template <typename T>
nn::Var<T> FusionModule<T>::Project(const nn::Var<T>& raw) {
  const nn::Shape& s = raw->shape();
  Require(s.c == text_embed_dim_ && s.h == 1 && s.w == 1, ErrorKind::kShape,
          "text embedding must be (N, " + std::to_string(text_embed_dim_) + ", 1, 1), got " + s.ToString());
  return fc2_(nn::LeakyRelu(fc1_(raw), static_cast<T>(nn::kLeakySlope)));
}

template <typename T>
nn::Var<T> FusionModule<T>::Combine(const nn::Var<T>& semantic, const nn::Var<T>& visual) {
  Require(semantic->shape() == visual->shape(), ErrorKind::kShape,
          "fusion inputs differ: " + semantic->shape().ToString() + " vs " + visual->shape().ToString());
  Require(visual->shape().c == latent_channels_, ErrorKind::kShape, "fusion expects M-channel latents");
  switch (kind_) {
    case FusionKind::kConcat: {
      const std::array<nn::Var<T>, 2> parts = {visual, semantic};
      return nn::ConcatChannels<T>(parts);
    }
    case FusionKind::kAdd:
      return nn::Add(visual, semantic);
    case FusionKind::kMul:
      return nn::Mul(visual, semantic);
  }
  Fail(ErrorKind::kConfig, "unknown fusion kind");
}

template <typename T>
nn::Var<T> FusionModule<T>::Refine(const nn::Var<T>& tap) {
  Require(tap->shape().c == tap_channels(), ErrorKind::kShape, "refinement input has wrong channel count");
  return nn::Add(shortcut_(tap), conv2_(nn::LeakyRelu(conv1_(tap), static_cast<T>(nn::kLeakySlope))));
}

template <typename T>
nn::Var<T> FusionModule<T>::operator()(const nn::Var<T>& raw, const nn::Var<T>& visual, nn::Var<T>* tap) {
  Require(raw->shape().n == visual->shape().n, ErrorKind::kShape, "batch sizes of embedding and latent differ");
  const nn::Var<T> semantic = nn::BroadcastSpatial(Project(raw), visual->shape().h, visual->shape().w);
  nn::Var<T> combined = Combine(semantic, visual);
  if (tap != nullptr) *tap = combined;
  return Refine(combined);
}

template <typename T>
void FusionModule<T>::Collect(std::vector<nn::Parameter<T>*>& out) {
  CollectProjection(out);
  conv1_.Collect(out);
  conv2_.Collect(out);
  shortcut_.Collect(out);
}

template <typename T>
void FusionModule<T>::CollectProjection(std::vector<nn::Parameter<T>*>& out) {
  fc1_.Collect(out);
  fc2_.Collect(out);
}

template class FusionModule<float>;
template class FusionModule<double>;

}  // namespace selic::fusion
