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
#ifndef SELIC_FUSION_FUSION_H_
#define SELIC_FUSION_FUSION_H_

#include <vector>

#include "selic/core/config.h"
#include "selic/core/rng.h"
#include "selic/nn/layers.h"

namespace selic::fusion {

// Text/image latent fusion:
//   semantic = fc2(lrelu(fc1(raw)))                (N, M, 1, 1)
//   tap      = combine(broadcast(semantic), visual)
//   fused    = shortcut(tap) + conv2(lrelu(conv1(tap)))
// combine is channel concatenation (2M channels) or an elementwise sum or
// product (M channels). conv1 and shortcut are 1x1, conv2 is 3x3.
template <typename T>
class FusionModule {
 public:
  FusionModule(int text_embed_dim, int latent_channels, FusionKind kind, Rng& rng);

  FusionKind kind() const { return kind_; }
  int tap_channels() const { return kind_ == FusionKind::kConcat ? 2 * latent_channels_ : latent_channels_; }

  // raw is (N, D, 1, 1).
  nn::Var<T> Project(const nn::Var<T>& raw);
  // Both inputs (N, M, h, w); returns the pre-refinement tap.
  nn::Var<T> Combine(const nn::Var<T>& semantic, const nn::Var<T>& visual);
  nn::Var<T> Refine(const nn::Var<T>& tap);

  // Full module; when tap is non-null it receives the pre-refinement tensor.
  nn::Var<T> operator()(const nn::Var<T>& raw, const nn::Var<T>& visual, nn::Var<T>* tap = nullptr);

  void Collect(std::vector<nn::Parameter<T>*>& out);
  void CollectProjection(std::vector<nn::Parameter<T>*>& out);

 private:
  int text_embed_dim_;
  int latent_channels_;
  FusionKind kind_;
  nn::LinearLayer<T> fc1_;
  nn::LinearLayer<T> fc2_;
  nn::Conv2dLayer<T> conv1_;
  nn::Conv2dLayer<T> conv2_;
  nn::Conv2dLayer<T> shortcut_;
};

}  // namespace selic::fusion

#endif  // SELIC_FUSION_FUSION_H_
