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
#ifndef SELIC_ENTROPY_CHARM_H_
#define SELIC_ENTROPY_CHARM_H_

#include <vector>

#include "selic/core/rng.h"
#include "selic/nn/layers.h"

namespace selic::entropy {

// Read access to the latent slices that are already decoded. Slice
// prediction may only ask for indices below count().
template <typename T>
class SliceHistory {
 public:
  virtual ~SliceHistory() = default;
  virtual int count() const = 0;
  virtual nn::Var<T> slice(int index) const = 0;
};

template <typename T>
class VectorSliceHistory final : public SliceHistory<T> {
 public:
  explicit VectorSliceHistory(const std::vector<nn::Var<T>>& slices) : slices_(slices) {}

  int count() const override { return static_cast<int>(slices_.size()); }
  // kCausality for indices outside [0, count()).
  nn::Var<T> slice(int index) const override;

 private:
  const std::vector<nn::Var<T>>& slices_;
};

template <typename T>
struct GaussianParams {
  nn::Var<T> mu;
  nn::Var<T> sigma;
};

// Channel-wise autoregressive conditional model. Slice k sees the hyper
// features (2M channels) and slices 0..k-1 (S = M / num_slices channels
// each):
//   conv3x3(2M + kS -> Nf), lrelu, conv3x3(Nf -> Nf), lrelu,
//   conv3x3(Nf -> 2S) = [mu | raw], sigma = max(softplus(raw), sigma_min)
template <typename T>
class ChannelContextModel {
 public:
  ChannelContextModel(int n_filters, int latent_channels, int num_slices, double sigma_min, Rng& rng);

  int num_slices() const { return num_slices_; }
  int slice_channels() const { return slice_channels_; }

  // Requires history.count() == slice_index (kCausality otherwise) and reads
  // exactly slices 0..slice_index-1.
  GaussianParams<T> Predict(const nn::Var<T>& hyper_features, const SliceHistory<T>& history, int slice_index);

  void Collect(std::vector<nn::Parameter<T>*>& out);

 private:
  struct SliceNet {
    nn::Conv2dLayer<T> conv1;
    nn::Conv2dLayer<T> conv2;
    nn::Conv2dLayer<T> conv3;
  };

  int latent_channels_;
  int num_slices_;
  int slice_channels_;
  T sigma_min_;
  std::vector<SliceNet> nets_;
};

}  // namespace selic::entropy

#endif  // SELIC_ENTROPY_CHARM_H_
