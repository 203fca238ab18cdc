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
#include "selic/entropy/charm.h"

#include <string>

#include "selic/core/error.h"

namespace selic::entropy {

template <typename T>
nn::Var<T> VectorSliceHistory<T>::slice(int index) const {
  Require(index >= 0 && index < count(), ErrorKind::kCausality,
          "slice " + std::to_string(index) + " is not decoded yet (" + std::to_string(count()) + " available)");
  return slices_[index];
}

template <typename T>
ChannelContextModel<T>::ChannelContextModel(int n_filters, int latent_channels, int num_slices, double sigma_min,
                                            Rng& rng)
    : latent_channels_(latent_channels),
      num_slices_(num_slices),
      slice_channels_(latent_channels / num_slices),
      sigma_min_(static_cast<T>(sigma_min)) {
  Require(num_slices >= 1 && latent_channels % num_slices == 0, ErrorKind::kConfig,
          "latent channels must divide evenly into slices");
  nets_.reserve(num_slices);
  for (int k = 0; k < num_slices; ++k) {
    const std::string name = "charm.slice" + std::to_string(k);
    const int in = 2 * latent_channels + k * slice_channels_;
    nets_.push_back(SliceNet{nn::Conv2dLayer<T>(name + ".conv1", in, n_filters, 3, 1, rng),
                             nn::Conv2dLayer<T>(name + ".conv2", n_filters, n_filters, 3, 1, rng),
                             nn::Conv2dLayer<T>(name + ".conv3", n_filters, 2 * slice_channels_, 3, 1, rng)});
  }
}

template <typename T>
GaussianParams<T> ChannelContextModel<T>::Predict(const nn::Var<T>& hyper_features, const SliceHistory<T>& history,
                                                  int slice_index) {
  Require(slice_index >= 0 && slice_index < num_slices_, ErrorKind::kCausality,
          "slice index " + std::to_string(slice_index) + " out of range");
  Require(history.count() == slice_index, ErrorKind::kCausality,
          "slice " + std::to_string(slice_index) + " predicted with " + std::to_string(history.count()) +
              " decoded slices");
  Require(hyper_features->shape().c == 2 * latent_channels_, ErrorKind::kShape, "hyper features need 2M channels");
  std::vector<nn::Var<T>> inputs = {hyper_features};
  for (int i = 0; i < slice_index; ++i) {
    nn::Var<T> s = history.slice(i);
    Require(s->shape().c == slice_channels_ && s->shape().h == hyper_features->shape().h &&
                s->shape().w == hyper_features->shape().w && s->shape().n == hyper_features->shape().n,
            ErrorKind::kShape, "decoded slice shape mismatch");
    inputs.push_back(std::move(s));
  }
  const nn::Var<T> context = inputs.size() == 1 ? inputs[0] : nn::ConcatChannels<T>(inputs);
  SliceNet& net = nets_[slice_index];
  const T slope = static_cast<T>(nn::kLeakySlope);
  const nn::Var<T> out = net.conv3(nn::LeakyRelu(net.conv2(nn::LeakyRelu(net.conv1(context), slope)), slope));
  GaussianParams<T> params;
  params.mu = nn::SliceChannels(out, 0, slice_channels_);
  params.sigma = nn::LowerBound(nn::Softplus(nn::SliceChannels(out, slice_channels_, 2 * slice_channels_)), sigma_min_);
  return params;
}

template <typename T>
void ChannelContextModel<T>::Collect(std::vector<nn::Parameter<T>*>& out) {
  for (SliceNet& net : nets_) {
    net.conv1.Collect(out);
    net.conv2.Collect(out);
    net.conv3.Collect(out);
  }
}

template class VectorSliceHistory<float>;
template class VectorSliceHistory<double>;
template class ChannelContextModel<float>;
template class ChannelContextModel<double>;

}  // namespace selic::entropy
