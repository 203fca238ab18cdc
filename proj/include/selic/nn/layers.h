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
#ifndef SELIC_NN_LAYERS_H_
#define SELIC_NN_LAYERS_H_

#include <string>
#include <vector>

#include "selic/core/rng.h"
#include "selic/nn/ops.h"

namespace selic::nn {

inline constexpr double kLeakySlope = 0.01;

// Weights and biases drawn from U(-sqrt(3/fan_in), sqrt(3/fan_in)), i.e.
// variance 1/fan_in.
template <typename T>
void InitFanIn(Parameter<T>& p, int fan_in, Rng& rng);

template <typename T>
class Conv2dLayer {
 public:
  Conv2dLayer(const std::string& name, int in_channels, int out_channels, int kernel, int stride, Rng& rng);

  Var<T> operator()(const Var<T>& x) { return Conv2d(x, weight_, bias_, stride_); }
  void Collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  int in_channels() const { return weight_.value.shape().c; }
  int out_channels() const { return weight_.value.shape().n; }

 private:
  Parameter<T> weight_;
  Parameter<T> bias_;
  int stride_;
};

// 3x3, stride 2, doubles the spatial size.
template <typename T>
class ConvTranspose2dLayer {
 public:
  ConvTranspose2dLayer(const std::string& name, int in_channels, int out_channels, Rng& rng);

  Var<T> operator()(const Var<T>& x) { return ConvTranspose2d(x, weight_, bias_); }
  void Collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  Parameter<T> weight_;
  Parameter<T> bias_;
};

template <typename T>
class LinearLayer {
 public:
  LinearLayer(const std::string& name, int in_features, int out_features, Rng& rng);

  Var<T> operator()(const Var<T>& x) { return Linear(x, weight_, bias_); }
  void Collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }
  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  Parameter<T> weight_;
  Parameter<T> bias_;
};

// x + conv2(lrelu(conv1(x))), both 3x3 at constant width.
template <typename T>
class ResidualBlock {
 public:
  ResidualBlock(const std::string& name, int channels, Rng& rng);

  Var<T> operator()(const Var<T>& x);
  void Collect(std::vector<Parameter<T>*>& out) {
    conv1_.Collect(out);
    conv2_.Collect(out);
  }

 private:
  Conv2dLayer<T> conv1_;
  Conv2dLayer<T> conv2_;
};

}  // namespace selic::nn

#endif  // SELIC_NN_LAYERS_H_
