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
#include "selic/entropy/quantize.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selic/core/error.h"
#include "selic/nn/ops.h"

namespace selic::entropy {

template <typename T>
nn::Var<T> AddUniformNoise(const nn::Var<T>& y, Rng& rng) {
  constexpr int kBits = std::numeric_limits<T>::digits;
  const T step = std::ldexp(T(1), -kBits);
  nn::Tensor<T> noise(y->shape());
  for (T& u : noise.values()) u = static_cast<T>(rng.NextU64() >> (64 - kBits)) * step - T(0.5);
  return nn::AddConstant(y, noise);
}

template <typename T>
QuantizedTensor<T> QuantizeResidual(const nn::Tensor<T>& y, const nn::Tensor<T>& mu, int levels) {
  Require(y.shape() == mu.shape(), ErrorKind::kShape, "latent and mean shapes differ");
  QuantizedTensor<T> q;
  q.symbols.resize(y.size());
  q.values = nn::Tensor<T>(y.shape());
  for (size_t i = 0; i < y.size(); ++i) {
    const double r = std::round(static_cast<double>(y[i]) - static_cast<double>(mu[i]));
    Require(std::isfinite(r), ErrorKind::kNumeric, "non-finite latent");
    const double c = std::clamp(r, static_cast<double>(-levels), static_cast<double>(levels));
    if (c != r) ++q.clamped;
    q.symbols[i] = static_cast<int32_t>(c);
    q.values[i] = static_cast<T>(q.symbols[i]) + mu[i];
  }
  return q;
}

template <typename T>
QuantizedTensor<T> QuantizeRound(const nn::Tensor<T>& z, int levels) {
  return QuantizeResidual(z, nn::Tensor<T>(z.shape()), levels);
}

template <typename T>
nn::Tensor<T> Dequantize(const std::vector<int32_t>& symbols, const nn::Tensor<T>& mu, const nn::Shape& shape) {
  Require(symbols.size() == shape.numel(), ErrorKind::kShape, "symbol count does not match shape");
  Require(mu.empty() || mu.shape() == shape, ErrorKind::kShape, "mean shape mismatch");
  nn::Tensor<T> out(shape);
  for (size_t i = 0; i < symbols.size(); ++i) {
    out[i] = static_cast<T>(symbols[i]) + (mu.empty() ? T(0) : mu[i]);
  }
  return out;
}

#define SELIC_INSTANTIATE_QUANTIZE(T)                                                             \
  template nn::Var<T> AddUniformNoise(const nn::Var<T>&, Rng&);                                   \
  template QuantizedTensor<T> QuantizeResidual(const nn::Tensor<T>&, const nn::Tensor<T>&, int);  \
  template QuantizedTensor<T> QuantizeRound(const nn::Tensor<T>&, int);                           \
  template nn::Tensor<T> Dequantize(const std::vector<int32_t>&, const nn::Tensor<T>&, const nn::Shape&);

SELIC_INSTANTIATE_QUANTIZE(float)
SELIC_INSTANTIATE_QUANTIZE(double)

}  // namespace selic::entropy
