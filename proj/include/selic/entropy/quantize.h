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
#ifndef SELIC_ENTROPY_QUANTIZE_H_
#define SELIC_ENTROPY_QUANTIZE_H_

#include <cstdint>
#include <vector>

#include "selic/core/rng.h"
#include "selic/nn/autograd.h"

namespace selic::entropy {

// Training surrogate y + u with u ~ U[-1/2, 1/2) drawn on the grid of T's
// mantissa, so every offset is exactly representable.
template <typename T>
nn::Var<T> AddUniformNoise(const nn::Var<T>& y, Rng& rng);

template <typename T>
struct QuantizedTensor {
  // Integer symbols in [-levels, levels], same element order as the input.
  std::vector<int32_t> symbols;
  // Dequantized values symbol + offset.
  nn::Tensor<T> values;
  // Elements whose rounded value fell outside [-levels, levels].
  size_t clamped = 0;
};

// symbol = clamp(round(y - mu), -levels, levels); value = symbol + mu.
// Halves round away from zero.
template <typename T>
QuantizedTensor<T> QuantizeResidual(const nn::Tensor<T>& y, const nn::Tensor<T>& mu, int levels);

// The zero-offset case used for the hyper-latent.
template <typename T>
QuantizedTensor<T> QuantizeRound(const nn::Tensor<T>& z, int levels);

// symbol + mu (mu may be empty for a zero offset).
template <typename T>
nn::Tensor<T> Dequantize(const std::vector<int32_t>& symbols, const nn::Tensor<T>& mu, const nn::Shape& shape);

}  // namespace selic::entropy

#endif  // SELIC_ENTROPY_QUANTIZE_H_
