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
#ifndef SELIC_ENTROPY_FACTORIZED_PRIOR_H_
#define SELIC_ENTROPY_FACTORIZED_PRIOR_H_

#include <array>
#include <vector>

#include "selic/codec/segment.h"
#include "selic/core/rng.h"
#include "selic/nn/autograd.h"

namespace selic::entropy {

// Learned per-channel univariate density for the hyper-latent. Each channel
// owns a monotone scalar network 1 -> 3 -> 3 -> 3 -> 1 whose output is the
// logit of the cumulative distribution:
//   h_k = softplus(H_k) l_{k-1} + b_k
//   l_k = h_k + tanh(a_k) * tanh(h_k)   (k < 3), l_3 = h_3
// Positive weights and |tanh(a_k)| < 1 keep every layer non-decreasing.
template <typename T>
class FactorizedPrior {
 public:
  static constexpr int kLayers = 4;
  static constexpr std::array<int, kLayers + 1> kWidths = {1, 3, 3, 3, 1};

  FactorizedPrior(const std::string& name, int channels, Rng& rng);

  int channels() const { return channels_; }

  // Mass of the unit bin centred on each element of z (N, C, h, w), floored
  // at `floor` (zero gradient where the floor is active).
  nn::Var<T> Likelihood(const nn::Var<T>& z, T floor);

  // Logit of P(Z <= x) for channel c, evaluated in double.
  double Logit(int channel, double x) const;
  // Unfloored mass of [x - 1/2, x + 1/2].
  double BinMass(int channel, double x) const;

  // Coding table over [lo, hi] with lo <= -1 <= 1 <= hi chosen so that each
  // folded tail carries less than 1e-6 (or the range reaches +-levels).
  codec::BoundedTable BuildTable(int channel, int levels) const;

  void Collect(std::vector<nn::Parameter<T>*>& out);

 private:
  int channels_;
  std::array<nn::Parameter<T>, kLayers> matrices_;
  std::array<nn::Parameter<T>, kLayers> biases_;
  std::array<nn::Parameter<T>, kLayers - 1> factors_;
};

}  // namespace selic::entropy

#endif  // SELIC_ENTROPY_FACTORIZED_PRIOR_H_
