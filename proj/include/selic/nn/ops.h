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
#ifndef SELIC_NN_OPS_H_
#define SELIC_NN_OPS_H_

#include <span>
#include <vector>

#include "selic/nn/autograd.h"

namespace selic::nn {

// Square-kernel convolution with "same" padding (k / 2). weight is
// (C_out, C_in, k, k); bias is (1, C_out, 1, 1). stride is 1 or 2; a stride-2
// convolution maps H x W to ceil(H / 2) x ceil(W / 2).
template <typename T>
Var<T> Conv2d(const Var<T>& x, Parameter<T>& weight, Parameter<T>& bias, int stride);

// 3x3 stride-2 transposed convolution (padding 1, output padding 1), exactly
// doubling H and W. weight is (C_in, C_out, 3, 3).
template <typename T>
Var<T> ConvTranspose2d(const Var<T>& x, Parameter<T>& weight, Parameter<T>& bias);

// x is (N, In, 1, 1); weight (Out, In, 1, 1); bias (1, Out, 1, 1).
template <typename T>
Var<T> Linear(const Var<T>& x, Parameter<T>& weight, Parameter<T>& bias);

template <typename T>
Var<T> LeakyRelu(const Var<T>& x, T slope);

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> Mul(const Var<T>& a, const Var<T>& b);

// x + c where c carries no gradient (e.g. quantization noise).
template <typename T>
Var<T> AddConstant(const Var<T>& x, const Tensor<T>& c);

template <typename T>
Var<T> Scale(const Var<T>& x, T factor);

// (N, C, 1, 1) -> (N, C, h, w) with out[n, c, i, j] = v[n, c].
template <typename T>
Var<T> BroadcastSpatial(const Var<T>& v, int h, int w);

template <typename T>
Var<T> ConcatChannels(std::span<const Var<T>> parts);

// Channels [begin, end).
template <typename T>
Var<T> SliceChannels(const Var<T>& x, int begin, int end);

template <typename T>
Var<T> Softplus(const Var<T>& x);

// max(x, bound); the gradient is passed only where x > bound.
template <typename T>
Var<T> LowerBound(const Var<T>& x, T bound);

// Probability mass of the unit-width bin centred on v under N(mu, sigma):
// Phi((v - mu + 1/2) / sigma) - Phi((v - mu - 1/2) / sigma), floored at
// `floor` (zero gradient where the floor is active).
template <typename T>
Var<T> DiscretizedGaussianLikelihood(const Var<T>& v, const Var<T>& mu, const Var<T>& sigma, T floor);

// Scalar -sum(log2 p).
template <typename T>
Var<T> SumNegLog2(const Var<T>& p);

// Scalar mean((a - b)^2).
template <typename T>
Var<T> MeanSquaredError(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> Sum(const Var<T>& x);

// Standard normal CDF and density.
double NormalCdf(double t);
double NormalPdf(double t);

}  // namespace selic::nn

#endif  // SELIC_NN_OPS_H_
