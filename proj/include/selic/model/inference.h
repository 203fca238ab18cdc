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
#ifndef SELIC_MODEL_INFERENCE_H_
#define SELIC_MODEL_INFERENCE_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "selic/model/selic_model.h"

namespace selic::model {

using InferenceModel = SelicModel<float>;

// Quantized latents of one image plus the conditional scales the coder needs.
struct LatentCode {
  nn::Shape z_shape;
  nn::Shape y_shape;
  std::vector<int32_t> z_symbols;
  std::vector<std::vector<int32_t>> y_symbols;  // per slice
  std::vector<nn::Tensor<float>> y_sigma;       // per slice
  std::vector<nn::Tensor<float>> y_mu;          // per slice
  nn::Tensor<float> z_hat;
  nn::Tensor<float> y_hat;
  size_t clamped = 0;
};

// Deterministic rounded-latent analysis of one padded image (1, 3, H, W).
// raw_embedding is (1, D, 1, 1), or null for a model without the semantic
// branch.
LatentCode AnalyzeAndQuantize(InferenceModel& model, const nn::Tensor<float>& image,
                              const nn::Tensor<float>* raw_embedding);

// Supplies the symbols of slice k given its predicted scales.
using SliceSymbolSource = std::function<std::vector<int32_t>(int slice, const nn::Tensor<float>& sigma)>;

// Rebuilds y_hat from the hyper-latent symbols and a slice source. Uses
// only the model and data derived from earlier slices.
nn::Tensor<float> ReconstructLatent(InferenceModel& model, const nn::Shape& z_shape,
                                    const std::vector<int32_t>& z_symbols, const SliceSymbolSource& source);

// Synthesis of y_hat, clamped to [0, 1].
nn::Tensor<float> SynthesizeImage(InferenceModel& model, const nn::Tensor<float>& y_hat);

struct RateEstimate {
  double bits_y = 0;
  double bits_z = 0;
  double total() const { return bits_y + bits_z; }
};

// Sum of -log2 p over the rounded latents under the model's continuous
// (untabulated) distributions, floored like the training likelihood.
RateEstimate EstimateRateBits(InferenceModel& model, const LatentCode& code);

}  // namespace selic::model

#endif  // SELIC_MODEL_INFERENCE_H_
