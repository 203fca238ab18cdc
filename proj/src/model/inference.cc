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
#include "selic/model/inference.h"

#include <algorithm>
#include <cmath>

#include "selic/core/error.h"
#include "selic/entropy/quantize.h"
#include "selic/nn/ops.h"

namespace selic::model {
namespace {

nn::Tensor<float> HyperFeatures(InferenceModel& model, const nn::Tensor<float>& z_hat) {
  return model.hyper_synthesis()(nn::Constant(z_hat))->value;
}

}  // namespace

LatentCode AnalyzeAndQuantize(InferenceModel& model, const nn::Tensor<float>& image,
                              const nn::Tensor<float>* raw_embedding) {
  nn::NoGradGuard no_grad;
  Require(image.shape().n == 1, ErrorKind::kShape, "inference runs one image at a time");
  const ModelConfig& config = model.config();
  const nn::Var<float> raw = raw_embedding != nullptr ? nn::Constant(*raw_embedding) : nullptr;
  const nn::Var<float> y = model.Latent(nn::Constant(image), raw);

  LatentCode code;
  code.y_shape = y->shape();
  const nn::Var<float> z = model.hyper_analysis()(y);
  code.z_shape = z->shape();
  entropy::QuantizedTensor<float> zq = entropy::QuantizeRound(z->value, config.symbol_levels);
  code.z_symbols = std::move(zq.symbols);
  code.z_hat = std::move(zq.values);
  code.clamped += zq.clamped;

  const nn::Var<float> hyper = nn::Constant(HyperFeatures(model, code.z_hat));
  const int s = config.slice_channels();
  std::vector<nn::Var<float>> decoded;
  for (int k = 0; k < config.num_slices; ++k) {
    const entropy::VectorSliceHistory<float> history(decoded);
    const entropy::GaussianParams<float> params = model.context_model().Predict(hyper, history, k);
    const nn::Var<float> y_k = nn::SliceChannels(y, k * s, (k + 1) * s);
    entropy::QuantizedTensor<float> q = entropy::QuantizeResidual(y_k->value, params.mu->value, config.symbol_levels);
    code.clamped += q.clamped;
    code.y_symbols.push_back(std::move(q.symbols));
    code.y_sigma.push_back(params.sigma->value);
    code.y_mu.push_back(params.mu->value);
    decoded.push_back(nn::Constant(std::move(q.values)));
  }
  code.y_hat = (decoded.size() == 1 ? decoded[0] : nn::ConcatChannels<float>(decoded))->value;
  return code;
}

nn::Tensor<float> ReconstructLatent(InferenceModel& model, const nn::Shape& z_shape,
                                    const std::vector<int32_t>& z_symbols, const SliceSymbolSource& source) {
  nn::NoGradGuard no_grad;
  const ModelConfig& config = model.config();
  Require(z_shape.c == config.n_filters, ErrorKind::kShape, "hyper-latent channel count does not match the model");
  const nn::Tensor<float> z_hat = entropy::Dequantize(z_symbols, nn::Tensor<float>(z_shape), z_shape);
  const nn::Var<float> hyper = nn::Constant(HyperFeatures(model, z_hat));
  std::vector<nn::Var<float>> decoded;
  for (int k = 0; k < config.num_slices; ++k) {
    const entropy::VectorSliceHistory<float> history(decoded);
    const entropy::GaussianParams<float> params = model.context_model().Predict(hyper, history, k);
    const std::vector<int32_t> symbols = source(k, params.sigma->value);
    decoded.push_back(nn::Constant(entropy::Dequantize(symbols, params.mu->value, params.mu->shape())));
  }
  return (decoded.size() == 1 ? decoded[0] : nn::ConcatChannels<float>(decoded))->value;
}

nn::Tensor<float> SynthesizeImage(InferenceModel& model, const nn::Tensor<float>& y_hat) {
  nn::NoGradGuard no_grad;
  nn::Tensor<float> x = model.synthesis()(nn::Constant(y_hat))->value;
  for (float& v : x.values()) v = std::clamp(v, 0.0f, 1.0f);
  return x;
}

RateEstimate EstimateRateBits(InferenceModel& model, const LatentCode& code) {
  nn::NoGradGuard no_grad;
  const float floor = static_cast<float>(model.config().likelihood_floor);
  RateEstimate rate;
  for (size_t k = 0; k < code.y_symbols.size(); ++k) {
    const nn::Tensor<float>& sigma = code.y_sigma[k];
    for (size_t i = 0; i < sigma.size(); ++i) {
      const double a = std::abs(static_cast<double>(code.y_symbols[k][i]));
      const double s = sigma[i];
      const double p = nn::NormalCdf((0.5 - a) / s) - nn::NormalCdf((-0.5 - a) / s);
      rate.bits_y -= std::log2(std::max(p, static_cast<double>(floor)));
    }
  }
  const nn::Var<float> z_hat = nn::Constant(code.z_hat);
  rate.bits_z = nn::SumNegLog2(model.prior().Likelihood(z_hat, floor))->value[0];
  return rate;
}

}  // namespace selic::model
