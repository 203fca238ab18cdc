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
#ifndef SELIC_TESTS_SUPPORT_SYNTHETIC_LATENTS_H_
#define SELIC_TESTS_SUPPORT_SYNTHETIC_LATENTS_H_

#include <algorithm>
#include <cmath>

#include "selic/core/rng.h"
#include "selic/model/inference.h"

namespace selic::testing {

// A latent code whose symbols follow the distributions the codec models:
// y residuals are round(N(0, sigma)) with sigma log-uniform in
// [sigma_lo, sigma_hi], z symbols are drawn from the prior's coding tables.
// y is (1, M, h, w); z is (1, N, h/4, w/4).
inline model::LatentCode SyntheticLatent(model::InferenceModel& model, int h, int w, Rng& rng,
                                         double sigma_lo = 0.05, double sigma_hi = 40.0) {
  const ModelConfig& config = model.config();
  const int levels = config.symbol_levels;
  const int s = config.slice_channels();
  model::LatentCode code;
  code.y_shape = nn::Shape{1, config.latent_channels, h, w};
  code.z_shape = nn::Shape{1, config.n_filters, h / 4, w / 4};
  for (int k = 0; k < config.num_slices; ++k) {
    nn::Tensor<float> sigma(nn::Shape{1, s, h, w});
    std::vector<int32_t> symbols(sigma.size());
    for (size_t i = 0; i < sigma.size(); ++i) {
      sigma[i] = static_cast<float>(std::exp(rng.Uniform(std::log(sigma_lo), std::log(sigma_hi))));
      const long v = std::lround(sigma[i] * rng.Normal());
      symbols[i] = static_cast<int32_t>(std::clamp<long>(v, -levels, levels));
    }
    code.y_mu.push_back(nn::Tensor<float>(sigma.shape()));
    code.y_sigma.push_back(std::move(sigma));
    code.y_symbols.push_back(std::move(symbols));
  }
  code.z_hat = nn::Tensor<float>(code.z_shape);
  code.z_symbols.resize(code.z_shape.numel());
  const size_t plane = code.z_shape.plane();
  for (int c = 0; c < code.z_shape.c; ++c) {
    const codec::BoundedTable table = model.prior().BuildTable(c, levels);
    for (size_t i = 0; i < plane; ++i) {
      const int32_t v = table.lo + table.cdf.Lookup(static_cast<uint32_t>(rng.Below(65536)));
      code.z_symbols[c * plane + i] = v;
      code.z_hat[c * plane + i] = static_cast<float>(v);
    }
  }
  return code;
}

}  // namespace selic::testing

#endif  // SELIC_TESTS_SUPPORT_SYNTHETIC_LATENTS_H_
