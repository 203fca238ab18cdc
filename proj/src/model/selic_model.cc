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
#include "selic/model/selic_model.h"

#include "selic/core/error.h"
#include "selic/entropy/quantize.h"
#include "selic/nn/ops.h"

namespace selic::model {
namespace {

enum SeedTag : uint64_t {
  kAnalysisSeed = 1,
  kSynthesisSeed,
  kHyperAnalysisSeed,
  kHyperSynthesisSeed,
  kContextSeed,
  kPriorSeed,
  kFusionSeed,
};

Rng ComponentRng(const ModelConfig& config, SeedTag tag) { return Rng(DeriveSeed(config.seed, tag)); }

// Binds a temporary generator for the duration of one member initializer.
Rng& Scratch(Rng&& rng) { return rng; }

const ModelConfig& Validated(const ModelConfig& config) {
  config.Validate();
  return config;
}

}  // namespace

template <typename T>
SelicModel<T>::SelicModel(const ModelConfig& config)
    : config_(Validated(config)),
      analysis_(config.n_filters, config.latent_channels,
                Scratch(ComponentRng(config, kAnalysisSeed))),
      synthesis_(config.n_filters, config.latent_channels,
                 Scratch(ComponentRng(config, kSynthesisSeed))),
      hyper_analysis_(config.n_filters, config.latent_channels,
                      Scratch(ComponentRng(config, kHyperAnalysisSeed))),
      hyper_synthesis_(config.n_filters, config.latent_channels,
                       Scratch(ComponentRng(config, kHyperSynthesisSeed))),
      context_model_(config.n_filters, config.latent_channels, config.num_slices, config.sigma_min,
                     Scratch(ComponentRng(config, kContextSeed))),
      prior_("prior", config.n_filters, Scratch(ComponentRng(config, kPriorSeed))),
      fusion_(config.text_embed_dim, config.latent_channels, config.fusion,
              Scratch(ComponentRng(config, kFusionSeed))) {}

template <typename T>
std::vector<nn::Parameter<T>*> SelicModel<T>::Parameters() {
  std::vector<nn::Parameter<T>*> out;
  analysis_.Collect(out);
  if (config_.semantic_enabled) fusion_.Collect(out);
  hyper_analysis_.Collect(out);
  hyper_synthesis_.Collect(out);
  context_model_.Collect(out);
  prior_.Collect(out);
  synthesis_.Collect(out);
  return out;
}

template <typename T>
size_t SelicModel<T>::ParameterCount() {
  size_t total = 0;
  for (const nn::Parameter<T>* p : Parameters()) total += p->value.size();
  return total;
}

template <typename T>
nn::Var<T> SelicModel<T>::Latent(const nn::Var<T>& image, const nn::Var<T>& raw_embedding, nn::Var<T>* tap) {
  const nn::Var<T> visual = analysis_(image);
  if (!config_.semantic_enabled) {
    Require(raw_embedding == nullptr, ErrorKind::kModel, "semantic branch is disabled but an embedding was given");
    return visual;
  }
  Require(raw_embedding != nullptr, ErrorKind::kModel, "semantic branch is enabled but no embedding was given");
  return fusion_(raw_embedding, visual, tap);
}

template <typename T>
RdTerms<T> SelicModel<T>::TrainForward(const nn::Var<T>& image, const nn::Var<T>& raw_embedding, Rng& noise) {
  const T floor = static_cast<T>(config_.likelihood_floor);
  const nn::Var<T> y = Latent(image, raw_embedding);
  const nn::Var<T> z = hyper_analysis_(y);
  const nn::Var<T> z_tilde = entropy::AddUniformNoise(z, noise);
  const nn::Var<T> hyper = hyper_synthesis_(z_tilde);

  const int s = context_model_.slice_channels();
  std::vector<nn::Var<T>> decoded;
  std::vector<nn::Var<T>> bits;
  decoded.reserve(config_.num_slices);
  for (int k = 0; k < config_.num_slices; ++k) {
    const entropy::VectorSliceHistory<T> history(decoded);
    const entropy::GaussianParams<T> params = context_model_.Predict(hyper, history, k);
    const nn::Var<T> y_tilde = entropy::AddUniformNoise(nn::SliceChannels(y, k * s, (k + 1) * s), noise);
    bits.push_back(nn::SumNegLog2(nn::DiscretizedGaussianLikelihood(y_tilde, params.mu, params.sigma, floor)));
    decoded.push_back(y_tilde);
  }
  RdTerms<T> terms;
  terms.bits_y = bits[0];
  for (size_t k = 1; k < bits.size(); ++k) terms.bits_y = nn::Add(terms.bits_y, bits[k]);
  terms.bits_z = nn::SumNegLog2(prior_.Likelihood(z_tilde, floor));
  const nn::Var<T> y_tilde = decoded.size() == 1 ? decoded[0] : nn::ConcatChannels<T>(decoded);
  terms.x_hat = synthesis_(y_tilde);
  terms.mse = nn::MeanSquaredError(terms.x_hat, image);
  const nn::Shape& shape = image->shape();
  terms.pixels = static_cast<double>(shape.n) * shape.h * shape.w;
  const nn::Var<T> bpp = nn::Scale(nn::Add(terms.bits_y, terms.bits_z), static_cast<T>(1.0 / terms.pixels));
  terms.loss = nn::Add(bpp, nn::Scale(terms.mse, static_cast<T>(config_.lambda_value * kDistortionScale)));
  return terms;
}

template class SelicModel<float>;
template class SelicModel<double>;

}  // namespace selic::model
