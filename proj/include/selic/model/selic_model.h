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
#ifndef SELIC_MODEL_SELIC_MODEL_H_
#define SELIC_MODEL_SELIC_MODEL_H_

#include <string>
#include <vector>

#include "selic/autoencoder/transforms.h"
#include "selic/core/config.h"
#include "selic/entropy/charm.h"
#include "selic/entropy/factorized_prior.h"
#include "selic/entropy/hyperprior.h"
#include "selic/fusion/fusion.h"

namespace selic::model {

// Rate and distortion terms of one differentiable forward pass.
template <typename T>
struct RdTerms {
  nn::Var<T> x_hat;  // unclamped reconstruction
  nn::Var<T> bits_y;
  nn::Var<T> bits_z;
  nn::Var<T> mse;  // on the [0, 1] scale
  nn::Var<T> loss;  // bpp + lambda * 255^2 * mse
  double pixels = 0;
};

// Every learnable part of the codec. Each component draws its initial
// weights from its own seed stream, so the fusion kind or the semantic
// switch never changes the initial weights of the other components.
template <typename T>
class SelicModel {
 public:
  explicit SelicModel(const ModelConfig& config);
  SelicModel(const SelicModel&) = delete;
  SelicModel& operator=(const SelicModel&) = delete;

  const ModelConfig& config() const { return config_; }

  autoencoder::AnalysisTransform<T>& analysis() { return analysis_; }
  autoencoder::SynthesisTransform<T>& synthesis() { return synthesis_; }
  fusion::FusionModule<T>& fusion() { return fusion_; }
  entropy::HyperAnalysis<T>& hyper_analysis() { return hyper_analysis_; }
  entropy::HyperSynthesis<T>& hyper_synthesis() { return hyper_synthesis_; }
  entropy::ChannelContextModel<T>& context_model() { return context_model_; }
  entropy::FactorizedPrior<T>& prior() { return prior_; }

  // Trainable parameters in canonical order. The fusion module is listed
  // only when the semantic branch is enabled.
  std::vector<nn::Parameter<T>*> Parameters();
  size_t ParameterCount();

  // y from a padded image batch (N, 3, H, W). raw_embedding is (N, D, 1, 1)
  // and must be null exactly when the semantic branch is disabled. tap
  // receives the pre-refinement fusion tensor when non-null.
  nn::Var<T> Latent(const nn::Var<T>& image, const nn::Var<T>& raw_embedding, nn::Var<T>* tap = nullptr);

  // Noise-surrogate pass used for training.
  RdTerms<T> TrainForward(const nn::Var<T>& image, const nn::Var<T>& raw_embedding, Rng& noise);

 private:
  ModelConfig config_;
  autoencoder::AnalysisTransform<T> analysis_;
  autoencoder::SynthesisTransform<T> synthesis_;
  entropy::HyperAnalysis<T> hyper_analysis_;
  entropy::HyperSynthesis<T> hyper_synthesis_;
  entropy::ChannelContextModel<T> context_model_;
  entropy::FactorizedPrior<T> prior_;
  fusion::FusionModule<T> fusion_;
};

// Weight of the 255^2-scaled MSE in the loss.
inline constexpr double kDistortionScale = 255.0 * 255.0;

}  // namespace selic::model

#endif  // SELIC_MODEL_SELIC_MODEL_H_
