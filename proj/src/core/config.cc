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
#include "selic/core/config.h"

#include "selic/core/error.h"

namespace selic {

std::string_view FusionKindName(FusionKind kind) {
  switch (kind) {
    case FusionKind::kConcat:
      return "concat";
    case FusionKind::kAdd:
      return "add";
    case FusionKind::kMul:
      return "mul";
  }
  Fail(ErrorKind::kConfig, "unknown fusion kind");
}

FusionKind ParseFusionKind(std::string_view name) {
  if (name == "concat" || name == "channel_concat") return FusionKind::kConcat;
  if (name == "add" || name == "elementwise_add") return FusionKind::kAdd;
  if (name == "mul" || name == "elementwise_mul") return FusionKind::kMul;
  Fail(ErrorKind::kConfig, "unknown fusion strategy '" + std::string(name) + "'");
}

std::optional<int> LambdaPresetIndex(double lambda) {
  for (size_t i = 0; i < kLambdaPresets.size(); ++i) {
    if (kLambdaPresets[i] == lambda) return static_cast<int>(i);
  }
  return std::nullopt;
}

ModelConfig ModelConfig::Default() { return ModelConfig{}; }

ModelConfig ModelConfig::Tiny() {
  ModelConfig config;
  config.n_filters = 32;
  config.latent_channels = 16;
  config.num_slices = 4;
  config.text_embed_dim = 32;
  return config;
}

void ModelConfig::Validate() const {
  auto check = [](bool ok, const std::string& msg) { Require(ok, ErrorKind::kConfig, msg); };
  check(n_filters >= 1, "n_filters must be >= 1");
  check(latent_channels >= 1, "latent_channels must be >= 1");
  check(num_slices >= 1, "num_slices must be >= 1");
  check(latent_channels % num_slices == 0, "latent_channels must be divisible by num_slices");
  check(lambda_value > 0, "lambda must be positive");
  check(text_embed_dim >= 1, "text_embed_dim must be >= 1");
  check(sigma_min > 0, "sigma_min must be positive");
  check(likelihood_floor > 0 && likelihood_floor < 1, "likelihood_floor must be in (0, 1)");
  check(symbol_levels >= 1 && symbol_levels <= 32767, "symbol_levels must be in [1, 32767]");
  check(coder_backend == "reference" || coder_backend == "fast", "coder.backend must be reference or fast");
  check(semantic_backend == "stub" || semantic_backend == "pretrained",
        "semantic.backend must be stub or pretrained");
}

bool ModelConfig::ApplyKey(std::string_view key, std::string_view value) {
  if (key == "n_filters") {
    n_filters = static_cast<int>(ParseInt(key, value));
  } else if (key == "latent_channels") {
    latent_channels = static_cast<int>(ParseInt(key, value));
  } else if (key == "num_slices") {
    num_slices = static_cast<int>(ParseInt(key, value));
  } else if (key == "lambda") {
    lambda_value = ParseReal(key, value);
  } else if (key == "text_embed_dim") {
    text_embed_dim = static_cast<int>(ParseInt(key, value));
  } else if (key == "seed") {
    seed = static_cast<uint64_t>(ParseInt(key, value));
  } else if (key == "fusion.kind") {
    fusion = ParseFusionKind(value);
  } else if (key == "semantic.enabled") {
    semantic_enabled = ParseBool(key, value);
  } else if (key == "semantic.backend") {
    semantic_backend = std::string(value);
  } else if (key == "sigma_min") {
    sigma_min = ParseReal(key, value);
  } else if (key == "likelihood_floor") {
    likelihood_floor = ParseReal(key, value);
  } else if (key == "symbol_levels") {
    symbol_levels = static_cast<int>(ParseInt(key, value));
  } else if (key == "coder.backend") {
    coder_backend = std::string(value);
  } else {
    return false;
  }
  return true;
}

KeyValueDocument ModelConfig::ToDocument() const {
  KeyValueDocument doc;
  doc.Set("n_filters", std::to_string(n_filters));
  doc.Set("latent_channels", std::to_string(latent_channels));
  doc.Set("num_slices", std::to_string(num_slices));
  doc.Set("lambda", FormatReal(lambda_value));
  doc.Set("text_embed_dim", std::to_string(text_embed_dim));
  doc.Set("seed", std::to_string(seed));
  doc.Set("fusion.kind", std::string(FusionKindName(fusion)));
  doc.Set("semantic.enabled", semantic_enabled ? "true" : "false");
  doc.Set("semantic.backend", semantic_backend);
  doc.Set("sigma_min", FormatReal(sigma_min));
  doc.Set("likelihood_floor", FormatReal(likelihood_floor));
  doc.Set("symbol_levels", std::to_string(symbol_levels));
  doc.Set("coder.backend", coder_backend);
  return doc;
}

ModelConfig ModelConfig::FromDocument(const KeyValueDocument& doc) {
  ModelConfig config;
  for (const auto& [key, value] : doc.entries()) {
    if (!config.ApplyKey(key, value)) Fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
  }
  config.Validate();
  return config;
}

}  // namespace selic
