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
#ifndef SELIC_CORE_CONFIG_H_
#define SELIC_CORE_CONFIG_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "selic/core/kv_document.h"

namespace selic {

// How the broadcast semantic tensor is combined with the visual latent.
enum class FusionKind : uint8_t {
  kConcat = 0,
  kAdd = 1,
  kMul = 2,
};

std::string_view FusionKindName(FusionKind kind);
// Accepts "concat"/"channel_concat", "add"/"elementwise_add",
// "mul"/"elementwise_mul".
FusionKind ParseFusionKind(std::string_view name);

inline constexpr std::array<double, 7> kLambdaPresets = {0.0016, 0.0032, 0.0075, 0.015,
                                                         0.03,   0.045,  0.06};
// Index into kLambdaPresets when lambda is exactly one of the presets.
std::optional<int> LambdaPresetIndex(double lambda);

struct ModelConfig {
  static constexpr int kLatentDownsample = 16;
  static constexpr int kHyperDownsample = 64;
  static constexpr int kPadMultiple = 64;

  int n_filters = 128;
  int latent_channels = 192;
  int num_slices = 8;
  double lambda_value = 0.0075;
  int text_embed_dim = 768;
  uint64_t seed = 0;
  FusionKind fusion = FusionKind::kConcat;
  // false is the semantic-removal baseline: y is the visual latent itself.
  bool semantic_enabled = true;
  std::string semantic_backend = "stub";
  double sigma_min = 1e-4;
  double likelihood_floor = 1e-9;
  int symbol_levels = 255;
  std::string coder_backend = "reference";

  static ModelConfig Default();
  // M = 16, N = 32, 32-wide text embeddings; used throughout the tests.
  static ModelConfig Tiny();

  int slice_channels() const { return latent_channels / num_slices; }

  // Throws kConfig when an invariant does not hold.
  void Validate() const;

  // Consumes one key of a flat config document. Returns false for keys this
  // struct does not own so composite documents can route them elsewhere.
  bool ApplyKey(std::string_view key, std::string_view value);

  KeyValueDocument ToDocument() const;
  // Unknown keys are rejected.
  static ModelConfig FromDocument(const KeyValueDocument& doc);

  std::string Serialize() const { return ToDocument().ToString(); }
  static ModelConfig Parse(std::string_view text) { return FromDocument(KeyValueDocument::Parse(text)); }

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace selic

#endif  // SELIC_CORE_CONFIG_H_
