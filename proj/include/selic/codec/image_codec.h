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
#ifndef SELIC_CODEC_IMAGE_CODEC_H_
#define SELIC_CODEC_IMAGE_CODEC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "selic/codec/coder_backend.h"
#include "selic/codec/container.h"
#include "selic/core/image.h"
#include "selic/model/inference.h"
#include "selic/semantic/semantic.h"

namespace selic::codec {

struct EncodeStats {
  // Latent symbols clamped to +-symbol_levels (lossy).
  size_t clamped = 0;
  // Symbols coded through a segment escape (lossless).
  size_t escapes = 0;
  size_t y_elements = 0;
  size_t z_elements = 0;
  // Model rate of the coded latents, without tabulation or flush overhead.
  model::RateEstimate estimate;
  size_t payload_bytes = 0;
};

struct EncodedImage {
  std::vector<uint8_t> bytes;
  EncodeStats stats;
  // The rounded latent the decoder will reproduce.
  nn::Tensor<float> y_hat;
};

struct LatentPayloads {
  std::vector<uint8_t> z;
  std::vector<std::vector<uint8_t>> slices;
  size_t escapes = 0;
};

// Entropy codes a quantized latent: z under the factorized prior tables,
// each y slice under Gaussian tables of its predicted scales.
LatentPayloads EncodeLatents(model::InferenceModel& model, const model::LatentCode& code, EntropyCoder& coder);

// Header bytes identifying the model a stream was produced with.
uint8_t ConfigId(const ModelConfig& config);
uint8_t FusionKindByte(const ModelConfig& config);

// Pads to a multiple of 64 (edge replication), analyzes, and codes one
// image. raw_embedding is the caption embedding of the unpadded image and
// must be empty exactly when the model has no semantic branch.
EncodedImage EncodeImage(model::InferenceModel& model, const ImagePlane& image, std::span<const float> raw_embedding,
                         EntropyCoder& coder);

// Same, computing the embedding through the pipeline. pipeline may be null
// for a model without the semantic branch.
EncodedImage EncodeImage(model::InferenceModel& model, const ImagePlane& image, semantic::SemanticPipeline* pipeline,
                         EntropyCoder& coder);

// Needs only the stream and the weights. kDecode on malformed or corrupt
// streams, kModel when the stream was produced by a different model
// configuration.
ImagePlane DecodeImage(model::InferenceModel& model, std::span<const uint8_t> bytes, EntropyCoder& coder);

}  // namespace selic::codec

#endif  // SELIC_CODEC_IMAGE_CODEC_H_
