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
#include "selic/codec/image_codec.h"

#include <string>

#include "selic/codec/segment.h"
#include "selic/core/error.h"
#include "selic/entropy/tables.h"
#include "selic/model/image_tensor.h"

namespace selic::codec {
namespace {

// Bound on decoded image size so a corrupt header cannot request an
// unbounded allocation.
constexpr uint64_t kMaxPixels = uint64_t{1} << 26;

std::vector<BoundedTable> PriorTables(model::InferenceModel& model) {
  std::vector<BoundedTable> tables;
  for (int c = 0; c < model.prior().channels(); ++c) {
    tables.push_back(model.prior().BuildTable(c, model.config().symbol_levels));
  }
  return tables;
}

// One table pointer per element of an NCHW tensor with N = 1.
std::vector<const BoundedTable*> PerChannel(const std::vector<BoundedTable>& tables, const nn::Shape& shape) {
  std::vector<const BoundedTable*> out;
  out.reserve(shape.numel());
  for (int c = 0; c < shape.c; ++c) out.insert(out.end(), shape.plane(), &tables[c]);
  return out;
}

std::vector<const BoundedTable*> PerElement(entropy::GaussianTableCache& cache, const nn::Tensor<float>& sigma) {
  std::vector<const BoundedTable*> out(sigma.size());
  for (size_t i = 0; i < sigma.size(); ++i) out[i] = cache.Get(sigma[i]);
  return out;
}

}  // namespace

LatentPayloads EncodeLatents(model::InferenceModel& model, const model::LatentCode& code, EntropyCoder& coder) {
  const ModelConfig& config = model.config();
  Require(static_cast<int>(code.y_symbols.size()) == config.num_slices &&
              code.y_sigma.size() == code.y_symbols.size() && code.z_shape.numel() == code.z_symbols.size(),
          ErrorKind::kShape, "latent code does not match the model's slicing");
  LatentPayloads out;
  SegmentStats seg;
  const std::vector<BoundedTable> prior = PriorTables(model);
  out.z = EncodeSegment(code.z_symbols, PerChannel(prior, code.z_shape), config.symbol_levels, coder, &seg);
  out.escapes += seg.escapes;
  entropy::GaussianTableCache cache(config.symbol_levels);
  for (int k = 0; k < config.num_slices; ++k) {
    Require(code.y_sigma[k].size() == code.y_symbols[k].size(), ErrorKind::kShape,
            "slice symbols and scales differ in size");
    seg = {};
    out.slices.push_back(
        EncodeSegment(code.y_symbols[k], PerElement(cache, code.y_sigma[k]), config.symbol_levels, coder, &seg));
    out.escapes += seg.escapes;
  }
  return out;
}

uint8_t ConfigId(const ModelConfig& config) {
  const std::optional<int> index = LambdaPresetIndex(config.lambda_value);
  return index ? static_cast<uint8_t>(*index) : kOffGridConfigId;
}

uint8_t FusionKindByte(const ModelConfig& config) {
  return config.semantic_enabled ? static_cast<uint8_t>(config.fusion) : kBaselineFusionKind;
}

EncodedImage EncodeImage(model::InferenceModel& model, const ImagePlane& image, std::span<const float> raw_embedding,
                         EntropyCoder& coder) {
  const ModelConfig& config = model.config();
  Require(!image.empty(), ErrorKind::kInvalidInput, "cannot encode an empty image");
  if (config.semantic_enabled) {
    Require(static_cast<int>(raw_embedding.size()) == config.text_embed_dim, ErrorKind::kModel,
            "semantic model needs a " + std::to_string(config.text_embed_dim) + "-wide caption embedding, got " +
                std::to_string(raw_embedding.size()));
  } else {
    Require(raw_embedding.empty(), ErrorKind::kModel, "baseline model takes no caption embedding");
  }
  const PaddedImage padded = PadToMultiple(image, ModelConfig::kPadMultiple);
  const nn::Tensor<float> x = model::ImageToTensor(padded.image);
  const nn::Tensor<float> raw = config.semantic_enabled ? model::EmbeddingTensor(raw_embedding) : nn::Tensor<float>();
  const model::LatentCode code = model::AnalyzeAndQuantize(model, x, config.semantic_enabled ? &raw : nullptr);

  EncodedImage out;
  EncodeStats& stats = out.stats;
  stats.clamped = code.clamped;
  stats.z_elements = code.z_symbols.size();
  stats.estimate = model::EstimateRateBits(model, code);

  Container c;
  c.config_id = ConfigId(config);
  c.fusion_kind = FusionKindByte(config);
  c.orig_h = static_cast<uint32_t>(image.height());
  c.orig_w = static_cast<uint32_t>(image.width());
  c.padded_h = static_cast<uint32_t>(padded.image.height());
  c.padded_w = static_cast<uint32_t>(padded.image.width());

  LatentPayloads payloads = EncodeLatents(model, code, coder);
  stats.escapes = payloads.escapes;
  for (const auto& slice : code.y_symbols) stats.y_elements += slice.size();
  c.z_payload = std::move(payloads.z);
  c.slice_payloads = std::move(payloads.slices);
  stats.payload_bytes = c.z_payload.size();
  for (const auto& s : c.slice_payloads) stats.payload_bytes += s.size();
  out.bytes = SerializeContainer(c);
  out.y_hat = code.y_hat;
  return out;
}

EncodedImage EncodeImage(model::InferenceModel& model, const ImagePlane& image, semantic::SemanticPipeline* pipeline,
                         EntropyCoder& coder) {
  if (!model.config().semantic_enabled) return EncodeImage(model, image, std::span<const float>(), coder);
  Require(pipeline != nullptr, ErrorKind::kModel, "semantic model needs a semantic pipeline to encode");
  Require(pipeline->dim() == model.config().text_embed_dim, ErrorKind::kModel,
          "semantic pipeline width does not match the model");
  const semantic::SemanticResult semantics = pipeline->Compute(image);
  return EncodeImage(model, image, semantics.embedding, coder);
}

ImagePlane DecodeImage(model::InferenceModel& model, std::span<const uint8_t> bytes, EntropyCoder& coder) {
  const ModelConfig& config = model.config();
  const Container c = ParseContainer(bytes, config.num_slices);
  Require(c.fusion_kind == FusionKindByte(config), ErrorKind::kModel,
          "bitstream fusion kind " + std::to_string(c.fusion_kind) + " does not match the model (" +
              std::to_string(FusionKindByte(config)) + ")");
  Require(c.config_id == ConfigId(config), ErrorKind::kModel,
          "bitstream config id " + std::to_string(c.config_id) + " does not match the model (" +
              std::to_string(ConfigId(config)) + ")");
  const uint32_t m = ModelConfig::kPadMultiple;
  const auto dims_ok = [m](uint32_t orig, uint32_t padded) {
    return orig > 0 && padded % m == 0 && padded >= orig && padded - orig < m;
  };
  Require(dims_ok(c.orig_h, c.padded_h) && dims_ok(c.orig_w, c.padded_w) &&
              uint64_t{c.padded_h} * c.padded_w <= kMaxPixels,
          ErrorKind::kDecode, "bitstream header has inconsistent image dimensions");

  const nn::Shape z_shape{1, config.n_filters, static_cast<int>(c.padded_h / ModelConfig::kHyperDownsample),
                          static_cast<int>(c.padded_w / ModelConfig::kHyperDownsample)};
  const std::vector<BoundedTable> prior = PriorTables(model);
  const std::vector<int32_t> z_symbols =
      DecodeSegment(c.z_payload, PerChannel(prior, z_shape), config.symbol_levels, coder);
  entropy::GaussianTableCache cache(config.symbol_levels);
  const nn::Tensor<float> y_hat =
      model::ReconstructLatent(model, z_shape, z_symbols, [&](int k, const nn::Tensor<float>& sigma) {
        return DecodeSegment(c.slice_payloads[k], PerElement(cache, sigma), config.symbol_levels, coder);
      });
  const ImagePlane full = model::TensorToImage(model::SynthesizeImage(model, y_hat));
  return CropTo(full, Dims{static_cast<int>(c.orig_h), static_cast<int>(c.orig_w)});
}

}  // namespace selic::codec
