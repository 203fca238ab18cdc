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
#include <gtest/gtest.h>

#include <cstring>

#include "selic/codec/container.h"
#include "selic/codec/image_codec.h"
#include "selic/core/error.h"
#include "selic/core/rng.h"
#include "selic/model/image_tensor.h"
#include "support/synthetic_latents.h"

namespace selic::codec {
namespace {

using model::InferenceModel;

ImagePlane Smooth(int h, int w, uint64_t seed) {
  ImagePlane img(h, w);
  Rng rng(seed);
  const double fx = rng.Uniform(0.01, 0.05), fy = rng.Uniform(0.01, 0.05);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.at(c, y, x) = static_cast<float>(0.5 + 0.3 * std::sin(fx * x * (c + 1) + fy * y) + 0.1 * rng.Uniform());
  return img;
}

std::vector<float> Embedding(int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(dim);
  for (float& x : v) x = static_cast<float>(rng.Normal() / std::sqrt(dim));
  return v;
}

uint32_t U32At(const std::vector<uint8_t>& b, size_t off) {
  uint32_t v;
  std::memcpy(&v, b.data() + off, 4);
  return v;
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no selic::Error thrown";
  return ErrorKind::kInvalidInput;
}

TEST(Container, RoundTripAndLength) {
  Container c;
  c.config_id = 2;
  c.fusion_kind = 1;
  c.orig_h = 500;
  c.orig_w = 750;
  c.padded_h = 512;
  c.padded_w = 768;
  c.z_payload = {1, 2, 3};
  c.slice_payloads = {{4}, {}, {5, 6}};
  const std::vector<uint8_t> bytes = SerializeContainer(c);
  EXPECT_EQ(bytes.size(), 23u + 4 * (1 + 3) + 3 + 3);
  EXPECT_EQ(bytes.size(), c.SerializedSize());
  const Container back = ParseContainer(bytes, 3);
  EXPECT_EQ(back.slice_payloads, c.slice_payloads);
  EXPECT_EQ(back.z_payload, c.z_payload);
  EXPECT_EQ(back.padded_w, 768u);
  EXPECT_EQ(KindOf([&] { ParseContainer(bytes, 2); }), ErrorKind::kDecode);
  std::vector<uint8_t> longer = bytes;
  longer.push_back(0);
  EXPECT_EQ(KindOf([&] { ParseContainer(longer, 3); }), ErrorKind::kDecode);
  for (size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_EQ(KindOf([&] { ParseContainer(std::span(bytes).first(n), 3); }), ErrorKind::kDecode) << n;
  }
  std::vector<uint8_t> bad = bytes;
  bad[4] = 2;
  EXPECT_EQ(KindOf([&] { ParseContainer(bad, 3); }), ErrorKind::kDecode);
  bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(KindOf([&] { ParseContainer(bad, 3); }), ErrorKind::kDecode);
}

class ImageCodecTest : public ::testing::Test {
 protected:
  ImageCodecTest() : model_(ModelConfig::Tiny()), embed_(Embedding(model_.config().text_embed_dim, 3)) {}

  InferenceModel model_;
  std::vector<float> embed_;
  ReferenceCoder coder_;
};

TEST_F(ImageCodecTest, HeaderEchoesDims) {
  const EncodedImage enc = EncodeImage(model_, Smooth(500, 750, 1), embed_, coder_);
  const std::vector<uint8_t>& b = enc.bytes;
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "SELC");
  EXPECT_EQ(b[4], kContainerVersion);
  EXPECT_EQ(b[5], 2);  // lambda 0.0075 is preset index 2
  EXPECT_EQ(b[6], static_cast<uint8_t>(FusionKind::kConcat));
  EXPECT_EQ(U32At(b, 7), 500u);
  EXPECT_EQ(U32At(b, 11), 750u);
  EXPECT_EQ(U32At(b, 15), 512u);
  EXPECT_EQ(U32At(b, 19), 768u);
  const Container c = ParseContainer(b, model_.config().num_slices);
  EXPECT_EQ(c.orig_h, 500u);
  EXPECT_EQ(c.padded_w, 768u);
}

TEST_F(ImageCodecTest, LengthInvariant) {
  const EncodedImage enc = EncodeImage(model_, Smooth(70, 130, 2), embed_, coder_);
  const int slices = model_.config().num_slices;
  size_t expected = kFixedHeaderBytes + 4 * (1 + slices) + U32At(enc.bytes, 23);
  for (int k = 0; k < slices; ++k) expected += U32At(enc.bytes, 27 + 4 * k);
  EXPECT_EQ(enc.bytes.size(), expected);
  EXPECT_EQ(enc.stats.payload_bytes, enc.bytes.size() - kFixedHeaderBytes - 4 * (1 + slices));
}

TEST_F(ImageCodecTest, DeterministicAndExact) {
  const ImagePlane img = Smooth(100, 140, 3);
  const EncodedImage a = EncodeImage(model_, img, embed_, coder_);
  InferenceModel again(ModelConfig::Tiny());
  const EncodedImage b = EncodeImage(again, img, embed_, coder_);
  EXPECT_EQ(a.bytes, b.bytes);

  const ImagePlane decoded = DecodeImage(model_, a.bytes, coder_);
  const ImagePlane expected = CropTo(model::TensorToImage(model::SynthesizeImage(model_, a.y_hat)), img.dims());
  ASSERT_EQ(decoded.dims(), img.dims());
  EXPECT_EQ(decoded, expected);
}

TEST_F(ImageCodecTest, DecoderNeverCallsSemanticBackends) {
  auto pipeline = std::make_unique<semantic::SemanticPipeline>(
      std::make_unique<semantic::StubCaptioner>(0),
      std::make_unique<semantic::StubTextEncoder>(model_.config().text_embed_dim, 0));
  const ImagePlane img = Smooth(64, 64, 4);
  const EncodedImage enc = EncodeImage(model_, img, pipeline.get(), coder_);
  EXPECT_EQ(pipeline->caption_calls(), 1u);
  EXPECT_EQ(pipeline->embed_calls(), 1u);
  DecodeImage(model_, enc.bytes, coder_);
  EXPECT_EQ(pipeline->caption_calls(), 1u);
  EXPECT_EQ(pipeline->embed_calls(), 1u);
  EXPECT_EQ(KindOf([&] { EncodeImage(model_, img, static_cast<semantic::SemanticPipeline*>(nullptr), coder_); }),
            ErrorKind::kModel);
}

TEST_F(ImageCodecTest, EveryByteFlipIsDetectedOrChangesOutput) {
  const EncodedImage enc = EncodeImage(model_, Smooth(64, 64, 5), embed_, coder_);
  const ImagePlane clean = DecodeImage(model_, enc.bytes, coder_);
  size_t errors = 0, changed = 0;
  for (size_t i = 0; i < enc.bytes.size(); ++i) {
    std::vector<uint8_t> bad = enc.bytes;
    bad[i] ^= static_cast<uint8_t>(1u << (i % 8));
    try {
      const ImagePlane out = DecodeImage(model_, bad, coder_);
      EXPECT_NE(out, clean) << "flip at byte " << i << " went unnoticed";
      ++changed;
    } catch (const Error& e) {
      EXPECT_TRUE(e.kind() == ErrorKind::kDecode || e.kind() == ErrorKind::kModel) << e.what();
      ++errors;
    }
  }
  EXPECT_EQ(errors + changed, enc.bytes.size());
}

TEST_F(ImageCodecTest, ModelMismatchIsRejected) {
  const EncodedImage enc = EncodeImage(model_, Smooth(64, 64, 6), embed_, coder_);
  ModelConfig other = ModelConfig::Tiny();
  other.fusion = FusionKind::kAdd;
  InferenceModel add(other);
  EXPECT_EQ(KindOf([&] { DecodeImage(add, enc.bytes, coder_); }), ErrorKind::kModel);
  other = ModelConfig::Tiny();
  other.lambda_value = 0.0016;
  InferenceModel low(other);
  EXPECT_EQ(KindOf([&] { DecodeImage(low, enc.bytes, coder_); }), ErrorKind::kModel);
  EXPECT_EQ(KindOf([&] { EncodeImage(model_, Smooth(8, 8, 1), std::span<const float>(), coder_); }),
            ErrorKind::kModel);
}

TEST(ImageCodec, BaselineStreamCarriesMarker) {
  ModelConfig config = ModelConfig::Tiny();
  config.semantic_enabled = false;
  config.lambda_value = 0.01;
  InferenceModel model(config);
  ReferenceCoder coder;
  const ImagePlane img = Smooth(64, 128, 7);
  const EncodedImage enc = EncodeImage(model, img, static_cast<semantic::SemanticPipeline*>(nullptr), coder);
  EXPECT_EQ(enc.bytes[5], kOffGridConfigId);
  EXPECT_EQ(enc.bytes[6], kBaselineFusionKind);
  EXPECT_EQ(DecodeImage(model, enc.bytes, coder).dims(), img.dims());
  EXPECT_EQ(KindOf([&] { EncodeImage(model, img, std::span<const float>(Embedding(32, 1)), coder); }),
            ErrorKind::kModel);
}

// Payload bits of latents drawn from the modeled distributions stay within
// [estimate, 1.02 estimate + 64 bits per slice stream].
TEST(ImageCodec, RateAccountingBound) {
  for (uint64_t seed : {1, 2, 3}) {
    ModelConfig config = ModelConfig::Tiny();
    config.seed = seed;
    InferenceModel model(config);
    ReferenceCoder coder;
    Rng rng(seed);
    const model::LatentCode code = testing::SyntheticLatent(model, 16, 16, rng);
    const LatentPayloads payloads = EncodeLatents(model, code, coder);
    double measured = 8.0 * payloads.z.size();
    for (const auto& slice : payloads.slices) measured += 8.0 * slice.size();
    const double est = model::EstimateRateBits(model, code).total();
    EXPECT_GE(measured, est) << "seed " << seed;
    EXPECT_LE(measured, est * 1.02 + 64.0 * config.num_slices) << "seed " << seed;
  }
}

// Real images through an untrained model put many symbols in the far tails,
// where the floored estimate can exceed the coded length; only the
// overhead side is bounded there.
TEST(ImageCodec, ImageRateOverheadIsBounded) {
  ModelConfig config = ModelConfig::Tiny();
  InferenceModel model(config);
  ReferenceCoder coder;
  Rng rng(4);
  ImagePlane img(192, 256);
  for (float& v : img.values()) v = static_cast<float>(rng.Uniform());
  const EncodedImage enc = EncodeImage(model, img, Embedding(config.text_embed_dim, 4), coder);
  EXPECT_LE(8.0 * enc.stats.payload_bytes, enc.stats.estimate.total() * 1.02 + 64.0 * (config.num_slices + 1));
}

}  // namespace
}  // namespace selic::codec
