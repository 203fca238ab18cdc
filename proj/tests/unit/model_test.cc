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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "gradcheck.h"
#include "selic/core/error.h"
#include "selic/model/checkpoint.h"
#include "selic/model/inference.h"
#include "selic/model/selic_model.h"
#include "selic/nn/ops.h"

namespace selic::model {
namespace {

using nn::Shape;
using nn::Tensor;
using nn::Var;

template <typename T>
Tensor<T> RandomImage(Rng& rng, int h, int w, int n = 1) {
  Tensor<T> t(Shape{n, 3, h, w});
  for (T& v : t.values()) v = static_cast<T>(rng.Uniform());
  return t;
}

template <typename T>
Tensor<T> RandomEmbedding(Rng& rng, int dim, int n = 1) {
  Tensor<T> t(Shape{n, dim, 1, 1});
  for (T& v : t.values()) v = static_cast<T>(rng.Uniform(-1, 1));
  return t;
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kInvalidInput;
}

TEST(Autoencoder, TinyShapes) {
  SelicModel<float> model(ModelConfig::Tiny());
  Rng rng(1);
  nn::NoGradGuard guard;
  const Var<float> y = model.analysis()(nn::Constant(RandomImage<float>(rng, 256, 256)));
  EXPECT_EQ(y->shape(), (Shape{1, 16, 16, 16}));
  const Var<float> z = model.hyper_analysis()(y);
  EXPECT_EQ(z->shape(), (Shape{1, 32, 4, 4}));
  EXPECT_EQ(model.hyper_synthesis()(z)->shape(), (Shape{1, 32, 16, 16}));
  const Var<float> x = model.synthesis()(y);
  EXPECT_EQ(x->shape(), (Shape{1, 3, 256, 256}));
}

TEST(Autoencoder, DefaultPresetShape) {
  SelicModel<float> model(ModelConfig::Default());
  Rng rng(2);
  nn::NoGradGuard guard;
  const Var<float> y = model.analysis()(nn::Constant(RandomImage<float>(rng, 512, 768)));
  EXPECT_EQ(y->shape(), (Shape{1, 192, 32, 48}));
}

TEST(Autoencoder, ShapeErrors) {
  SelicModel<float> model(ModelConfig::Tiny());
  Rng rng(3);
  EXPECT_EQ(KindOf([&] { model.analysis()(nn::Constant(RandomImage<float>(rng, 100, 100))); }), ErrorKind::kShape);
  EXPECT_EQ(KindOf([&] { model.synthesis()(nn::Constant(Tensor<float>(Shape{1, 17, 4, 4}))); }), ErrorKind::kShape);
  EXPECT_EQ(KindOf([&] { model.hyper_analysis()(nn::Constant(Tensor<float>(Shape{1, 15, 16, 16}))); }),
            ErrorKind::kShape);
}

TEST(Autoencoder, ZeroLatentGivesValidImage) {
  SelicModel<float> model(ModelConfig::Tiny());
  const Tensor<float> x = SynthesizeImage(model, Tensor<float>(Shape{1, 16, 16, 16}));
  EXPECT_EQ(x.shape(), (Shape{1, 3, 256, 256}));
  for (float v : x.values()) {
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(Autoencoder, RoundTripPreservesDims) {
  SelicModel<float> model(ModelConfig::Tiny());
  Rng rng(4);
  for (auto [h, w] : {std::pair{64, 64}, std::pair{128, 192}, std::pair{320, 64}}) {
    nn::NoGradGuard guard;
    const Var<float> x = nn::Constant(RandomImage<float>(rng, h, w));
    EXPECT_EQ(model.synthesis()(model.analysis()(x))->shape(), x->shape());
  }
}

TEST(Autoencoder, GradientsMatchFiniteDifferences) {
  SelicModel<double> model(ModelConfig::Tiny());
  Rng rng(5);
  const Var<double> x = nn::Constant(RandomImage<double>(rng, 64, 64));
  std::vector<nn::Parameter<double>*> params;
  model.analysis().Collect(params);
  model.synthesis().Collect(params);
  auto loss = [&] { return nn::MeanSquaredError(model.synthesis()(model.analysis()(x)), x); };
  const testing::GradCheckResult r = testing::CheckParameterGradients(loss, params, 10, 99, 1e-6);
  EXPECT_EQ(r.checked, 10);
  EXPECT_LE(r.max_relative_error, 1e-3);
}

TEST(Model, FullLossGradientsMatchFiniteDifferences) {
  ModelConfig config = ModelConfig::Tiny();
  SelicModel<double> model(config);
  Rng rng(6);
  const Var<double> x = nn::Constant(RandomImage<double>(rng, 64, 64));
  const Var<double> e = nn::Constant(RandomEmbedding<double>(rng, config.text_embed_dim));
  auto loss = [&] {
    Rng noise(7);
    return model.TrainForward(x, e, noise).loss;
  };
  const testing::GradCheckResult r = testing::CheckParameterGradients(loss, model.Parameters(), 30, 8, 1e-4);
  EXPECT_LE(r.max_relative_error, 1e-3);
}

TEST(Model, EveryParameterReceivesGradient) {
  ModelConfig config = ModelConfig::Tiny();
  SelicModel<float> model(config);
  Rng rng(9);
  const Var<float> x = nn::Constant(RandomImage<float>(rng, 64, 64, 2));
  const Var<float> e = nn::Constant(RandomEmbedding<float>(rng, config.text_embed_dim, 2));
  for (auto* p : model.Parameters()) p->ZeroGrad();
  Rng noise(10);
  nn::Backward(model.TrainForward(x, e, noise).loss);
  for (auto* p : model.Parameters()) {
    double norm = 0;
    for (float g : p->grad.values()) norm += std::abs(g);
    EXPECT_GT(norm, 0.0) << p->name;
  }
}

TEST(Model, CanonicalParameterNames) {
  SelicModel<float> model(ModelConfig::Tiny());
  std::set<std::string> names;
  for (auto* p : model.Parameters()) EXPECT_TRUE(names.insert(p->name).second) << "duplicate " << p->name;
  for (const char* expected :
       {"ga3.stage0.conv.w", "ga3.stage3.res.conv2.b", "gs.stage3.tconv.w", "gs.stage0.res.conv1.w",
        "fusion.proj.fc1.w", "fusion.proj.fc2.b", "fusion.refine.conv1.w", "fusion.refine.shortcut.w", "ha.conv1.w",
        "hs.tconv2.b", "charm.slice3.conv3.w", "prior.matrix0", "prior.factor2", "prior.bias3"}) {
    EXPECT_TRUE(names.count(expected)) << expected;
  }
}

TEST(Fusion, AdditiveAndMultiplicativeIdentitiesAtTap) {
  Rng rng(11);
  for (FusionKind kind : {FusionKind::kAdd, FusionKind::kMul}) {
    fusion::FusionModule<float> fusion(32, 16, kind, rng);
    Tensor<float> visual(Shape{1, 16, 16, 16});
    for (float& v : visual.values()) v = static_cast<float>(rng.Normal() * 3);
    const float identity = kind == FusionKind::kAdd ? 0.0f : 1.0f;
    const Var<float> tap = fusion.Combine(nn::Constant(Tensor<float>(visual.shape(), identity)), nn::Constant(visual));
    EXPECT_EQ(tap->value, visual);
    EXPECT_EQ(fusion(nn::Constant(RandomEmbedding<float>(rng, 32)), nn::Constant(visual))->shape(), visual.shape());
  }
}

TEST(Fusion, ZeroEmbeddingProjectsToZero) {
  Rng rng(12);
  fusion::FusionModule<float> fusion(32, 16, FusionKind::kAdd, rng);
  const Var<float> projected = fusion.Project(nn::Constant(Tensor<float>(Shape{1, 32, 1, 1})));
  EXPECT_EQ(projected->shape(), (Shape{1, 16, 1, 1}));
  for (float v : projected->value.values()) EXPECT_EQ(v, 0.0f);

  Tensor<float> visual(Shape{1, 16, 8, 8});
  for (float& v : visual.values()) v = static_cast<float>(rng.Normal());
  Var<float> tap;
  fusion(nn::Constant(Tensor<float>(Shape{1, 32, 1, 1})), nn::Constant(visual), &tap);
  EXPECT_EQ(tap->value, visual);
}

TEST(Fusion, ConcatDoublesTapChannels) {
  Rng rng(13);
  fusion::FusionModule<float> fusion(32, 16, FusionKind::kConcat, rng);
  Var<float> tap;
  const Var<float> out = fusion(nn::Constant(RandomEmbedding<float>(rng, 32)),
                                nn::Constant(Tensor<float>(Shape{1, 16, 16, 16})), &tap);
  EXPECT_EQ(tap->shape(), (Shape{1, 32, 16, 16}));
  EXPECT_EQ(out->shape(), (Shape{1, 16, 16, 16}));
}

TEST(Fusion, BroadcastDefinition) {
  const Var<float> v = nn::Constant(Tensor<float>(Shape{1, 2, 1, 1}, std::vector<float>{1.0f, 2.0f}));
  const Var<float> b = nn::BroadcastSpatial(v, 2, 2);
  EXPECT_EQ(b->value, Tensor<float>(Shape{1, 2, 2, 2}, std::vector<float>{1, 1, 1, 1, 2, 2, 2, 2}));
  EXPECT_EQ(nn::BroadcastSpatial(v, 1, 1)->value, v->value);
}

TEST(Fusion, ShapeErrors) {
  Rng rng(14);
  fusion::FusionModule<float> fusion(32, 16, FusionKind::kConcat, rng);
  EXPECT_EQ(KindOf([&] { fusion.Project(nn::Constant(Tensor<float>(Shape{1, 31, 1, 1}))); }), ErrorKind::kShape);
  EXPECT_EQ(KindOf([&] {
              fusion.Combine(nn::Constant(Tensor<float>(Shape{1, 16, 4, 4})),
                             nn::Constant(Tensor<float>(Shape{1, 16, 4, 8})));
            }),
            ErrorKind::kShape);
}

TEST(Fusion, StrategyChangesOnlyFusionParameters) {
  std::map<std::string, Tensor<float>> reference;
  for (FusionKind kind : {FusionKind::kConcat, FusionKind::kAdd, FusionKind::kMul}) {
    ModelConfig config = ModelConfig::Tiny();
    config.fusion = kind;
    SelicModel<float> model(config);
    for (auto* p : model.Parameters()) {
      if (p->name.rfind("fusion.", 0) == 0) continue;
      auto [it, inserted] = reference.emplace(p->name, p->value);
      if (!inserted) {
        EXPECT_EQ(it->second, p->value) << p->name;
      }
    }
  }
}

TEST(Model, SemanticSwitch) {
  ModelConfig config = ModelConfig::Tiny();
  config.semantic_enabled = false;
  SelicModel<float> baseline(config);
  for (auto* p : baseline.Parameters()) EXPECT_NE(p->name.rfind("fusion.", 0), 0u) << p->name;
  Rng rng(15);
  const Var<float> x = nn::Constant(RandomImage<float>(rng, 64, 64));
  nn::NoGradGuard guard;
  EXPECT_EQ(baseline.Latent(x, nullptr)->value, baseline.analysis()(x)->value);
  EXPECT_EQ(KindOf([&] { baseline.Latent(x, nn::Constant(RandomEmbedding<float>(rng, 32))); }), ErrorKind::kModel);

  SelicModel<float> semantic(ModelConfig::Tiny());
  EXPECT_EQ(KindOf([&] { semantic.Latent(x, nullptr); }), ErrorKind::kModel);
  EXPECT_GT(semantic.ParameterCount(), baseline.ParameterCount());
}

TEST(Model, RateIsAdditiveOverBatch) {
  ModelConfig config = ModelConfig::Tiny();
  config.semantic_enabled = false;
  SelicModel<double> model(config);
  Rng rng(16);
  const Tensor<double> one = RandomImage<double>(rng, 64, 64);
  Tensor<double> two(Shape{2, 3, 64, 64});
  std::copy(one.values().begin(), one.values().end(), two.values().begin());
  std::copy(one.values().begin(), one.values().end(), two.values().begin() + one.size());
  nn::NoGradGuard guard;
  const Var<double> y1 = model.Latent(nn::Constant(one), nullptr);
  const Var<double> y2 = model.Latent(nn::Constant(two), nullptr);
  const double z1 = nn::SumNegLog2(model.prior().Likelihood(model.hyper_analysis()(y1), 1e-9))->value[0];
  const double z2 = nn::SumNegLog2(model.prior().Likelihood(model.hyper_analysis()(y2), 1e-9))->value[0];
  EXPECT_NEAR(z2, 2 * z1, 1e-9 * z1);
  EXPECT_GE(z1, 0.0);
}

TEST(Inference, ReconstructionMatchesAnalysis) {
  ModelConfig config = ModelConfig::Tiny();
  SelicModel<float> model(config);
  Rng rng(17);
  const Tensor<float> image = RandomImage<float>(rng, 128, 64);
  const Tensor<float> embed = RandomEmbedding<float>(rng, config.text_embed_dim);
  const LatentCode code = AnalyzeAndQuantize(model, image, &embed);
  EXPECT_EQ(code.y_shape, (Shape{1, 16, 8, 4}));
  EXPECT_EQ(code.z_shape, (Shape{1, 32, 2, 1}));
  ASSERT_EQ(code.y_symbols.size(), 4u);
  std::vector<int> order;
  const Tensor<float> y_hat = ReconstructLatent(model, code.z_shape, code.z_symbols,
                                                [&](int k, const Tensor<float>& sigma) {
                                                  order.push_back(k);
                                                  EXPECT_EQ(sigma, code.y_sigma[k]);
                                                  return code.y_symbols[k];
                                                });
  EXPECT_EQ(order, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(y_hat, code.y_hat);
  const RateEstimate rate = EstimateRateBits(model, code);
  EXPECT_GT(rate.bits_y, 0.0);
  EXPECT_GT(rate.bits_z, 0.0);
}

TEST(Checkpoint, RoundTripAndErrors) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "selic_ckpt_test";
  std::filesystem::remove_all(dir);
  ModelConfig config = ModelConfig::Tiny();
  config.seed = 42;
  config.fusion = FusionKind::kMul;
  SelicModel<float> source(config);
  Checkpoint ckpt = ExportModel(source);
  ckpt.metadata["epoch"] = "3";
  WriteCheckpoint(dir / "a.ckpt", ckpt);
  const Checkpoint loaded = ReadCheckpoint(dir / "a.ckpt");
  EXPECT_EQ(loaded.config, config);
  EXPECT_EQ(loaded.metadata.at("epoch"), "3");
  EXPECT_EQ(loaded.tensors, ckpt.tensors);

  ModelConfig other_seed = config;
  other_seed.seed = 1;
  SelicModel<float> target(other_seed);
  ImportModel(loaded, target);
  EXPECT_EQ(ExportModel(target).tensors, ckpt.tensors);

  Checkpoint missing = loaded;
  missing.tensors.erase("ha.conv1.w");
  EXPECT_EQ(KindOf([&] { ImportModel(missing, target); }), ErrorKind::kModel);

  std::ifstream in(dir / "a.ckpt", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  std::ofstream(dir / "cut.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  EXPECT_EQ(KindOf([&] { ReadCheckpoint(dir / "cut.ckpt"); }), ErrorKind::kModel);
  EXPECT_EQ(KindOf([&] { ReadCheckpoint(dir / "absent.ckpt"); }), ErrorKind::kIo);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace selic::model
