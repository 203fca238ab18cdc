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
#include <numbers>

#include "gradcheck.h"
#include "selic/codec/segment.h"
#include "selic/core/error.h"
#include "selic/entropy/charm.h"
#include "selic/entropy/factorized_prior.h"
#include "selic/entropy/quantize.h"
#include "selic/entropy/tables.h"
#include "selic/nn/ops.h"

namespace selic::entropy {
namespace {

using nn::Shape;
using nn::Tensor;
using nn::Var;

// Composite Simpson integration of the standard normal density; independent
// of the erfc-based CDF used by the library.
double NormalMassOracle(double a, double b) {
  constexpr int kIntervals = 20000;
  const double h = (b - a) / kIntervals;
  double acc = 0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double t = a + i * h;
    const double f = std::exp(-0.5 * t * t) / std::sqrt(2 * std::numbers::pi);
    acc += f * (i == 0 || i == kIntervals ? 1 : (i % 2 == 1 ? 4 : 2));
  }
  return acc * h / 3;
}

Var<double> Scalars(std::initializer_list<double> values) {
  return nn::Constant(Tensor<double>(Shape{1, static_cast<int>(values.size()), 1, 1}, std::vector<double>(values)));
}

TEST(Likelihood, CentredUnitGaussianBin) {
  const Var<double> p = nn::DiscretizedGaussianLikelihood(Scalars({0.7}), Scalars({0.7}), Scalars({1.0}), 1e-9);
  const double oracle = NormalMassOracle(-0.5, 0.5);
  EXPECT_NEAR(oracle, 0.382925, 1e-6);
  EXPECT_NEAR(p->value[0], oracle, 1e-9);
  EXPECT_NEAR(-std::log2(p->value[0]), 1.3851, 1e-3);
}

TEST(Likelihood, BinsSumToOneOverClampedAlphabet) {
  const double mu = 0.3;
  const double sigma = 2.0;
  Tensor<double> v(Shape{1, 511, 1, 1});
  for (int s = -255; s <= 255; ++s) v[s + 255] = s;
  const Var<double> p = nn::DiscretizedGaussianLikelihood(nn::Constant(v), nn::Constant(Tensor<double>(v.shape(), mu)),
                                                          nn::Constant(Tensor<double>(v.shape(), sigma)), 0.0);
  double total = 0;
  for (double x : p->value.values()) {
    EXPECT_LE(x, 1.0);
    total += x;
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(Likelihood, WideScaleRateFollowsLogSigma) {
  double previous = 0;
  for (double sigma : {10.0, 100.0, 1000.0, 10000.0}) {
    const Var<double> p = nn::DiscretizedGaussianLikelihood(Scalars({1.0}), Scalars({0.0}), Scalars({sigma}), 1e-9);
    const double bits = -std::log2(p->value[0]);
    // Bin mass tends to exp(-v^2 / 2 sigma^2) / (sigma sqrt(2 pi)); the
    // bin-width curvature term is O(1 / sigma^2).
    const double asymptote =
        std::log2(sigma * std::sqrt(2 * std::numbers::pi)) + 1.0 / (2 * sigma * sigma * std::numbers::ln2);
    EXPECT_NEAR(bits, asymptote, 1.0 / (sigma * sigma));
    EXPECT_GT(bits, previous);
    previous = bits;
  }
}

TEST(Likelihood, FloorApplies) {
  const Var<double> p = nn::DiscretizedGaussianLikelihood(Scalars({50.0}), Scalars({0.0}), Scalars({1e-4}), 1e-9);
  EXPECT_EQ(p->value[0], 1e-9);
}

TEST(Quantize, ResidualRounding) {
  const Tensor<float> y(Shape{1, 2, 1, 1}, std::vector<float>{3.4f, 0.25f});
  const Tensor<float> mu(Shape{1, 2, 1, 1}, std::vector<float>{0.2f, 0.25f});
  const QuantizedTensor<float> q = QuantizeResidual(y, mu, 255);
  EXPECT_EQ(q.symbols, (std::vector<int32_t>{3, 0}));
  EXPECT_EQ(q.values[0], 3.0f + 0.2f);
  EXPECT_NEAR(q.values[0], 3.2f, 1e-6);
  EXPECT_EQ(q.values[1], 0.25f);
  EXPECT_EQ(q.clamped, 0u);
}

TEST(Quantize, ClampsAndCounts) {
  const Tensor<double> z(Shape{1, 3, 1, 1}, std::vector<double>{400.2, -300.0, 7.5});
  const QuantizedTensor<double> q = QuantizeRound(z, 255);
  EXPECT_EQ(q.symbols, (std::vector<int32_t>{255, -255, 8}));
  EXPECT_EQ(q.clamped, 2u);
  EXPECT_EQ(Dequantize(q.symbols, Tensor<double>(), z.shape()), q.values);
}

TEST(Quantize, NoiseStaysInsideHalfBin) {
  Rng rng(3);
  Tensor<double> y(Shape{1, 1, 1, 100000});
  for (double& v : y.values()) v = rng.Uniform(-1000, 1000);
  const Var<double> noisy = AddUniformNoise(nn::Constant(y), rng);
  double mean = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double d = noisy->value[i] - y[i];
    EXPECT_LT(std::abs(d), 0.5);
    mean += d;
  }
  EXPECT_NEAR(mean / y.size(), 0.0, 5e-3);
}

TEST(Quantize, NoiseAndRoundRatesAgree) {
  // Average rate under the training surrogate versus rounding, sigma >= 1.
  Rng rng(11);
  for (double sigma : {1.0, 2.0, 5.0, 20.0}) {
    constexpr int kCount = 100000;
    Tensor<double> y(Shape{1, 1, 1, kCount});
    Tensor<double> mu(y.shape());
    for (size_t i = 0; i < y.size(); ++i) {
      mu[i] = rng.Uniform(-3, 3);
      y[i] = mu[i] + sigma * rng.Normal();
    }
    const Tensor<double> sig(y.shape(), sigma);
    const Var<double> noisy = AddUniformNoise(nn::Constant(y), rng);
    const double noise_bits =
        nn::SumNegLog2(nn::DiscretizedGaussianLikelihood(noisy, nn::Constant(mu), nn::Constant(sig), 1e-9))->value[0];
    const QuantizedTensor<double> q = QuantizeResidual(y, mu, 255);
    const double round_bits = nn::SumNegLog2(nn::DiscretizedGaussianLikelihood(
                                  nn::Constant(q.values), nn::Constant(mu), nn::Constant(sig), 1e-9))->value[0];
    EXPECT_LE(std::abs(noise_bits - round_bits) / kCount, 0.1) << "sigma " << sigma;
  }
}

TEST(Tables, QuantizeToCdfHandExample) {
  // spare = 65533: 1 + 32766, 1 + 16383, 1 + 16383 = 65535; residual 1 to bin 0.
  const std::vector<double> p = {0.5, 0.25, 0.25};
  const codec::CdfTable t = QuantizeToCdf(p);
  EXPECT_EQ(std::vector<uint32_t>(t.cumulative().begin(), t.cumulative().end()),
            (std::vector<uint32_t>{0, 32768, 49152, 65536}));
}

TEST(Tables, ZeroProbabilityKeepsMinimumWidth) {
  const std::vector<double> p = {0.0, 1.0, 0.0};
  const codec::CdfTable t = QuantizeToCdf(p);
  EXPECT_EQ(t.frequency(0), 1u);
  EXPECT_EQ(t.frequency(2), 1u);
  EXPECT_EQ(t.frequency(1), 65534u);
}

TEST(Tables, GaussianExtentAndMass) {
  EXPECT_EQ(GaussianExtent(1e-4, 255), 2);
  EXPECT_EQ(GaussianExtent(1.0, 255), 7);
  EXPECT_EQ(GaussianExtent(1.01, 255), 8);
  EXPECT_EQ(GaussianExtent(100.0, 255), 255);
  for (double sigma : {1e-4, 0.05, 0.3, 1.0, 3.7, 20.0, 80.0}) {
    const codec::BoundedTable t = BuildGaussianTable(sigma, 255);
    const int k = GaussianExtent(sigma, 255);
    ASSERT_EQ(t.lo, -k);
    ASSERT_EQ(t.hi(), k);
    const int n = 2 * k + 1;
    for (int s = -k; s <= k; ++s) {
      const double a = std::abs(s);
      const double oracle = s == -k || s == k ? NormalMassOracle(-40, (0.5 - a) / sigma)
                                              : NormalMassOracle((-0.5 - a) / sigma, (0.5 - a) / sigma);
      const double coded = t.cdf.frequency(s + k) / 65536.0;
      // Quantization moves each bin by at most n / 65536 plus the residual.
      EXPECT_NEAR(coded, oracle, (n + 1.0) / 65536.0) << "sigma " << sigma << " s " << s;
    }
  }
}

TEST(Tables, CacheDeduplicates) {
  GaussianTableCache cache(255);
  const codec::BoundedTable* a = cache.Get(1.5f);
  EXPECT_EQ(cache.Get(1.5f), a);
  EXPECT_NE(cache.Get(1.25f), a);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(Segment, EscapesRoundTrip) {
  Rng rng(5);
  GaussianTableCache cache(255);
  codec::ReferenceCoder coder;
  std::vector<int32_t> values(5000);
  std::vector<const codec::BoundedTable*> tables(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const float sigma = static_cast<float>(0.05 + rng.Uniform() * 4);
    tables[i] = cache.Get(sigma);
    values[i] = static_cast<int32_t>(std::lround(sigma * rng.Normal()));
    if (i % 97 == 0) values[i] = static_cast<int32_t>(rng.Below(511)) - 255;  // outliers
  }
  values[1] = 255;
  values[2] = -255;
  codec::SegmentStats stats;
  const std::vector<uint8_t> bytes = codec::EncodeSegment(values, tables, 255, coder, &stats);
  EXPECT_GT(stats.escapes, 40u);
  EXPECT_EQ(codec::DecodeSegment(bytes, tables, 255, coder), values);

  std::vector<uint8_t> padded = bytes;
  padded.push_back(0);
  EXPECT_THROW(codec::DecodeSegment(padded, tables, 255, coder), Error);
}

TEST(Segment, NoEscapeStreamWhenUnneeded) {
  codec::ReferenceCoder coder;
  const codec::BoundedTable t = BuildGaussianTable(2.0, 255);
  const std::vector<const codec::BoundedTable*> tables(100, &t);
  std::vector<int32_t> values(100);
  for (int i = 0; i < 100; ++i) values[i] = (i % 9) - 4;
  codec::SegmentStats stats;
  const std::vector<uint8_t> bytes = codec::EncodeSegment(values, tables, 255, coder, &stats);
  EXPECT_EQ(stats.escapes, 0u);
  std::vector<const codec::CdfTable*> raw(100, &t.cdf);
  std::vector<int32_t> shifted(100);
  for (int i = 0; i < 100; ++i) shifted[i] = values[i] - t.lo;
  EXPECT_EQ(bytes, codec::RcEncode(shifted, raw));
}

TEST(Segment, RejectsOutOfLevelValues) {
  codec::ReferenceCoder coder;
  const codec::BoundedTable t = BuildGaussianTable(2.0, 255);
  const std::vector<const codec::BoundedTable*> tables(1, &t);
  const std::vector<int32_t> values = {256};
  EXPECT_THROW(codec::EncodeSegment(values, tables, 255, coder), Error);
}

TEST(FactorizedPrior, BinsFormADistribution) {
  Rng rng(2);
  FactorizedPrior<double> prior("prior", 3, rng);
  for (int c = 0; c < 3; ++c) {
    double total = 0;
    double previous = -1e300;
    for (int x = -255; x <= 255; ++x) {
      total += prior.BinMass(c, x);
      const double l = prior.Logit(c, x);
      EXPECT_GE(l, previous);
      previous = l;
    }
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
}

TEST(FactorizedPrior, TableCoversTails) {
  Rng rng(4);
  FactorizedPrior<float> prior("prior", 2, rng);
  for (int c = 0; c < 2; ++c) {
    const codec::BoundedTable t = prior.BuildTable(c, 255);
    EXPECT_LE(t.lo, -1);
    EXPECT_GE(t.hi(), 1);
    const double below = 1.0 / (1.0 + std::exp(-prior.Logit(c, t.lo - 0.5)));
    const double above = 1.0 / (1.0 + std::exp(prior.Logit(c, t.hi() + 0.5)));
    EXPECT_LT(below, 1e-6);
    EXPECT_LT(above, 1e-6);
  }
}

TEST(FactorizedPrior, LikelihoodMatchesBinMass) {
  Rng rng(8);
  FactorizedPrior<double> prior("prior", 2, rng);
  Tensor<double> z(Shape{2, 2, 2, 2});
  for (double& v : z.values()) v = rng.Uniform(-4, 4);
  const Var<double> p = prior.Likelihood(nn::Constant(z), 1e-9);
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 4; ++i) {
        const size_t idx = (static_cast<size_t>(n) * 2 + c) * 4 + i;
        EXPECT_DOUBLE_EQ(p->value[idx], std::max(prior.BinMass(c, z[idx]), 1e-9));
      }
    }
  }
}

TEST(FactorizedPrior, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  FactorizedPrior<double> prior("prior", 3, rng);
  std::vector<nn::Parameter<double>*> params;
  prior.Collect(params);
  // Move the factors off zero so their gradients are exercised.
  for (nn::Parameter<double>* p : params) {
    for (double& v : p->value.values()) v += rng.Uniform(-0.3, 0.3);
  }
  nn::Parameter<double> z;
  z.name = "z";
  z.value = Tensor<double>(Shape{2, 3, 2, 2});
  for (double& v : z.value.values()) v = rng.Uniform(-3, 3);
  auto loss = [&] { return nn::SumNegLog2(prior.Likelihood(testing::Leaf(z), 1e-9)); };
  std::vector<nn::Parameter<double>*> checked = params;
  checked.push_back(&z);
  const testing::GradCheckResult r = testing::CheckParameterGradients(loss, checked, 60, 17, 1e-5);
  EXPECT_LE(r.max_relative_error, 1e-4);
  EXPECT_GT(r.nonzero, 50);
}

// History double that records every access. It holds more slices than it
// admits to so a prediction reaching ahead would be visible.
class LoggingHistory final : public SliceHistory<double> {
 public:
  LoggingHistory(std::vector<Var<double>> slices, int visible) : slices_(std::move(slices)), visible_(visible) {}

  int count() const override { return visible_; }
  Var<double> slice(int index) const override {
    accessed_.push_back(index);
    return slices_.at(index);
  }
  const std::vector<int>& accessed() const { return accessed_; }

 private:
  std::vector<Var<double>> slices_;
  int visible_;
  mutable std::vector<int> accessed_;
};

std::vector<Var<double>> RandomSlices(Rng& rng, int count, Shape shape) {
  std::vector<Var<double>> out;
  for (int i = 0; i < count; ++i) {
    Tensor<double> t(shape);
    for (double& v : t.values()) v = rng.Uniform(-3, 3);
    out.push_back(nn::Constant(std::move(t)));
  }
  return out;
}

TEST(ChannelContext, ReadsOnlyEarlierSlices) {
  Rng rng(21);
  ChannelContextModel<double> model(8, 8, 4, 1e-4, rng);
  Tensor<double> h(Shape{1, 16, 4, 4});
  for (double& v : h.values()) v = rng.Uniform(-1, 1);
  const Var<double> hyper = nn::Constant(h);
  const std::vector<Var<double>> slices = RandomSlices(rng, 4, Shape{1, 2, 4, 4});
  for (int k = 0; k < 4; ++k) {
    LoggingHistory history(slices, k);
    const GaussianParams<double> base = model.Predict(hyper, history, k);
    for (int idx : history.accessed()) EXPECT_LT(idx, k);
    EXPECT_EQ(static_cast<int>(history.accessed().size()), k);

    std::vector<Var<double>> perturbed = slices;
    for (int j = k; j < 4; ++j) perturbed[j] = RandomSlices(rng, 1, Shape{1, 2, 4, 4})[0];
    LoggingHistory other(perturbed, k);
    const GaussianParams<double> again = model.Predict(hyper, other, k);
    EXPECT_EQ(base.mu->value, again.mu->value) << "slice " << k;
    EXPECT_EQ(base.sigma->value, again.sigma->value) << "slice " << k;

    if (k > 0) {
      // An earlier slice does influence the prediction.
      std::vector<Var<double>> earlier = slices;
      earlier[k - 1] = RandomSlices(rng, 1, Shape{1, 2, 4, 4})[0];
      LoggingHistory changed(earlier, k);
      EXPECT_NE(model.Predict(hyper, changed, k).mu->value, base.mu->value);
    }
  }
}

TEST(ChannelContext, OutOfOrderAccessIsCausalityError) {
  Rng rng(22);
  ChannelContextModel<double> model(8, 8, 4, 1e-4, rng);
  const Var<double> hyper = nn::Constant(Tensor<double>(Shape{1, 16, 4, 4}));
  const std::vector<Var<double>> slices = RandomSlices(rng, 2, Shape{1, 2, 4, 4});
  const VectorSliceHistory<double> history(slices);
  try {
    model.Predict(hyper, history, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCausality);
  }
  try {
    history.slice(2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCausality);
  }
}

TEST(ChannelContext, SigmaRespectsLowerBound) {
  Rng rng(23);
  ChannelContextModel<double> model(8, 8, 2, 1e-4, rng);
  std::vector<nn::Parameter<double>*> params;
  model.Collect(params);
  for (nn::Parameter<double>* p : params) {
    if (p->name == "charm.slice0.conv3.b") p->value.Fill(-1e4);
  }
  Tensor<double> h(Shape{1, 16, 4, 4});
  for (double& v : h.values()) v = rng.Uniform(-1, 1);
  const std::vector<Var<double>> none;
  const GaussianParams<double> out = model.Predict(nn::Constant(h), VectorSliceHistory<double>(none), 0);
  for (double s : out.sigma->value.values()) EXPECT_GE(s, 1e-4);
}

}  // namespace
}  // namespace selic::entropy
