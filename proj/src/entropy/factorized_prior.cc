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
#include "selic/entropy/factorized_prior.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "selic/core/error.h"
#include "selic/entropy/tables.h"

namespace selic::entropy {
namespace {

constexpr int kLayers = 4;
constexpr std::array<int, kLayers + 1> kWidths = {1, 3, 3, 3, 1};
constexpr int kMaxWidth = 3;
constexpr double kInitScale = 10.0;
constexpr double kTailMass = 1e-6;

double Sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double SigmoidDerivative(double t) {
  const double e = std::exp(-std::abs(t));
  return e / ((1.0 + e) * (1.0 + e));
}

double SoftplusD(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

// One layer of every channel after the positivity and tanh transforms.
// w and dw are indexed (c * out + j) * in + i; b, f and df by c * out + j.
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w, dw, b, f, df;
};
using Layers = std::array<Layer, kLayers>;

template <typename T>
Layers Snapshot(const std::array<nn::Parameter<T>, kLayers>& matrices,
                const std::array<nn::Parameter<T>, kLayers>& biases,
                const std::array<nn::Parameter<T>, kLayers - 1>& factors) {
  Layers layers;
  for (int k = 0; k < kLayers; ++k) {
    Layer& l = layers[k];
    l.in = kWidths[k];
    l.out = kWidths[k + 1];
    const auto& m = matrices[k].value;
    l.w.resize(m.size());
    l.dw.resize(m.size());
    for (size_t i = 0; i < m.size(); ++i) {
      l.w[i] = SoftplusD(m[i]);
      l.dw[i] = Sigmoid(m[i]);
    }
    const auto& b = biases[k].value;
    l.b.assign(b.data(), b.data() + b.size());
    if (k < kLayers - 1) {
      const auto& a = factors[k].value;
      l.f.resize(a.size());
      l.df.resize(a.size());
      for (size_t i = 0; i < a.size(); ++i) {
        l.f[i] = std::tanh(static_cast<double>(a[i]));
        l.df[i] = 1.0 - l.f[i] * l.f[i];
      }
    }
  }
  return layers;
}

// Activations of one scalar evaluation, kept for the backward pass.
struct Trace {
  double in[kLayers][kMaxWidth];
  double h[kLayers][kMaxWidth];
};

double Forward(const Layers& layers, int c, double x, Trace* trace) {
  double cur[kMaxWidth] = {x, 0, 0};
  for (int k = 0; k < kLayers; ++k) {
    const Layer& l = layers[k];
    double next[kMaxWidth];
    for (int j = 0; j < l.out; ++j) {
      const size_t row = static_cast<size_t>(c) * l.out + j;
      double h = l.b[row];
      for (int i = 0; i < l.in; ++i) h += l.w[row * l.in + i] * cur[i];
      if (trace != nullptr) trace->h[k][j] = h;
      next[j] = k < kLayers - 1 ? h + l.f[row] * std::tanh(h) : h;
    }
    if (trace != nullptr) std::copy(cur, cur + l.in, trace->in[k]);
    std::copy(next, next + l.out, cur);
  }
  return cur[0];
}

// Gradient accumulators laid out like the parameters (w.r.t. the raw,
// untransformed values).
struct Grads {
  std::array<std::vector<double>, kLayers> matrix, bias, factor;

  explicit Grads(const Layers& layers) {
    for (int k = 0; k < kLayers; ++k) {
      matrix[k].assign(layers[k].w.size(), 0.0);
      bias[k].assign(layers[k].b.size(), 0.0);
      factor[k].assign(layers[k].f.size(), 0.0);
    }
  }
};

// Propagates d(out) = g back through one traced evaluation; returns d(x).
double BackwardScalar(const Layers& layers, int c, const Trace& trace, double g, Grads& grads) {
  double gout[kMaxWidth] = {g, 0, 0};
  for (int k = kLayers - 1; k >= 0; --k) {
    const Layer& l = layers[k];
    double gin[kMaxWidth] = {0, 0, 0};
    for (int j = 0; j < l.out; ++j) {
      const size_t row = static_cast<size_t>(c) * l.out + j;
      double gh = gout[j];
      if (k < kLayers - 1) {
        const double t = std::tanh(trace.h[k][j]);
        grads.factor[k][row] += gout[j] * l.df[row] * t;
        gh = gout[j] * (1.0 + l.f[row] * (1.0 - t * t));
      }
      grads.bias[k][row] += gh;
      for (int i = 0; i < l.in; ++i) {
        const size_t idx = row * l.in + i;
        grads.matrix[k][idx] += gh * trace.in[k][i] * l.dw[idx];
        gin[i] += gh * l.w[idx];
      }
    }
    std::copy(gin, gin + l.in, gout);
  }
  return gout[0];
}

// Bin mass from lower/upper logits. Flipping the sign so both sigmoid
// arguments sit in the left tail keeps far-tail masses accurate.
double MassFromLogits(double lower, double upper) {
  const double s = lower + upper > 0 ? -1.0 : 1.0;
  return std::abs(Sigmoid(s * upper) - Sigmoid(s * lower));
}

}  // namespace

template <typename T>
FactorizedPrior<T>::FactorizedPrior(const std::string& name, int channels, Rng& rng) : channels_(channels) {
  Require(channels >= 1, ErrorKind::kConfig, "factorized prior needs at least one channel");
  const double scale = std::pow(kInitScale, 1.0 / kLayers);
  for (int k = 0; k < kLayers; ++k) {
    const int in = kWidths[k];
    const int out = kWidths[k + 1];
    const double init = std::log(std::expm1(1.0 / scale / out));
    matrices_[k].name = name + ".matrix" + std::to_string(k);
    matrices_[k].value = nn::Tensor<T>(nn::Shape{channels, out, in, 1}, static_cast<T>(init));
    biases_[k].name = name + ".bias" + std::to_string(k);
    biases_[k].value = nn::Tensor<T>(nn::Shape{channels, out, 1, 1});
    for (size_t i = 0; i < biases_[k].value.size(); ++i) biases_[k].value[i] = static_cast<T>(rng.Uniform(-0.5, 0.5));
    if (k < kLayers - 1) {
      factors_[k].name = name + ".factor" + std::to_string(k);
      factors_[k].value = nn::Tensor<T>(nn::Shape{channels, out, 1, 1});
    }
  }
}

template <typename T>
void FactorizedPrior<T>::Collect(std::vector<nn::Parameter<T>*>& out) {
  for (int k = 0; k < kLayers; ++k) {
    out.push_back(&matrices_[k]);
    out.push_back(&biases_[k]);
    if (k < kLayers - 1) out.push_back(&factors_[k]);
  }
}

template <typename T>
double FactorizedPrior<T>::Logit(int channel, double x) const {
  Require(channel >= 0 && channel < channels_, ErrorKind::kShape, "prior channel out of range");
  return Forward(Snapshot(matrices_, biases_, factors_), channel, x, nullptr);
}

template <typename T>
double FactorizedPrior<T>::BinMass(int channel, double x) const {
  Require(channel >= 0 && channel < channels_, ErrorKind::kShape, "prior channel out of range");
  const Layers layers = Snapshot(matrices_, biases_, factors_);
  return MassFromLogits(Forward(layers, channel, x - 0.5, nullptr), Forward(layers, channel, x + 0.5, nullptr));
}

template <typename T>
nn::Var<T> FactorizedPrior<T>::Likelihood(const nn::Var<T>& z, T floor) {
  const nn::Shape& shape = z->shape();
  Require(shape.c == channels_, ErrorKind::kShape,
          "prior expects " + std::to_string(channels_) + " channels, got " + shape.ToString());
  auto layers = std::make_shared<Layers>(Snapshot(matrices_, biases_, factors_));
  nn::Tensor<T> out(shape);
  const size_t plane = shape.plane();
  for (size_t idx = 0; idx < out.size(); ++idx) {
    const int c = static_cast<int>((idx / plane) % shape.c);
    const double x = z->value[idx];
    const double p = MassFromLogits(Forward(*layers, c, x - 0.5, nullptr), Forward(*layers, c, x + 0.5, nullptr));
    out[idx] = static_cast<T>(std::max(p, static_cast<double>(floor)));
  }
  return nn::MakeNode<T>(std::move(out), {z}, true, [this, layers, floor, plane](nn::Node<T>& node) {
    const nn::Var<T>& zin = node.inputs[0];
    const nn::Shape& s = zin->shape();
    Grads grads(*layers);
    for (size_t idx = 0; idx < node.grad.size(); ++idx) {
      if (node.value[idx] <= floor) continue;
      const int c = static_cast<int>((idx / plane) % s.c);
      const double x = zin->value[idx];
      Trace lower_trace, upper_trace;
      const double lower = Forward(*layers, c, x - 0.5, &lower_trace);
      const double upper = Forward(*layers, c, x + 0.5, &upper_trace);
      const double g = node.grad[idx];
      // Both logits are non-decreasing in x, so upper >= lower and
      // p = sigmoid(upper) - sigmoid(lower) in either sign branch.
      const double dx = BackwardScalar(*layers, c, upper_trace, g * SigmoidDerivative(upper), grads) +
                        BackwardScalar(*layers, c, lower_trace, -g * SigmoidDerivative(lower), grads);
      if (zin->requires_grad) zin->Grad()[idx] += static_cast<T>(dx);
    }
    for (int k = 0; k < kLayers; ++k) {
      auto accumulate = [](nn::Parameter<T>& p, const std::vector<double>& g) {
        if (p.frozen) return;
        nn::Tensor<T>& dst = p.Grad();
        for (size_t i = 0; i < g.size(); ++i) dst[i] += static_cast<T>(g[i]);
      };
      accumulate(matrices_[k], grads.matrix[k]);
      accumulate(biases_[k], grads.bias[k]);
      if (k < kLayers - 1) accumulate(factors_[k], grads.factor[k]);
    }
  });
}

template <typename T>
codec::BoundedTable FactorizedPrior<T>::BuildTable(int channel, int levels) const {
  Require(channel >= 0 && channel < channels_, ErrorKind::kShape, "prior channel out of range");
  Require(levels >= 1, ErrorKind::kConfig, "symbol levels must be positive");
  const Layers layers = Snapshot(matrices_, biases_, factors_);
  auto logit = [&](double x) { return Forward(layers, channel, x, nullptr); };
  int lo = -1;
  while (lo > -levels && Sigmoid(logit(lo - 0.5)) >= kTailMass) --lo;
  int hi = 1;
  while (hi < levels && Sigmoid(-logit(hi + 0.5)) >= kTailMass) ++hi;
  std::vector<double> p(hi - lo + 1);
  p.front() = Sigmoid(logit(lo + 0.5));
  p.back() = Sigmoid(-logit(hi - 0.5));
  for (int s = lo + 1; s < hi; ++s) p[s - lo] = MassFromLogits(logit(s - 0.5), logit(s + 0.5));
  return codec::BoundedTable{QuantizeToCdf(p), lo};
}

template class FactorizedPrior<float>;
template class FactorizedPrior<double>;

}  // namespace selic::entropy
