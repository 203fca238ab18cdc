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
#include "selic/nn/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "selic/core/error.h"

namespace selic::nn {
namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const MatRM<T>>;
template <typename T>
using MutMap = Eigen::Map<MatRM<T>>;
template <typename T>
using StridedMap = Eigen::Map<MatRM<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const MatRM<T>, 0, Eigen::OuterStride<>>;

// Column tiles bound the im2col scratch buffer to about this many elements.
constexpr size_t kTileElements = size_t{1} << 18;

struct ConvGeometry {
  int channels;  // channels of the image side
  int in_h, in_w;
  int kernel, stride, pad;
  int out_h, out_w;

  int rows() const { return channels * kernel * kernel; }
  int positions() const { return out_h * out_w; }
};

ConvGeometry MakeGeometry(int channels, int in_h, int in_w, int kernel, int stride) {
  const int pad = kernel / 2;
  return {channels, in_h, in_w, kernel, stride, pad, (in_h + 2 * pad - kernel) / stride + 1,
          (in_w + 2 * pad - kernel) / stride + 1};
}

int TileLength(const ConvGeometry& g) {
  const size_t per = static_cast<size_t>(g.rows());
  return static_cast<int>(std::clamp<size_t>(kTileElements / per, 64, static_cast<size_t>(g.positions())));
}

// cols is rows() x (p1 - p0), row-major; image is channels x in_h x in_w.
template <typename T>
void Im2Col(const T* image, const ConvGeometry& g, int p0, int p1, T* cols) {
  const int len = p1 - p0;
  for (int c = 0; c < g.channels; ++c) {
    const T* plane = image + static_cast<size_t>(c) * g.in_h * g.in_w;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        T* row = cols + (static_cast<size_t>((c * g.kernel + ky) * g.kernel + kx)) * len;
        int oy = p0 / g.out_w;
        int ox = p0 % g.out_w;
        for (int i = 0; i < len; ++i) {
          const int iy = oy * g.stride - g.pad + ky;
          const int ix = ox * g.stride - g.pad + kx;
          row[i] = (iy >= 0 && iy < g.in_h && ix >= 0 && ix < g.in_w) ? plane[iy * g.in_w + ix] : T(0);
          if (++ox == g.out_w) {
            ox = 0;
            ++oy;
          }
        }
      }
    }
  }
}

// Adjoint of Im2Col: accumulates cols back into image.
template <typename T>
void Col2Im(const T* cols, const ConvGeometry& g, int p0, int p1, T* image) {
  const int len = p1 - p0;
  for (int c = 0; c < g.channels; ++c) {
    T* plane = image + static_cast<size_t>(c) * g.in_h * g.in_w;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const T* row = cols + (static_cast<size_t>((c * g.kernel + ky) * g.kernel + kx)) * len;
        int oy = p0 / g.out_w;
        int ox = p0 % g.out_w;
        for (int i = 0; i < len; ++i) {
          const int iy = oy * g.stride - g.pad + ky;
          const int ix = ox * g.stride - g.pad + kx;
          if (iy >= 0 && iy < g.in_h && ix >= 0 && ix < g.in_w) plane[iy * g.in_w + ix] += row[i];
          if (++ox == g.out_w) {
            ox = 0;
            ++oy;
          }
        }
      }
    }
  }
}

template <typename T>
bool Trainable(const Parameter<T>& p) {
  return GradEnabled() && !p.frozen;
}

void CheckSameShape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) Fail(ErrorKind::kShape, std::string(op) + ": shape mismatch " + a.ToString() + " vs " + b.ToString());
}

}  // namespace

double NormalCdf(double t) { return 0.5 * std::erfc(-t * std::numbers::sqrt2 / 2.0); }

double NormalPdf(double t) { return std::exp(-0.5 * t * t) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2); }

template <typename T>
Var<T> Conv2d(const Var<T>& x, Parameter<T>& weight, Parameter<T>& bias, int stride) {
  const Shape& xs = x->shape();
  const Shape& ws = weight.value.shape();
  Require(ws.h == ws.w && ws.h % 2 == 1, ErrorKind::kShape, "conv kernel must be square and odd");
  Require(ws.c == xs.c, ErrorKind::kShape,
          "conv input has " + std::to_string(xs.c) + " channels, weight expects " + std::to_string(ws.c));
  Require(stride == 1 || stride == 2, ErrorKind::kShape, "conv stride must be 1 or 2");
  const ConvGeometry g = MakeGeometry(xs.c, xs.h, xs.w, ws.h, stride);
  const int cout = ws.n;
  const int rows = g.rows();
  const int positions = g.positions();
  const bool pointwise = ws.h == 1 && stride == 1;
  Tensor<T> out(Shape{xs.n, cout, g.out_h, g.out_w});
  ConstMap<T> w(weight.value.data(), cout, rows);
  const int tile = TileLength(g);
  std::vector<T> cols(pointwise ? 0 : static_cast<size_t>(rows) * tile);
  for (int n = 0; n < xs.n; ++n) {
    const T* src = x->value.sample(n);
    T* dst = out.sample(n);
    for (int p0 = 0; p0 < positions; p0 += tile) {
      const int p1 = std::min(positions, p0 + tile);
      StridedMap<T> y(dst + p0, cout, p1 - p0, Eigen::OuterStride<>(positions));
      if (pointwise) {
        y.noalias() = w * ConstStridedMap<T>(src + p0, rows, p1 - p0, Eigen::OuterStride<>(positions));
      } else {
        Im2Col(src, g, p0, p1, cols.data());
        y.noalias() = w * ConstMap<T>(cols.data(), rows, p1 - p0);
      }
    }
    for (int c = 0; c < cout; ++c) {
      T* plane = dst + static_cast<size_t>(c) * positions;
      const T b = bias.value[c];
      for (int i = 0; i < positions; ++i) plane[i] += b;
    }
  }
  Parameter<T>* wp = &weight;
  Parameter<T>* bp = &bias;
  return MakeNode<T>(std::move(out), {x}, Trainable(weight) || Trainable(bias),
                     [g, cout, rows, positions, pointwise, tile, wp, bp](Node<T>& node) {
                       const Var<T>& in = node.inputs[0];
                       const Shape& s = in->shape();
                       ConstMap<T> w(wp->value.data(), cout, rows);
                       std::vector<T> cols(pointwise ? 0 : static_cast<size_t>(rows) * tile);
                       std::vector<T> dcols(pointwise ? 0 : static_cast<size_t>(rows) * tile);
                       for (int n = 0; n < s.n; ++n) {
                         const T* src = in->value.sample(n);
                         const T* dy_all = node.grad.sample(n);
                         T* dx = in->requires_grad ? in->Grad().sample(n) : nullptr;
                         for (int p0 = 0; p0 < positions; p0 += tile) {
                           const int p1 = std::min(positions, p0 + tile);
                           const int len = p1 - p0;
                           ConstStridedMap<T> dy(dy_all + p0, cout, len, Eigen::OuterStride<>(positions));
                           if (pointwise) {
                             ConstStridedMap<T> c(src + p0, rows, len, Eigen::OuterStride<>(positions));
                             if (!wp->frozen) MutMap<T>(wp->Grad().data(), cout, rows).noalias() += dy * c.transpose();
                             if (dx) StridedMap<T>(dx + p0, rows, len, Eigen::OuterStride<>(positions)).noalias() +=
                                 w.transpose() * dy;
                           } else {
                             if (!wp->frozen) {
                               Im2Col(src, g, p0, p1, cols.data());
                               MutMap<T>(wp->Grad().data(), cout, rows).noalias() +=
                                   dy * ConstMap<T>(cols.data(), rows, len).transpose();
                             }
                             if (dx) {
                               MutMap<T>(dcols.data(), rows, len).noalias() = w.transpose() * dy;
                               Col2Im(dcols.data(), g, p0, p1, dx);
                             }
                           }
                         }
                         if (!bp->frozen) {
                           T* db = bp->Grad().data();
                           for (int c = 0; c < cout; ++c) {
                             const T* plane = dy_all + static_cast<size_t>(c) * positions;
                             T acc = 0;
                             for (int i = 0; i < positions; ++i) acc += plane[i];
                             db[c] += acc;
                           }
                         }
                       }
                     });
}

template <typename T>
Var<T> ConvTranspose2d(const Var<T>& x, Parameter<T>& weight, Parameter<T>& bias) {
  const Shape& xs = x->shape();
  const Shape& ws = weight.value.shape();
  Require(ws.h == 3 && ws.w == 3, ErrorKind::kShape, "transposed conv kernel must be 3x3");
  Require(ws.n == xs.c, ErrorKind::kShape,
          "transposed conv input has " + std::to_string(xs.c) + " channels, weight expects " + std::to_string(ws.n));
  const int cin = xs.c;
  const int cout = ws.c;
  // The adjoint of a stride-2 convolution from (cout, 2H, 2W) to (cin, H, W).
  const ConvGeometry g = MakeGeometry(cout, 2 * xs.h, 2 * xs.w, 3, 2);
  const int rows = g.rows();
  const int positions = g.positions();
  Tensor<T> out(Shape{xs.n, cout, g.in_h, g.in_w});
  ConstMap<T> w(weight.value.data(), cin, rows);
  const int tile = TileLength(g);
  std::vector<T> cols(static_cast<size_t>(rows) * tile);
  for (int n = 0; n < xs.n; ++n) {
    const T* src = x->value.sample(n);
    T* dst = out.sample(n);
    for (int p0 = 0; p0 < positions; p0 += tile) {
      const int p1 = std::min(positions, p0 + tile);
      MutMap<T>(cols.data(), rows, p1 - p0).noalias() =
          w.transpose() * ConstStridedMap<T>(src + p0, cin, p1 - p0, Eigen::OuterStride<>(positions));
      Col2Im(cols.data(), g, p0, p1, dst);
    }
    const size_t plane = static_cast<size_t>(g.in_h) * g.in_w;
    for (int c = 0; c < cout; ++c) {
      T* p = dst + c * plane;
      const T b = bias.value[c];
      for (size_t i = 0; i < plane; ++i) p[i] += b;
    }
  }
  Parameter<T>* wp = &weight;
  Parameter<T>* bp = &bias;
  return MakeNode<T>(std::move(out), {x}, Trainable(weight) || Trainable(bias),
                     [g, cin, cout, rows, positions, tile, wp, bp](Node<T>& node) {
                       const Var<T>& in = node.inputs[0];
                       const Shape& s = in->shape();
                       ConstMap<T> w(wp->value.data(), cin, rows);
                       std::vector<T> cols(static_cast<size_t>(rows) * tile);
                       const size_t plane = static_cast<size_t>(g.in_h) * g.in_w;
                       for (int n = 0; n < s.n; ++n) {
                         const T* src = in->value.sample(n);
                         const T* dy = node.grad.sample(n);
                         T* dx = in->requires_grad ? in->Grad().sample(n) : nullptr;
                         for (int p0 = 0; p0 < positions; p0 += tile) {
                           const int p1 = std::min(positions, p0 + tile);
                           const int len = p1 - p0;
                           Im2Col(dy, g, p0, p1, cols.data());
                           ConstMap<T> c(cols.data(), rows, len);
                           if (dx) StridedMap<T>(dx + p0, cin, len, Eigen::OuterStride<>(positions)).noalias() += w * c;
                           if (!wp->frozen) {
                             MutMap<T>(wp->Grad().data(), cin, rows).noalias() +=
                                 ConstStridedMap<T>(src + p0, cin, len, Eigen::OuterStride<>(positions)) * c.transpose();
                           }
                         }
                         if (!bp->frozen) {
                           T* db = bp->Grad().data();
                           for (int c = 0; c < cout; ++c) {
                             const T* p = dy + c * plane;
                             T acc = 0;
                             for (size_t i = 0; i < plane; ++i) acc += p[i];
                             db[c] += acc;
                           }
                         }
                       }
                     });
}

template <typename T>
Var<T> Linear(const Var<T>& x, Parameter<T>& weight, Parameter<T>& bias) {
  const Shape& xs = x->shape();
  const Shape& ws = weight.value.shape();
  Require(xs.h == 1 && xs.w == 1, ErrorKind::kShape, "linear input must be (N, D, 1, 1)");
  Require(ws.c == xs.c, ErrorKind::kShape,
          "linear input has width " + std::to_string(xs.c) + ", weight expects " + std::to_string(ws.c));
  const int in_dim = xs.c;
  const int out_dim = ws.n;
  Tensor<T> out(Shape{xs.n, out_dim, 1, 1});
  ConstMap<T> w(weight.value.data(), out_dim, in_dim);
  MutMap<T> y(out.data(), xs.n, out_dim);
  y.noalias() = ConstMap<T>(x->value.data(), xs.n, in_dim) * w.transpose();
  for (int n = 0; n < xs.n; ++n) {
    for (int o = 0; o < out_dim; ++o) y(n, o) += bias.value[o];
  }
  Parameter<T>* wp = &weight;
  Parameter<T>* bp = &bias;
  return MakeNode<T>(std::move(out), {x}, Trainable(weight) || Trainable(bias),
                     [in_dim, out_dim, wp, bp](Node<T>& node) {
                       const Var<T>& in = node.inputs[0];
                       const int batch = in->shape().n;
                       ConstMap<T> dy(node.grad.data(), batch, out_dim);
                       if (!wp->frozen) {
                         MutMap<T>(wp->Grad().data(), out_dim, in_dim).noalias() +=
                             dy.transpose() * ConstMap<T>(in->value.data(), batch, in_dim);
                       }
                       if (!bp->frozen) {
                         T* db = bp->Grad().data();
                         for (int n = 0; n < batch; ++n) {
                           for (int o = 0; o < out_dim; ++o) db[o] += dy(n, o);
                         }
                       }
                       if (in->requires_grad) {
                         MutMap<T>(in->Grad().data(), batch, in_dim).noalias() +=
                             dy * ConstMap<T>(wp->value.data(), out_dim, in_dim);
                       }
                     });
}

template <typename T>
Var<T> LeakyRelu(const Var<T>& x, T slope) {
  Tensor<T> out(x->shape());
  const T* src = x->value.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = src[i] > T(0) ? src[i] : slope * src[i];
  return MakeNode<T>(std::move(out), {x}, false, [slope](Node<T>& node) {
    const Var<T>& in = node.inputs[0];
    T* dx = in->Grad().data();
    const T* v = in->value.data();
    for (size_t i = 0; i < node.grad.size(); ++i) dx[i] += v[i] > T(0) ? node.grad[i] : slope * node.grad[i];
  });
}

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b) {
  CheckSameShape(a->shape(), b->shape(), "add");
  Tensor<T> out(a->shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
  return MakeNode<T>(std::move(out), {a, b}, false, [](Node<T>& node) {
    for (const auto& in : node.inputs) {
      if (!in->requires_grad) continue;
      T* d = in->Grad().data();
      for (size_t i = 0; i < node.grad.size(); ++i) d[i] += node.grad[i];
    }
  });
}

template <typename T>
Var<T> Mul(const Var<T>& a, const Var<T>& b) {
  CheckSameShape(a->shape(), b->shape(), "mul");
  Tensor<T> out(a->shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
  return MakeNode<T>(std::move(out), {a, b}, false, [](Node<T>& node) {
    const Var<T>& a = node.inputs[0];
    const Var<T>& b = node.inputs[1];
    if (a->requires_grad) {
      T* d = a->Grad().data();
      for (size_t i = 0; i < node.grad.size(); ++i) d[i] += node.grad[i] * b->value[i];
    }
    if (b->requires_grad) {
      T* d = b->Grad().data();
      for (size_t i = 0; i < node.grad.size(); ++i) d[i] += node.grad[i] * a->value[i];
    }
  });
}

template <typename T>
Var<T> AddConstant(const Var<T>& x, const Tensor<T>& c) {
  CheckSameShape(x->shape(), c.shape(), "add-constant");
  Tensor<T> out(x->shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] + c[i];
  return MakeNode<T>(std::move(out), {x}, false, [](Node<T>& node) {
    T* d = node.inputs[0]->Grad().data();
    for (size_t i = 0; i < node.grad.size(); ++i) d[i] += node.grad[i];
  });
}

template <typename T>
Var<T> Scale(const Var<T>& x, T factor) {
  Tensor<T> out(x->shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] * factor;
  return MakeNode<T>(std::move(out), {x}, false, [factor](Node<T>& node) {
    T* d = node.inputs[0]->Grad().data();
    for (size_t i = 0; i < node.grad.size(); ++i) d[i] += node.grad[i] * factor;
  });
}

template <typename T>
Var<T> BroadcastSpatial(const Var<T>& v, int h, int w) {
  const Shape& vs = v->shape();
  Require(vs.h == 1 && vs.w == 1, ErrorKind::kShape, "broadcast input must be (N, C, 1, 1)");
  Require(h >= 1 && w >= 1, ErrorKind::kShape, "broadcast target must be at least 1x1");
  Tensor<T> out(Shape{vs.n, vs.c, h, w});
  const size_t plane = static_cast<size_t>(h) * w;
  for (int n = 0; n < vs.n; ++n) {
    for (int c = 0; c < vs.c; ++c) {
      T* dst = out.sample(n) + c * plane;
      std::fill(dst, dst + plane, v->value.at(n, c, 0, 0));
    }
  }
  return MakeNode<T>(std::move(out), {v}, false, [plane](Node<T>& node) {
    const Var<T>& in = node.inputs[0];
    const Shape& s = in->shape();
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const T* g = node.grad.sample(n) + c * plane;
        T acc = 0;
        for (size_t i = 0; i < plane; ++i) acc += g[i];
        in->Grad().at(n, c, 0, 0) += acc;
      }
    }
  });
}

template <typename T>
Var<T> ConcatChannels(std::span<const Var<T>> parts) {
  Require(!parts.empty(), ErrorKind::kShape, "concat of zero tensors");
  const Shape& first = parts[0]->shape();
  int channels = 0;
  for (const auto& p : parts) {
    const Shape& s = p->shape();
    Require(s.n == first.n && s.h == first.h && s.w == first.w, ErrorKind::kShape,
            "concat: incompatible shapes " + first.ToString() + " and " + s.ToString());
    channels += s.c;
  }
  Tensor<T> out(Shape{first.n, channels, first.h, first.w});
  const size_t plane = first.plane();
  for (int n = 0; n < first.n; ++n) {
    T* dst = out.sample(n);
    for (const auto& p : parts) {
      const size_t count = p->shape().c * plane;
      std::copy_n(p->value.sample(n), count, dst);
      dst += count;
    }
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return MakeNode<T>(std::move(out), std::move(inputs), false, [plane](Node<T>& node) {
    for (int n = 0; n < node.shape().n; ++n) {
      const T* src = node.grad.sample(n);
      for (const auto& in : node.inputs) {
        const size_t count = in->shape().c * plane;
        if (in->requires_grad) {
          T* d = in->Grad().sample(n);
          for (size_t i = 0; i < count; ++i) d[i] += src[i];
        }
        src += count;
      }
    }
  });
}

template <typename T>
Var<T> SliceChannels(const Var<T>& x, int begin, int end) {
  const Shape& xs = x->shape();
  Require(0 <= begin && begin < end && end <= xs.c, ErrorKind::kShape,
          "channel slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " +
              xs.ToString());
  Tensor<T> out(Shape{xs.n, end - begin, xs.h, xs.w});
  const size_t plane = xs.plane();
  for (int n = 0; n < xs.n; ++n) {
    std::copy_n(x->value.sample(n) + begin * plane, (end - begin) * plane, out.sample(n));
  }
  return MakeNode<T>(std::move(out), {x}, false, [begin, plane](Node<T>& node) {
    const Var<T>& in = node.inputs[0];
    const size_t count = node.shape().sample();
    for (int n = 0; n < node.shape().n; ++n) {
      T* d = in->Grad().sample(n) + begin * plane;
      const T* g = node.grad.sample(n);
      for (size_t i = 0; i < count; ++i) d[i] += g[i];
    }
  });
}

template <typename T>
Var<T> Softplus(const Var<T>& x) {
  Tensor<T> out(x->shape());
  for (size_t i = 0; i < out.size(); ++i) {
    const T v = x->value[i];
    out[i] = v > T(0) ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
  }
  return MakeNode<T>(std::move(out), {x}, false, [](Node<T>& node) {
    const Var<T>& in = node.inputs[0];
    T* d = in->Grad().data();
    for (size_t i = 0; i < node.grad.size(); ++i) {
      const T v = in->value[i];
      const T sig = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
      d[i] += node.grad[i] * sig;
    }
  });
}

template <typename T>
Var<T> LowerBound(const Var<T>& x, T bound) {
  Tensor<T> out(x->shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::max(x->value[i], bound);
  return MakeNode<T>(std::move(out), {x}, false, [bound](Node<T>& node) {
    const Var<T>& in = node.inputs[0];
    T* d = in->Grad().data();
    for (size_t i = 0; i < node.grad.size(); ++i) {
      if (in->value[i] > bound) d[i] += node.grad[i];
    }
  });
}

template <typename T>
Var<T> DiscretizedGaussianLikelihood(const Var<T>& v, const Var<T>& mu, const Var<T>& sigma, T floor) {
  CheckSameShape(v->shape(), mu->shape(), "likelihood");
  CheckSameShape(v->shape(), sigma->shape(), "likelihood");
  Tensor<T> out(v->shape());
  for (size_t i = 0; i < out.size(); ++i) {
    // |v - mu| keeps both CDF arguments in the accurate left tail.
    const double a = std::abs(static_cast<double>(v->value[i]) - mu->value[i]);
    const double s = sigma->value[i];
    const double p = NormalCdf((0.5 - a) / s) - NormalCdf((-0.5 - a) / s);
    out[i] = static_cast<T>(std::max(p, static_cast<double>(floor)));
  }
  return MakeNode<T>(std::move(out), {v, mu, sigma}, false, [floor](Node<T>& node) {
    const Var<T>& v = node.inputs[0];
    const Var<T>& mu = node.inputs[1];
    const Var<T>& sigma = node.inputs[2];
    for (size_t i = 0; i < node.grad.size(); ++i) {
      if (node.value[i] <= floor) continue;
      const double diff = static_cast<double>(v->value[i]) - mu->value[i];
      const double a = std::abs(diff);
      const double s = sigma->value[i];
      const double tu = (0.5 - a) / s;
      const double tl = (-0.5 - a) / s;
      const double pu = NormalPdf(tu);
      const double pl = NormalPdf(tl);
      const double g = node.grad[i];
      const double dp_da = (pl - pu) / s;
      const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
      if (v->requires_grad) v->Grad()[i] += static_cast<T>(g * dp_da * sign);
      if (mu->requires_grad) mu->Grad()[i] -= static_cast<T>(g * dp_da * sign);
      if (sigma->requires_grad) sigma->Grad()[i] += static_cast<T>(g * (tl * pl - tu * pu) / s);
    }
  });
}

template <typename T>
Var<T> SumNegLog2(const Var<T>& p) {
  double acc = 0;
  for (size_t i = 0; i < p->value.size(); ++i) acc -= std::log2(static_cast<double>(p->value[i]));
  Tensor<T> out(Shape{1, 1, 1, 1}, static_cast<T>(acc));
  return MakeNode<T>(std::move(out), {p}, false, [](Node<T>& node) {
    const Var<T>& in = node.inputs[0];
    const T g = node.grad[0];
    T* d = in->Grad().data();
    for (size_t i = 0; i < in->value.size(); ++i) {
      d[i] -= g / (in->value[i] * std::numbers::ln2_v<T>);
    }
  });
}

template <typename T>
Var<T> MeanSquaredError(const Var<T>& a, const Var<T>& b) {
  CheckSameShape(a->shape(), b->shape(), "mse");
  double acc = 0;
  for (size_t i = 0; i < a->value.size(); ++i) {
    const double d = static_cast<double>(a->value[i]) - b->value[i];
    acc += d * d;
  }
  const double count = static_cast<double>(a->value.size());
  Tensor<T> out(Shape{1, 1, 1, 1}, static_cast<T>(acc / count));
  return MakeNode<T>(std::move(out), {a, b}, false, [count](Node<T>& node) {
    const Var<T>& a = node.inputs[0];
    const Var<T>& b = node.inputs[1];
    const T scale = static_cast<T>(2.0 / count) * node.grad[0];
    for (size_t i = 0; i < a->value.size(); ++i) {
      const T d = (a->value[i] - b->value[i]) * scale;
      if (a->requires_grad) a->Grad()[i] += d;
      if (b->requires_grad) b->Grad()[i] -= d;
    }
  });
}

template <typename T>
Var<T> Sum(const Var<T>& x) {
  double acc = 0;
  for (size_t i = 0; i < x->value.size(); ++i) acc += x->value[i];
  Tensor<T> out(Shape{1, 1, 1, 1}, static_cast<T>(acc));
  return MakeNode<T>(std::move(out), {x}, false, [](Node<T>& node) {
    T* d = node.inputs[0]->Grad().data();
    for (size_t i = 0; i < node.inputs[0]->value.size(); ++i) d[i] += node.grad[0];
  });
}

#define SELIC_INSTANTIATE_OPS(T)                                                                  \
  template Var<T> Conv2d(const Var<T>&, Parameter<T>&, Parameter<T>&, int);                       \
  template Var<T> ConvTranspose2d(const Var<T>&, Parameter<T>&, Parameter<T>&);                   \
  template Var<T> Linear(const Var<T>&, Parameter<T>&, Parameter<T>&);                            \
  template Var<T> LeakyRelu(const Var<T>&, T);                                                    \
  template Var<T> Add(const Var<T>&, const Var<T>&);                                              \
  template Var<T> Mul(const Var<T>&, const Var<T>&);                                              \
  template Var<T> AddConstant(const Var<T>&, const Tensor<T>&);                                   \
  template Var<T> Scale(const Var<T>&, T);                                                        \
  template Var<T> BroadcastSpatial(const Var<T>&, int, int);                                      \
  template Var<T> ConcatChannels(std::span<const Var<T>>);                                        \
  template Var<T> SliceChannels(const Var<T>&, int, int);                                         \
  template Var<T> Softplus(const Var<T>&);                                                        \
  template Var<T> LowerBound(const Var<T>&, T);                                                   \
  template Var<T> DiscretizedGaussianLikelihood(const Var<T>&, const Var<T>&, const Var<T>&, T); \
  template Var<T> SumNegLog2(const Var<T>&);                                                      \
  template Var<T> MeanSquaredError(const Var<T>&, const Var<T>&);                                 \
  template Var<T> Sum(const Var<T>&);

SELIC_INSTANTIATE_OPS(float)
SELIC_INSTANTIATE_OPS(double)

}  // namespace selic::nn
