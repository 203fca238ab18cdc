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
#ifndef SELIC_EVAL_METRICS_H_
#define SELIC_EVAL_METRICS_H_

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "selic/core/image.h"

namespace selic::eval {

// Returned by Psnr for identical images and written as "inf".
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

// 10 log10(255^2 / MSE) over all channels, after quantizing both images to
// 8 bits. kShape on mismatched dimensions.
double Psnr(const ImagePlane& a, const ImagePlane& b);

// Smallest side MsSsim accepts: the 11-tap window must fit the fifth scale.
inline constexpr int kMsSsimMinSide = 161;

// Five-scale MS-SSIM on the 8-bit quantized images: Gaussian window 11,
// sigma 1.5, K1 0.01, K2 0.03, valid filtering, 2x2 average pooling between
// scales, averaged over the RGB channels. Negative per-scale terms are
// clamped to zero. kInvalidInput for sides below kMsSsimMinSide.
double MsSsim(const ImagePlane& a, const ImagePlane& b);

struct RdPoint {
  double bpp = 0;
  double psnr_db = 0;
  // NaN when not measured (anchor curves often carry PSNR only).
  double ms_ssim = std::numeric_limits<double>::quiet_NaN();
};

struct RdCurve {
  std::string label;
  std::vector<RdPoint> points;
};

// Sorts by bpp and checks bpp > 0 and strictly increasing.
void NormalizeCurve(RdCurve& curve);

// Bjontegaard delta rate in percent: cubic least-squares fits of log10(bpp)
// against PSNR, integrated over the overlapping PSNR interval. Negative
// means the test curve needs fewer bits. kInvalidInput for fewer than four
// points or no PSNR overlap.
double BdRate(const RdCurve& test, const RdCurve& anchor);

// Same fits with the axes swapped: mean PSNR gain of test over anchor in
// dB across the overlapping log-rate interval.
double BdPsnr(const RdCurve& test, const RdCurve& anchor);

// RD CSV, version 1:
//   # selic rd-curve v1
//   label,bpp,psnr_db,ms_ssim
// One row per point; ms_ssim may be empty. psnr_db may be "inf".
std::vector<RdCurve> ReadRdCsv(const std::filesystem::path& path);
void WriteRdCsv(const std::filesystem::path& path, const std::vector<RdCurve>& curves);

// Static PSNR-vs-bpp plot of the curves.
std::string RdPlotSvg(const std::vector<RdCurve>& curves, const std::string& title);

// "inf" for kInfinitePsnr, fixed precision otherwise.
std::string FormatMetric(double value, int precision = 4);

}  // namespace selic::eval

#endif  // SELIC_EVAL_METRICS_H_
