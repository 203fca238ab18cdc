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
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "selic/core/error.h"
#include "selic/core/rng.h"
#include "selic/eval/metrics.h"

namespace selic::eval {
namespace {

namespace fs = std::filesystem;

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no selic::Error thrown";
  return ErrorKind::kInvalidInput;
}

ImagePlane From255(int h, int w, const std::function<int(int, int, int)>& f) {
  ImagePlane img(h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(c, y, x) = static_cast<float>(f(c, y, x)) / 255.0f;
  return img;
}

int Base(int c, int y, int x) { return ((x * 3 + y * 2 + 40 * c + (x * y) / 97) * 3 / 4) % 256; }

// Integer pattern pairs; reference scores come from pytorch_msssim 1.0
// (ms_ssim, data_range=255, float64 inputs and Gaussian window) on the
// same pixels. Its stock float32 window shifts scores by about 1e-6.
ImagePlane Perturbed(int k, int h = 192, int w = 256) {
  return From255(h, w, [k](int c, int y, int x) {
    return std::clamp(Base(c, y, x) + (x * 7 + y * 13 + c * 5) % k - k / 2, 0, 255);
  });
}

RdCurve Curve(std::string label, std::vector<std::pair<double, double>> pts) {
  RdCurve c{std::move(label), {}};
  for (auto [r, p] : pts) c.points.push_back({r, p});
  return c;
}

TEST(Psnr, KnownValues) {
  const ImagePlane a = From255(16, 16, [](int, int y, int x) { return (x * 16 + y) % 200; });
  EXPECT_EQ(Psnr(a, a), kInfinitePsnr);
  const ImagePlane b = From255(16, 16, [](int, int y, int x) { return (x * 16 + y) % 200 + 1; });
  EXPECT_NEAR(Psnr(a, b), 20 * std::log10(255.0), 1e-9);
  EXPECT_NEAR(Psnr(a, b), 48.1308, 1e-3);
  // Values snap to the 8-bit grid first, so sub-level noise is invisible.
  ImagePlane c = a;
  for (float& v : c.values()) v += 0.3f / 255.0f;
  EXPECT_EQ(Psnr(a, c), kInfinitePsnr);
  EXPECT_EQ(KindOf([&] { Psnr(a, ImagePlane(16, 17)); }), ErrorKind::kShape);
}

TEST(MsSsim, MatchesReferenceImplementation) {
  const ImagePlane a = From255(192, 256, Base);
  EXPECT_NEAR(MsSsim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(MsSsim(a, Perturbed(9)), 0.9977256222232902, 1e-9);
  EXPECT_NEAR(MsSsim(a, Perturbed(31)), 0.9772670901996402, 1e-9);
  EXPECT_NEAR(MsSsim(a, Perturbed(101)), 0.7633349860768771, 1e-9);
  EXPECT_NEAR(MsSsim(Perturbed(31), a), MsSsim(a, Perturbed(31)), 1e-12);
}

TEST(MsSsim, OddSizesPoolWithPadding) {
  const ImagePlane a = From255(161, 203, Base);
  EXPECT_NEAR(MsSsim(a, Perturbed(9, 161, 203)), 0.997572614579162, 1e-9);
  EXPECT_NEAR(MsSsim(a, Perturbed(101, 161, 203)), 0.752394751093933, 1e-9);
}

TEST(MsSsim, IndependentNoiseScoresLow) {
  Rng rng(5);
  const auto noise = [&rng](int, int, int) { return static_cast<int>(rng.Below(256)); };
  const ImagePlane a = From255(256, 256, noise);
  const ImagePlane b = From255(256, 256, noise);
  const double s = MsSsim(a, b);
  EXPECT_GE(s, 0.0);
  EXPECT_LT(s, 0.3);
}

TEST(MsSsim, RejectsSmallOrMismatchedImages) {
  EXPECT_EQ(KindOf([] { MsSsim(ImagePlane(160, 300), ImagePlane(160, 300)); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(KindOf([] { MsSsim(ImagePlane(200, 200), ImagePlane(200, 201)); }), ErrorKind::kShape);
  EXPECT_NO_THROW(MsSsim(ImagePlane(161, 161), ImagePlane(161, 161)));
}

TEST(BdRate, IdentityAndUniformScaling) {
  const RdCurve anchor = Curve("anchor", {{0.2, 29.1}, {0.4, 31.8}, {0.7, 34.2}, {1.1, 36.5}});
  EXPECT_NEAR(BdRate(anchor, anchor), 0.0, 1e-9);
  EXPECT_NEAR(BdPsnr(anchor, anchor), 0.0, 1e-9);
  for (double scale : {0.9, 1.25}) {
    RdCurve scaled = anchor;
    for (RdPoint& p : scaled.points) p.bpp *= scale;
    EXPECT_NEAR(BdRate(scaled, anchor), (scale - 1) * 100, 1e-6) << scale;
  }
  RdCurve shifted = anchor;
  for (RdPoint& p : shifted.points) p.psnr_db += 0.5;
  EXPECT_NEAR(BdPsnr(shifted, anchor), 0.5, 1e-9);
}

TEST(BdRate, MatchesReferenceImplementation) {
  // Reference: numpy polyfit/polyint Bjontegaard on the same points.
  const RdCurve anchor = Curve("anchor", {{0.2, 29.1}, {0.4, 31.8}, {0.7, 34.2}, {1.1, 36.5}});
  const RdCurve test = Curve("test", {{1.3, 37.9}, {0.18, 29.3}, {0.35, 31.9}, {0.66, 34.6}, {1.0, 36.6}});
  EXPECT_NEAR(BdRate(test, anchor), -13.880793539307735, 1e-8);
  EXPECT_NEAR(BdPsnr(test, anchor), 0.63624574206877, 1e-10);
  // Swapping roles inverts the rate ratio.
  const double forward = BdRate(test, anchor) / 100 + 1;
  const double backward = BdRate(anchor, test) / 100 + 1;
  EXPECT_NEAR(forward * backward, 1.0, 1e-9);
}

TEST(BdRate, RejectsDegenerateCurves) {
  const RdCurve anchor = Curve("anchor", {{0.2, 29.1}, {0.4, 31.8}, {0.7, 34.2}, {1.1, 36.5}});
  const RdCurve short_curve = Curve("short", {{0.2, 29.1}, {0.4, 31.8}, {0.7, 34.2}});
  EXPECT_EQ(KindOf([&] { BdRate(short_curve, anchor); }), ErrorKind::kInvalidInput);
  const RdCurve disjoint = Curve("far", {{2, 40}, {3, 41}, {4, 42}, {5, 43}});
  EXPECT_EQ(KindOf([&] { BdRate(disjoint, anchor); }), ErrorKind::kInvalidInput);
  const RdCurve bad = Curve("bad", {{0, 29}, {0.4, 31.8}, {0.7, 34.2}, {1.1, 36.5}});
  EXPECT_EQ(KindOf([&] { BdRate(bad, anchor); }), ErrorKind::kInvalidInput);
}

TEST(RdCsv, RoundTripAndSvg) {
  const fs::path path = fs::temp_directory_path() / ("selic-rd-" + std::to_string(::getpid()) + ".csv");
  RdCurve a = Curve("selic", {{0.25, 30.5}, {0.5, 33.25}});
  a.points[0].ms_ssim = 0.95;
  const RdCurve b = Curve("anchor <x>", {{0.3, kInfinitePsnr}});
  WriteRdCsv(path, {a, b});
  const std::vector<RdCurve> back = ReadRdCsv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].label, "selic");
  ASSERT_EQ(back[0].points.size(), 2u);
  EXPECT_EQ(back[0].points[1].psnr_db, 33.25);
  EXPECT_EQ(back[0].points[0].ms_ssim, 0.95);
  EXPECT_TRUE(std::isnan(back[0].points[1].ms_ssim));
  EXPECT_EQ(back[1].points[0].psnr_db, kInfinitePsnr);
  const std::string svg = RdPlotSvg(back, "R&D");
  EXPECT_NE(svg.find("R&amp;D"), std::string::npos);
  EXPECT_NE(svg.find("anchor &lt;x&gt;"), std::string::npos);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(KindOf([&] { WriteRdCsv(path, {Curve("a,b", {{1, 1}})}); }), ErrorKind::kInvalidInput);
  { std::ofstream(path) << "bpp,psnr\n1,2\n"; }
  EXPECT_EQ(KindOf([&] { ReadRdCsv(path); }), ErrorKind::kInvalidInput);
  fs::remove(path);
  EXPECT_EQ(KindOf([&] { ReadRdCsv(path); }), ErrorKind::kIo);
}

}  // namespace
}  // namespace selic::eval
