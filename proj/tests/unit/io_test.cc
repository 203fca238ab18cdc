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
#include <jpeglib.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "selic/core/error.h"
#include "selic/core/rng.h"
#include "selic/io/image_io.h"

namespace selic::io {
namespace {

namespace fs = std::filesystem;

fs::path Tmp(const std::string& name) {
  return fs::temp_directory_path() / ("selic-io-" + std::to_string(::getpid()) + "-" + name);
}

ImagePlane Random8(int h, int w, uint64_t seed) {
  ImagePlane img(h, w);
  Rng rng(seed);
  for (float& v : img.values()) v = static_cast<float>(rng.Below(256)) / 255.0f;
  return img;
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

void WriteJpeg(const fs::path& path, const ImagePlane& img, int quality) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = img.width();
  cinfo.image_height = img.height();
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<uint8_t> rgb = img.ToInterleaved8();
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = rgb.data() + static_cast<size_t>(cinfo.next_scanline) * img.width() * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

TEST(ImageIo, PngRoundTripIsExact) {
  const ImagePlane img = Random8(37, 53, 1);
  const fs::path p = Tmp("a.png");
  WriteImage(p, img);
  EXPECT_EQ(ReadImage(p), img);
  fs::remove(p);
}

TEST(ImageIo, PpmRoundTripIsExact) {
  const ImagePlane img = Random8(5, 7, 2);
  const fs::path p = Tmp("a.ppm");
  WriteImage(p, img);
  std::ifstream in(p, std::ios::binary);
  std::string magic(2, ' ');
  in.read(magic.data(), 2);
  EXPECT_EQ(magic, "P6");
  EXPECT_EQ(fs::file_size(p), std::string("P6\n7 5\n255\n").size() + 5 * 7 * 3);
  EXPECT_EQ(ReadImage(p), img);
  fs::remove(p);
}

TEST(ImageIo, WriteQuantizesAndClamps) {
  ImagePlane img(2, 2, 0.5f);
  img.at(0, 0, 0) = -1.0f;
  img.at(1, 1, 1) = 2.0f;
  const fs::path p = Tmp("q.png");
  WriteImage(p, img);
  const ImagePlane back = ReadImage(p);
  EXPECT_EQ(back.at(0, 0, 0), 0.0f);
  EXPECT_EQ(back.at(1, 1, 1), 1.0f);
  EXPECT_EQ(back.at(2, 0, 1), 128.0f / 255.0f);
  fs::remove(p);
}

TEST(ImageIo, JpegDecodesCloseToSource) {
  ImagePlane img(32, 48);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 48; ++x) img.at(c, y, x) = static_cast<float>(x * 2 + y * 3 + c * 20) / 255.0f;
  img = img.Quantized8();
  // Signature detection, not the extension, picks the decoder.
  const fs::path p = Tmp("j.bin");
  WriteJpeg(p, img, 98);
  const ImagePlane back = ReadImage(p);
  ASSERT_EQ(back.dims(), img.dims());
  double err = 0;
  for (size_t i = 0; i < img.values().size(); ++i) err += std::abs(back.values()[i] - img.values()[i]);
  EXPECT_LT(err / img.values().size(), 4.0 / 255.0);
  fs::remove(p);
}

TEST(ImageIo, Errors) {
  EXPECT_EQ(KindOf([] { ReadImage(Tmp("missing.png")); }), ErrorKind::kIo);
  const fs::path junk = Tmp("junk.png");
  {
    std::ofstream(junk) << "not an image";
  }
  EXPECT_EQ(KindOf([&] { ReadImage(junk); }), ErrorKind::kIo);
  // Truncated PNG and PPM bodies.
  const fs::path png = Tmp("t.png");
  WriteImage(png, Random8(16, 16, 3));
  fs::resize_file(png, fs::file_size(png) / 2);
  EXPECT_EQ(KindOf([&] { ReadImage(png); }), ErrorKind::kIo);
  const fs::path ppm = Tmp("t.ppm");
  WriteImage(ppm, Random8(16, 16, 3));
  fs::resize_file(ppm, fs::file_size(ppm) - 1);
  EXPECT_EQ(KindOf([&] { ReadImage(ppm); }), ErrorKind::kIo);
  const fs::path jpg = Tmp("t.jpg");
  WriteJpeg(jpg, Random8(16, 16, 3), 90);
  fs::resize_file(jpg, 40);
  EXPECT_EQ(KindOf([&] { ReadImage(jpg); }), ErrorKind::kIo);
  EXPECT_EQ(KindOf([] { WriteImage(Tmp("e.png"), ImagePlane()); }), ErrorKind::kInvalidInput);
  for (const auto& p : {junk, png, ppm, jpg}) fs::remove(p);
}

TEST(ImageIo, Extensions) {
  EXPECT_TRUE(HasImageExtension("a/b.PNG"));
  EXPECT_TRUE(HasImageExtension("x.jpeg"));
  EXPECT_TRUE(HasImageExtension("x.JPG"));
  EXPECT_TRUE(HasImageExtension("x.ppm"));
  EXPECT_FALSE(HasImageExtension("x.txt"));
  EXPECT_FALSE(HasImageExtension("png"));
}

}  // namespace
}  // namespace selic::io
