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
#include "selic/core/image.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "selic/core/error.h"

namespace selic {
namespace {

uint8_t ToByte(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(clamped * 255.0f));
}

}  // namespace

ImagePlane::ImagePlane(int height, int width, float fill) : height_(height), width_(width) {
  Require(height >= 0 && width >= 0, ErrorKind::kInvalidInput, "negative image dimensions");
  data_.assign(static_cast<size_t>(kChannels) * height * width, fill);
}

void ImagePlane::Clamp() {
  for (float& v : data_) v = std::clamp(v, 0.0f, 1.0f);
}

std::vector<uint8_t> ImagePlane::ToInterleaved8() const {
  std::vector<uint8_t> out(data_.size());
  const size_t n = plane_size();
  for (size_t i = 0; i < n; ++i) {
    for (int c = 0; c < kChannels; ++c) out[i * kChannels + c] = ToByte(data_[c * n + i]);
  }
  return out;
}

ImagePlane ImagePlane::FromInterleaved8(int height, int width, std::span<const uint8_t> rgb) {
  ImagePlane image(height, width);
  const size_t n = image.plane_size();
  Require(rgb.size() == n * kChannels, ErrorKind::kInvalidInput, "RGB buffer size mismatch");
  for (size_t i = 0; i < n; ++i) {
    for (int c = 0; c < kChannels; ++c) image.data_[c * n + i] = rgb[i * kChannels + c] / 255.0f;
  }
  return image;
}

ImagePlane ImagePlane::Quantized8() const {
  ImagePlane out = *this;
  for (float& v : out.data_) v = ToByte(v) / 255.0f;
  return out;
}

PaddedImage PadToMultiple(const ImagePlane& image, int multiple) {
  Require(multiple >= 1, ErrorKind::kInvalidInput, "padding multiple must be >= 1");
  Require(!image.empty(), ErrorKind::kInvalidInput, "cannot pad an empty image");
  const int h = image.height();
  const int w = image.width();
  const int ph = (h + multiple - 1) / multiple * multiple;
  const int pw = (w + multiple - 1) / multiple * multiple;
  ImagePlane out(ph, pw);
  for (int c = 0; c < ImagePlane::kChannels; ++c) {
    for (int y = 0; y < ph; ++y) {
      const int sy = std::min(y, h - 1);
      for (int x = 0; x < pw; ++x) out.at(c, y, x) = image.at(c, sy, std::min(x, w - 1));
    }
  }
  return {std::move(out), image.dims()};
}

ImagePlane CropRegion(const ImagePlane& image, int top, int left, int height, int width) {
  Require(top >= 0 && left >= 0 && height >= 0 && width >= 0 && top + height <= image.height() &&
              left + width <= image.width(),
          ErrorKind::kInvalidInput,
          "crop region " + std::to_string(height) + "x" + std::to_string(width) + " outside image");
  ImagePlane out(height, width);
  for (int c = 0; c < ImagePlane::kChannels; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) out.at(c, y, x) = image.at(c, top + y, left + x);
    }
  }
  return out;
}

ImagePlane FlipHorizontal(const ImagePlane& image) {
  ImagePlane out(image.height(), image.width());
  const int w = image.width();
  for (int c = 0; c < ImagePlane::kChannels; ++c) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < w; ++x) out.at(c, y, x) = image.at(c, y, w - 1 - x);
    }
  }
  return out;
}

}  // namespace selic
