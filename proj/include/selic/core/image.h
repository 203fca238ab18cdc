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
#ifndef SELIC_CORE_IMAGE_H_
#define SELIC_CORE_IMAGE_H_

#include <cstdint>
#include <span>
#include <vector>

namespace selic {

struct Dims {
  int height = 0;
  int width = 0;

  bool operator==(const Dims&) const = default;
};

// Planar RGB image with values nominally in [0, 1].
class ImagePlane {
 public:
  static constexpr int kChannels = 3;

  ImagePlane() = default;
  ImagePlane(int height, int width, float fill = 0.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  Dims dims() const { return {height_, width_}; }
  bool empty() const { return height_ == 0 || width_ == 0; }
  size_t plane_size() const { return static_cast<size_t>(height_) * width_; }

  float& at(int c, int y, int x) { return data_[c * plane_size() + static_cast<size_t>(y) * width_ + x]; }
  float at(int c, int y, int x) const { return data_[c * plane_size() + static_cast<size_t>(y) * width_ + x]; }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  std::span<float> channel(int c) { return std::span<float>(data_).subspan(c * plane_size(), plane_size()); }
  std::span<const float> channel(int c) const {
    return std::span<const float>(data_).subspan(c * plane_size(), plane_size());
  }

  void Clamp();

  // Interleaved 8-bit RGB, rounding each clamped value to the nearest level.
  std::vector<uint8_t> ToInterleaved8() const;
  static ImagePlane FromInterleaved8(int height, int width, std::span<const uint8_t> rgb);
  // Snap to the 8-bit grid (what a PNG round trip would produce).
  ImagePlane Quantized8() const;

  bool operator==(const ImagePlane&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

struct PaddedImage {
  ImagePlane image;
  Dims original;
};

// Edge-replicating pad up to the next multiple of `multiple` in each
// dimension. Throws kInvalidInput for an empty image or multiple < 1.
PaddedImage PadToMultiple(const ImagePlane& image, int multiple);

ImagePlane CropRegion(const ImagePlane& image, int top, int left, int height, int width);
inline ImagePlane CropTo(const ImagePlane& image, Dims dims) {
  return CropRegion(image, 0, 0, dims.height, dims.width);
}
ImagePlane FlipHorizontal(const ImagePlane& image);

}  // namespace selic

#endif  // SELIC_CORE_IMAGE_H_
