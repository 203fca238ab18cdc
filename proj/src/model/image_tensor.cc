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
#include "selic/model/image_tensor.h"

#include <algorithm>

#include "selic/core/error.h"

namespace selic::model {

nn::Tensor<float> ImageToTensor(const ImagePlane& image) {
  Require(!image.empty(), ErrorKind::kInvalidInput, "image is empty");
  nn::Tensor<float> t(nn::Shape{1, ImagePlane::kChannels, image.height(), image.width()});
  std::copy(image.values().begin(), image.values().end(), t.data());
  return t;
}

ImagePlane TensorToImage(const nn::Tensor<float>& tensor, int n) {
  const nn::Shape& s = tensor.shape();
  Require(s.c == ImagePlane::kChannels && n >= 0 && n < s.n, ErrorKind::kShape,
          "expected an RGB tensor, got " + s.ToString());
  ImagePlane image(s.h, s.w);
  std::copy(tensor.sample(n), tensor.sample(n) + s.sample(), image.values().begin());
  return image;
}

nn::Tensor<float> EmbeddingTensor(std::span<const float> embedding) {
  Require(!embedding.empty(), ErrorKind::kInvalidInput, "embedding is empty");
  nn::Tensor<float> t(nn::Shape{1, static_cast<int>(embedding.size()), 1, 1});
  std::copy(embedding.begin(), embedding.end(), t.data());
  return t;
}

}  // namespace selic::model
