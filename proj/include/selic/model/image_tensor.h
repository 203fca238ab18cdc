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
#ifndef SELIC_MODEL_IMAGE_TENSOR_H_
#define SELIC_MODEL_IMAGE_TENSOR_H_

#include <span>

#include "selic/core/image.h"
#include "selic/nn/tensor.h"

namespace selic::model {

// (1, 3, H, W); ImagePlane is already planar so this is a copy.
nn::Tensor<float> ImageToTensor(const ImagePlane& image);
// Sample n of an (N, 3, H, W) tensor.
ImagePlane TensorToImage(const nn::Tensor<float>& tensor, int n = 0);
// (1, D, 1, 1).
nn::Tensor<float> EmbeddingTensor(std::span<const float> embedding);

}  // namespace selic::model

#endif  // SELIC_MODEL_IMAGE_TENSOR_H_
