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
#ifndef SELIC_MODEL_CHECKPOINT_H_
#define SELIC_MODEL_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>

#include "selic/core/config.h"
#include "selic/model/selic_model.h"
#include "selic/nn/tensor.h"

namespace selic::model {

// On-disk archive, all integers little-endian:
//   "SELICCKP" u32 version
//   u32 length, config document text
//   u32 count, then count x (u32 length, key, u32 length, value) metadata
//   u32 count, then count x (u32 length, name, 4 x i32 NCHW shape,
//                            numel x f32 values)
struct Checkpoint {
  ModelConfig config;
  std::map<std::string, std::string> metadata;
  std::map<std::string, nn::Tensor<float>> tensors;
};

inline constexpr uint32_t kCheckpointVersion = 1;

// Written to a temporary sibling and renamed into place.
void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// kIo for unreadable files, kModel for malformed contents.
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

// Parameters of `model` under their canonical names.
template <typename T>
Checkpoint ExportModel(SelicModel<T>& model);

// Copies every model parameter from the checkpoint. A missing name or a
// shape mismatch is a kModel error; extra tensors are ignored.
template <typename T>
void ImportModel(const Checkpoint& checkpoint, SelicModel<T>& model);

}  // namespace selic::model

#endif  // SELIC_MODEL_CHECKPOINT_H_
