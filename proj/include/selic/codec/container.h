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
#ifndef SELIC_CODEC_CONTAINER_H_
#define SELIC_CODEC_CONTAINER_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace selic::codec {

// .selic layout, all integers little-endian:
//   "SELC" | version u8 | config_id u8 | fusion_kind u8 |
//   orig_h u32 | orig_w u32 | padded_h u32 | padded_w u32 |
//   z_len u32 | slice_len u32 x num_slices | z payload | slice payloads
// num_slices is not stored; it comes from the model.
inline constexpr std::array<uint8_t, 4> kContainerMagic = {'S', 'E', 'L', 'C'};
inline constexpr uint8_t kContainerVersion = 1;
inline constexpr size_t kFixedHeaderBytes = 23;
// fusion_kind of a model without the semantic branch.
inline constexpr uint8_t kBaselineFusionKind = 3;
// config_id when lambda is not one of the presets.
inline constexpr uint8_t kOffGridConfigId = 0xFF;

struct Container {
  uint8_t version = kContainerVersion;
  uint8_t config_id = kOffGridConfigId;
  uint8_t fusion_kind = 0;
  uint32_t orig_h = 0;
  uint32_t orig_w = 0;
  uint32_t padded_h = 0;
  uint32_t padded_w = 0;
  std::vector<uint8_t> z_payload;
  std::vector<std::vector<uint8_t>> slice_payloads;

  size_t SerializedSize() const;
};

std::vector<uint8_t> SerializeContainer(const Container& container);

// kDecode on a bad magic or version, or when the lengths do not account for
// exactly every byte.
Container ParseContainer(std::span<const uint8_t> bytes, int num_slices);

}  // namespace selic::codec

#endif  // SELIC_CODEC_CONTAINER_H_
