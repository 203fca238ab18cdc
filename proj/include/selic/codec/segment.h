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
#ifndef SELIC_CODEC_SEGMENT_H_
#define SELIC_CODEC_SEGMENT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "selic/codec/coder_backend.h"
#include "selic/codec/rans.h"

namespace selic::codec {

// Coding table over the integer range [lo, hi], hi = lo + alphabet - 1.
struct BoundedTable {
  CdfTable cdf;
  int32_t lo = 0;

  int32_t hi() const { return lo + cdf.alphabet_size() - 1; }
};

// A segment codes integer values in [-levels, levels] against bounded
// tables. A value at or past a table extreme that lies strictly inside
// [-levels, levels] codes the extreme, and its excess (distance beyond the
// extreme) is coded under a uniform table sized to the remaining range in a
// second rANS stream appended after the first. The second stream is omitted
// when nothing escapes.
struct SegmentStats {
  size_t escapes = 0;
};

std::vector<uint8_t> EncodeSegment(std::span<const int32_t> values, std::span<const BoundedTable* const> tables,
                                   int levels, EntropyCoder& coder, SegmentStats* stats = nullptr);

// Decodes tables.size() values; every byte of the segment must be used.
std::vector<int32_t> DecodeSegment(std::span<const uint8_t> bytes, std::span<const BoundedTable* const> tables,
                                   int levels, EntropyCoder& coder);

}  // namespace selic::codec

#endif  // SELIC_CODEC_SEGMENT_H_
