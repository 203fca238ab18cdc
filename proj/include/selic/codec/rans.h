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
#ifndef SELIC_CODEC_RANS_H_
#define SELIC_CODEC_RANS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace selic::codec {

// Normative stream-ANS parameters. Any conforming implementation produces
// the same bytes for the same (symbols, tables).
//   state x: 64 bits, kept in [2^32, 2^64) between symbols
//   frequencies: 16-bit precision, cumulative totals sum to 65536
//   encode: symbols are consumed last-to-first; before coding s with
//     (start, freq), while x >= freq << 48 emit the low 32 bits of x and
//     shift x right by 32; then x = (x / freq) << 16 | (x % freq) + start
//   output: 8-byte final state (little-endian), then the emitted 32-bit
//     words (little-endian each) in reverse emission order
//   decode: slot = x & 0xffff, find s with start <= slot < start + freq,
//     x = freq * (x >> 16) + slot - start; if x < 2^32, x = x << 32 | next
//     32-bit word
// A completed decode ends with x == 2^32 and every byte consumed.
inline constexpr int kPrecisionBits = 16;
inline constexpr uint32_t kTotalFrequency = 1u << kPrecisionBits;
inline constexpr uint64_t kStateLowerBound = uint64_t{1} << 32;

class CdfTable {
 public:
  CdfTable() = default;
  // cumulative[0] == 0, cumulative.back() == 65536, strictly increasing.
  // Throws kInvalidInput otherwise.
  explicit CdfTable(std::vector<uint32_t> cumulative);

  static CdfTable FromFrequencies(std::span<const uint32_t> frequencies);
  // n symbols, cumulative[i] = floor(i * 65536 / n).
  static CdfTable Uniform(int alphabet_size);

  int alphabet_size() const { return static_cast<int>(cumulative_.size()) - 1; }
  uint32_t start(int symbol) const { return cumulative_[symbol]; }
  uint32_t frequency(int symbol) const { return cumulative_[symbol + 1] - cumulative_[symbol]; }
  std::span<const uint32_t> cumulative() const { return cumulative_; }
  // Symbol whose bin contains `slot` (slot < 65536).
  int Lookup(uint32_t slot) const;

  bool operator==(const CdfTable&) const = default;

 private:
  std::vector<uint32_t> cumulative_;
};

class RansEncoder {
 public:
  // Symbols must be pushed in REVERSE stream order.
  void Push(int symbol, const CdfTable& table);
  std::vector<uint8_t> Finish() const;

 private:
  uint64_t state_ = kStateLowerBound;
  std::vector<uint32_t> words_;
};

class RansDecoder {
 public:
  // Throws kDecode if fewer than 8 bytes are available.
  explicit RansDecoder(std::span<const uint8_t> bytes);

  int Pop(const CdfTable& table);
  size_t consumed() const { return position_; }
  // True when the state is back at its initial value.
  bool at_initial_state() const { return state_ == kStateLowerBound; }

 private:
  std::span<const uint8_t> bytes_;
  size_t position_ = 0;
  uint64_t state_ = 0;
};

std::vector<uint8_t> RcEncode(std::span<const int32_t> symbols, std::span<const CdfTable* const> tables);
std::vector<uint8_t> RcEncode(std::span<const int32_t> symbols, std::span<const CdfTable> tables);

struct DecodeResult {
  std::vector<int32_t> symbols;
  size_t consumed = 0;
};

// Decodes `count` symbols from the front of `bytes`, verifying that the
// state returns to its initial value. Trailing bytes are allowed and
// reported through `consumed`.
DecodeResult RcDecodePrefix(std::span<const uint8_t> bytes, std::span<const CdfTable* const> tables, size_t count);

// Exact inverse of RcEncode: additionally requires every byte be consumed.
std::vector<int32_t> RcDecode(std::span<const uint8_t> bytes, std::span<const CdfTable* const> tables, size_t count);
std::vector<int32_t> RcDecode(std::span<const uint8_t> bytes, std::span<const CdfTable> tables, size_t count);

}  // namespace selic::codec

#endif  // SELIC_CODEC_RANS_H_
