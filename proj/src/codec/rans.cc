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
#include "selic/codec/rans.h"

#include <algorithm>
#include <string>

#include "selic/core/error.h"

namespace selic::codec {
namespace {

std::vector<const CdfTable*> Pointers(std::span<const CdfTable> tables) {
  std::vector<const CdfTable*> out(tables.size());
  for (size_t i = 0; i < tables.size(); ++i) out[i] = &tables[i];
  return out;
}

}  // namespace

CdfTable::CdfTable(std::vector<uint32_t> cumulative) : cumulative_(std::move(cumulative)) {
  Require(cumulative_.size() >= 2, ErrorKind::kInvalidInput, "CDF table needs at least one symbol");
  Require(cumulative_.front() == 0, ErrorKind::kInvalidInput, "CDF table must start at 0");
  Require(cumulative_.back() == kTotalFrequency, ErrorKind::kInvalidInput, "CDF table must end at 65536");
  for (size_t i = 1; i < cumulative_.size(); ++i) {
    Require(cumulative_[i] > cumulative_[i - 1], ErrorKind::kInvalidInput,
            "CDF table must be strictly increasing (zero-width bin at " + std::to_string(i - 1) + ")");
  }
}

CdfTable CdfTable::FromFrequencies(std::span<const uint32_t> frequencies) {
  std::vector<uint32_t> cumulative(frequencies.size() + 1, 0);
  for (size_t i = 0; i < frequencies.size(); ++i) cumulative[i + 1] = cumulative[i] + frequencies[i];
  return CdfTable(std::move(cumulative));
}

CdfTable CdfTable::Uniform(int alphabet_size) {
  Require(alphabet_size >= 1 && alphabet_size <= static_cast<int>(kTotalFrequency), ErrorKind::kInvalidInput,
          "uniform table size out of range");
  std::vector<uint32_t> cumulative(alphabet_size + 1);
  for (int i = 0; i <= alphabet_size; ++i) {
    cumulative[i] = static_cast<uint32_t>((static_cast<uint64_t>(i) * kTotalFrequency) / alphabet_size);
  }
  return CdfTable(std::move(cumulative));
}

int CdfTable::Lookup(uint32_t slot) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), slot);
  return static_cast<int>(it - cumulative_.begin()) - 1;
}

void RansEncoder::Push(int symbol, const CdfTable& table) {
  Require(symbol >= 0 && symbol < table.alphabet_size(), ErrorKind::kEncode,
          "symbol " + std::to_string(symbol) + " outside alphabet of size " + std::to_string(table.alphabet_size()));
  const uint64_t freq = table.frequency(symbol);
  uint64_t x = state_;
  // freq == 65536 makes the bound 2^64, which no state reaches.
  if (freq < kTotalFrequency && x >= (freq << (64 - kPrecisionBits))) {
    words_.push_back(static_cast<uint32_t>(x));
    x >>= 32;
  }
  state_ = ((x / freq) << kPrecisionBits) + (x % freq) + table.start(symbol);
}

std::vector<uint8_t> RansEncoder::Finish() const {
  std::vector<uint8_t> out;
  out.reserve(8 + 4 * words_.size());
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(state_ >> (8 * i)));
  for (auto it = words_.rbegin(); it != words_.rend(); ++it) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(*it >> (8 * i)));
  }
  return out;
}

RansDecoder::RansDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  Require(bytes.size() >= 8, ErrorKind::kDecode, "stream shorter than the 8-byte state");
  for (int i = 0; i < 8; ++i) state_ |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  position_ = 8;
}

int RansDecoder::Pop(const CdfTable& table) {
  const uint32_t slot = static_cast<uint32_t>(state_ & (kTotalFrequency - 1));
  const int symbol = table.Lookup(slot);
  state_ = table.frequency(symbol) * (state_ >> kPrecisionBits) + slot - table.start(symbol);
  if (state_ < kStateLowerBound) {
    Require(position_ + 4 <= bytes_.size(), ErrorKind::kDecode, "stream truncated");
    uint32_t word = 0;
    for (int i = 0; i < 4; ++i) word |= static_cast<uint32_t>(bytes_[position_ + i]) << (8 * i);
    position_ += 4;
    state_ = (state_ << 32) | word;
  }
  return symbol;
}

std::vector<uint8_t> RcEncode(std::span<const int32_t> symbols, std::span<const CdfTable* const> tables) {
  Require(symbols.size() == tables.size(), ErrorKind::kEncode, "one table per symbol required");
  RansEncoder encoder;
  for (size_t i = symbols.size(); i-- > 0;) encoder.Push(symbols[i], *tables[i]);
  return encoder.Finish();
}

std::vector<uint8_t> RcEncode(std::span<const int32_t> symbols, std::span<const CdfTable> tables) {
  const auto ptrs = Pointers(tables);
  return RcEncode(symbols, std::span<const CdfTable* const>(ptrs));
}

DecodeResult RcDecodePrefix(std::span<const uint8_t> bytes, std::span<const CdfTable* const> tables, size_t count) {
  Require(tables.size() >= count, ErrorKind::kDecode, "one table per symbol required");
  RansDecoder decoder(bytes);
  DecodeResult result;
  result.symbols.resize(count);
  for (size_t i = 0; i < count; ++i) result.symbols[i] = decoder.Pop(*tables[i]);
  Require(decoder.at_initial_state(), ErrorKind::kDecode, "stream corrupt: final state mismatch");
  result.consumed = decoder.consumed();
  return result;
}

std::vector<int32_t> RcDecode(std::span<const uint8_t> bytes, std::span<const CdfTable* const> tables, size_t count) {
  DecodeResult result = RcDecodePrefix(bytes, tables, count);
  Require(result.consumed == bytes.size(), ErrorKind::kDecode, "stream corrupt: trailing bytes");
  return std::move(result.symbols);
}

std::vector<int32_t> RcDecode(std::span<const uint8_t> bytes, std::span<const CdfTable> tables, size_t count) {
  const auto ptrs = Pointers(tables);
  return RcDecode(bytes, std::span<const CdfTable* const>(ptrs), count);
}

}  // namespace selic::codec
