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
// Test-only shared library implementing the fast coder C ABI on top of the
// reference coder. ABI version is overridable at build time so the loader's
// version check can be exercised.

#include <cstring>
#include <vector>

#include "selic/codec/fast_coder_abi.h"
#include "selic/codec/rans.h"
#include "selic/core/error.h"

#ifndef FAKE_ABI_VERSION
#define FAKE_ABI_VERSION SELIC_FAST_CODER_ABI_VERSION
#endif

namespace {

bool BuildTables(const uint32_t* cdf, size_t cdf_len, const size_t* offsets, size_t n,
                 std::vector<selic::codec::CdfTable>& out) {
  out.clear();
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (offsets[i] >= offsets[i + 1] || offsets[i + 1] > cdf_len) return false;
    try {
      out.emplace_back(std::vector<uint32_t>(cdf + offsets[i], cdf + offsets[i + 1]));
    } catch (const selic::Error&) {
      return false;
    }
  }
  return true;
}

}  // namespace

extern "C" {

__attribute__((visibility("default"))) uint32_t selic_fast_coder_abi_version(void) { return FAKE_ABI_VERSION; }

__attribute__((visibility("default"))) int32_t selic_fast_rc_encode(const int32_t* symbols, size_t n,
                                                                    const uint32_t* cdf, size_t cdf_len,
                                                                    const size_t* offsets, uint8_t* out,
                                                                    size_t out_cap, size_t* out_len) {
  std::vector<selic::codec::CdfTable> tables;
  if (!BuildTables(cdf, cdf_len, offsets, n, tables)) return SELIC_CODER_INVALID_TABLE;
  std::vector<uint8_t> bytes;
  try {
    bytes = selic::codec::RcEncode(std::span<const int32_t>(symbols, n), tables);
  } catch (const selic::Error&) {
    return SELIC_CODER_SYMBOL_OUT_OF_RANGE;
  }
  *out_len = bytes.size();
  if (bytes.size() > out_cap) return SELIC_CODER_OUTPUT_TOO_SMALL;
  std::memcpy(out, bytes.data(), bytes.size());
  return SELIC_CODER_OK;
}

__attribute__((visibility("default"))) int32_t selic_fast_rc_decode(const uint8_t* in, size_t in_len,
                                                                    const uint32_t* cdf, size_t cdf_len,
                                                                    const size_t* offsets, size_t n,
                                                                    int32_t* symbols_out, size_t* consumed) {
  std::vector<selic::codec::CdfTable> tables;
  if (!BuildTables(cdf, cdf_len, offsets, n, tables)) return SELIC_CODER_INVALID_TABLE;
  std::vector<const selic::codec::CdfTable*> ptrs;
  for (const auto& t : tables) ptrs.push_back(&t);
  try {
    const auto result = selic::codec::RcDecodePrefix(std::span<const uint8_t>(in, in_len), ptrs, n);
    std::memcpy(symbols_out, result.symbols.data(), n * sizeof(int32_t));
    *consumed = result.consumed;
  } catch (const selic::Error&) {
    return SELIC_CODER_CORRUPT_STREAM;
  }
  return SELIC_CODER_OK;
}

}  // extern "C"
