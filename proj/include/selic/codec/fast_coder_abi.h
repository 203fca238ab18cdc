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
/* C boundary for drop-in coder implementations (loaded with dlopen).
 *
 * Tables travel as one flat array of cumulative frequencies. offsets has
 * n + 1 entries and the table for symbol i is the half-open range
 * cdf[offsets[i], offsets[i + 1]): it starts with 0, ends with 65536, and
 * its alphabet size is offsets[i + 1] - offsets[i] - 1. Tables may not
 * overlap. Symbols are alphabet indices.
 *
 * The caller owns every buffer; implementations must not touch memory
 * outside the lengths passed in. Output bytes must be identical to the
 * reference coder (see selic/codec/rans.h).
 */
#ifndef SELIC_CODEC_FAST_CODER_ABI_H_
#define SELIC_CODEC_FAST_CODER_ABI_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SELIC_FAST_CODER_ABI_VERSION 1u

enum SelicCoderStatus {
  SELIC_CODER_OK = 0,
  SELIC_CODER_INVALID_TABLE = 1,
  SELIC_CODER_SYMBOL_OUT_OF_RANGE = 2,
  SELIC_CODER_OUTPUT_TOO_SMALL = 3,
  SELIC_CODER_CORRUPT_STREAM = 4,
};

/* Returns SELIC_FAST_CODER_ABI_VERSION of the implementation. */
typedef uint32_t (*SelicCoderAbiVersionFn)(void);

/* Encodes n symbols. On SELIC_CODER_OUTPUT_TOO_SMALL, *out_len holds the
 * required capacity. */
typedef int32_t (*SelicCoderEncodeFn)(const int32_t* symbols, size_t n, const uint32_t* cdf, size_t cdf_len,
                                      const size_t* offsets, uint8_t* out, size_t out_cap, size_t* out_len);

/* Decodes n symbols from the front of in; *consumed receives the number of
 * bytes read. The final-state check of the reference decoder applies. */
typedef int32_t (*SelicCoderDecodeFn)(const uint8_t* in, size_t in_len, const uint32_t* cdf, size_t cdf_len,
                                      const size_t* offsets, size_t n, int32_t* symbols_out, size_t* consumed);

#define SELIC_CODER_ABI_VERSION_SYMBOL "selic_fast_coder_abi_version"
#define SELIC_CODER_ENCODE_SYMBOL "selic_fast_rc_encode"
#define SELIC_CODER_DECODE_SYMBOL "selic_fast_rc_decode"

#ifdef __cplusplus
}
#endif

#endif /* SELIC_CODEC_FAST_CODER_ABI_H_ */
