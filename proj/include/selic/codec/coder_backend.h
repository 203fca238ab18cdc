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
#ifndef SELIC_CODEC_CODER_BACKEND_H_
#define SELIC_CODEC_CODER_BACKEND_H_

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "selic/codec/rans.h"

namespace selic::codec {

// Batch entropy coder. Implementations must be byte-identical to the
// reference coder in rans.h.
class EntropyCoder {
 public:
  virtual ~EntropyCoder() = default;

  virtual std::string name() const = 0;
  virtual std::vector<uint8_t> Encode(std::span<const int32_t> symbols, std::span<const CdfTable* const> tables) = 0;
  // Decodes out.size() symbols from the front of `bytes`; returns the
  // number of bytes consumed. Throws kDecode on corrupt or short input.
  virtual size_t Decode(std::span<const uint8_t> bytes, std::span<const CdfTable* const> tables,
                        std::span<int32_t> out) = 0;
};

class ReferenceCoder final : public EntropyCoder {
 public:
  std::string name() const override { return "reference"; }
  std::vector<uint8_t> Encode(std::span<const int32_t> symbols, std::span<const CdfTable* const> tables) override;
  size_t Decode(std::span<const uint8_t> bytes, std::span<const CdfTable* const> tables,
                std::span<int32_t> out) override;
};

// Tables flattened for the C boundary (see fast_coder_abi.h).
struct FlatTables {
  std::vector<uint32_t> cdf;
  std::vector<size_t> offsets;
};
FlatTables Flatten(std::span<const CdfTable* const> tables);

// Coder implemented by a shared library exporting the fast_coder_abi.h
// entry points. Throws kBackendUnavailable if the library cannot be loaded,
// lacks a symbol, or reports a different ABI version.
std::unique_ptr<EntropyCoder> LoadFastCoder(const std::filesystem::path& library);

// Library path used for coder.backend = fast: , else
// "libselic_fast_coder.so" resolved by the dynamic loader.
std::filesystem::path DefaultFastCoderLibrary();

// "reference" or "fast". Asking for fast when the library is missing is a
// kBackendUnavailable error, never a silent fallback.
std::unique_ptr<EntropyCoder> MakeCoder(const std::string& backend);

}  // namespace selic::codec

#endif  // SELIC_CODEC_CODER_BACKEND_H_
