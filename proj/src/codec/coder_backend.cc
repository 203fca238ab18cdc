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
#include "selic/codec/coder_backend.h"

#include <dlfcn.h>

#include <algorithm>
#include <cstdlib>

#include "selic/codec/fast_coder_abi.h"
#include "selic/core/error.h"

namespace selic::codec {
namespace {

class SharedLibraryCoder final : public EntropyCoder {
 public:
  SharedLibraryCoder(void* handle, SelicCoderEncodeFn encode, SelicCoderDecodeFn decode, std::string path)
      : handle_(handle), encode_(encode), decode_(decode), path_(std::move(path)) {}
  ~SharedLibraryCoder() override { dlclose(handle_); }

  std::string name() const override { return "fast:" + path_; }

  std::vector<uint8_t> Encode(std::span<const int32_t> symbols, std::span<const CdfTable* const> tables) override {
    Require(symbols.size() == tables.size(), ErrorKind::kEncode, "one table per symbol required");
    const FlatTables flat = Flatten(tables);
    std::vector<uint8_t> out(8 + 4 * symbols.size() + 64);
    size_t len = 0;
    int32_t status = encode_(symbols.data(), symbols.size(), flat.cdf.data(), flat.cdf.size(), flat.offsets.data(),
                             out.data(), out.size(), &len);
    if (status == SELIC_CODER_OUTPUT_TOO_SMALL) {
      out.resize(len);
      status = encode_(symbols.data(), symbols.size(), flat.cdf.data(), flat.cdf.size(), flat.offsets.data(),
                       out.data(), out.size(), &len);
    }
    Require(status == SELIC_CODER_OK, ErrorKind::kEncode, "fast coder encode failed with status " + std::to_string(status));
    Require(len <= out.size(), ErrorKind::kEncode, "fast coder reported an out-of-buffer length");
    out.resize(len);
    return out;
  }

  size_t Decode(std::span<const uint8_t> bytes, std::span<const CdfTable* const> tables,
                std::span<int32_t> out) override {
    Require(tables.size() >= out.size(), ErrorKind::kDecode, "one table per symbol required");
    const FlatTables flat = Flatten(tables.first(out.size()));
    size_t consumed = 0;
    const int32_t status = decode_(bytes.data(), bytes.size(), flat.cdf.data(), flat.cdf.size(), flat.offsets.data(),
                                   out.size(), out.data(), &consumed);
    Require(status == SELIC_CODER_OK, ErrorKind::kDecode, "fast coder decode failed with status " + std::to_string(status));
    Require(consumed <= bytes.size(), ErrorKind::kDecode, "fast coder reported an out-of-buffer length");
    return consumed;
  }

 private:
  void* handle_;
  SelicCoderEncodeFn encode_;
  SelicCoderDecodeFn decode_;
  std::string path_;
};

}  // namespace

std::vector<uint8_t> ReferenceCoder::Encode(std::span<const int32_t> symbols,
                                            std::span<const CdfTable* const> tables) {
  return RcEncode(symbols, tables);
}

size_t ReferenceCoder::Decode(std::span<const uint8_t> bytes, std::span<const CdfTable* const> tables,
                              std::span<int32_t> out) {
  DecodeResult result = RcDecodePrefix(bytes, tables, out.size());
  std::copy(result.symbols.begin(), result.symbols.end(), out.begin());
  return result.consumed;
}

FlatTables Flatten(std::span<const CdfTable* const> tables) {
  FlatTables flat;
  flat.offsets.reserve(tables.size() + 1);
  flat.offsets.push_back(0);
  for (const CdfTable* t : tables) {
    const auto c = t->cumulative();
    flat.cdf.insert(flat.cdf.end(), c.begin(), c.end());
    flat.offsets.push_back(flat.cdf.size());
  }
  return flat;
}

std::unique_ptr<EntropyCoder> LoadFastCoder(const std::filesystem::path& library) {
  void* handle = dlopen(library.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (handle == nullptr) {
    const char* reason = dlerror();
    Fail(ErrorKind::kBackendUnavailable,
         "cannot load fast coder '" + library.string() + "': " + (reason != nullptr ? reason : "unknown"));
  }
  auto version = reinterpret_cast<SelicCoderAbiVersionFn>(dlsym(handle, SELIC_CODER_ABI_VERSION_SYMBOL));
  auto encode = reinterpret_cast<SelicCoderEncodeFn>(dlsym(handle, SELIC_CODER_ENCODE_SYMBOL));
  auto decode = reinterpret_cast<SelicCoderDecodeFn>(dlsym(handle, SELIC_CODER_DECODE_SYMBOL));
  if (version == nullptr || encode == nullptr || decode == nullptr) {
    dlclose(handle);
    Fail(ErrorKind::kBackendUnavailable, "fast coder '" + library.string() + "' lacks required entry points");
  }
  if (version() != SELIC_FAST_CODER_ABI_VERSION) {
    const uint32_t got = version();
    dlclose(handle);
    Fail(ErrorKind::kBackendUnavailable, "fast coder ABI version " + std::to_string(got) + ", expected " +
                                             std::to_string(SELIC_FAST_CODER_ABI_VERSION));
  }
  return std::make_unique<SharedLibraryCoder>(handle, encode, decode, library.string());
}

std::filesystem::path DefaultFastCoderLibrary() {
  if (const char* env = std::getenv("SELIC_FAST_CODER_LIB"); env != nullptr && *env != '\0') return env;
  return "libselic_fast_coder.so";
}

std::unique_ptr<EntropyCoder> MakeCoder(const std::string& backend) {
  if (backend == "reference") return std::make_unique<ReferenceCoder>();
  if (backend == "fast") return LoadFastCoder(DefaultFastCoderLibrary());
  Fail(ErrorKind::kConfig, "unknown coder backend '" + backend + "'");
}

}  // namespace selic::codec
