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
#include "selic/codec/container.h"

#include <algorithm>
#include <string>

#include "selic/core/error.h"

namespace selic::codec {
namespace {

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint8_t U8() {
    Need(1);
    return bytes_[pos_++];
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::vector<uint8_t> Bytes(uint32_t n) {
    Need(n);
    std::vector<uint8_t> out(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(size_t n) const {
    Require(remaining() >= n, ErrorKind::kDecode, "bitstream is truncated");
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace

size_t Container::SerializedSize() const {
  size_t total = kFixedHeaderBytes + 4 * (1 + slice_payloads.size()) + z_payload.size();
  for (const auto& s : slice_payloads) total += s.size();
  return total;
}

std::vector<uint8_t> SerializeContainer(const Container& c) {
  std::vector<uint8_t> out(kContainerMagic.begin(), kContainerMagic.end());
  out.reserve(c.SerializedSize());
  out.push_back(c.version);
  out.push_back(c.config_id);
  out.push_back(c.fusion_kind);
  for (uint32_t v : {c.orig_h, c.orig_w, c.padded_h, c.padded_w}) PutU32(out, v);
  PutU32(out, static_cast<uint32_t>(c.z_payload.size()));
  for (const auto& s : c.slice_payloads) PutU32(out, static_cast<uint32_t>(s.size()));
  out.insert(out.end(), c.z_payload.begin(), c.z_payload.end());
  for (const auto& s : c.slice_payloads) out.insert(out.end(), s.begin(), s.end());
  return out;
}

Container ParseContainer(std::span<const uint8_t> bytes, int num_slices) {
  Require(num_slices >= 1, ErrorKind::kConfig, "num_slices must be positive");
  Require(bytes.size() >= 4 && std::equal(kContainerMagic.begin(), kContainerMagic.end(), bytes.begin()),
          ErrorKind::kDecode, "not a .selic bitstream (bad magic)");
  Reader r(bytes.subspan(4));
  Container c;
  c.version = r.U8();
  Require(c.version == kContainerVersion, ErrorKind::kDecode,
          "unsupported bitstream version " + std::to_string(c.version));
  c.config_id = r.U8();
  c.fusion_kind = r.U8();
  c.orig_h = r.U32();
  c.orig_w = r.U32();
  c.padded_h = r.U32();
  c.padded_w = r.U32();
  const uint32_t z_len = r.U32();
  std::vector<uint32_t> slice_lens(num_slices);
  uint64_t payload = z_len;
  for (uint32_t& len : slice_lens) {
    len = r.U32();
    payload += len;
  }
  Require(payload == r.remaining(), ErrorKind::kDecode,
          "bitstream length does not match its header (" + std::to_string(r.remaining()) + " payload bytes, header says " +
              std::to_string(payload) + ")");
  c.z_payload = r.Bytes(z_len);
  for (uint32_t len : slice_lens) c.slice_payloads.push_back(r.Bytes(len));
  return c;
}

}  // namespace selic::codec
