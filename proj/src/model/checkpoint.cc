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
#include "selic/model/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "selic/core/error.h"

namespace selic::model {
namespace {

constexpr char kMagic[8] = {'S', 'E', 'L', 'I', 'C', 'C', 'K', 'P'};

class Writer {
 public:
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void String(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void Raw(const char* data, size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string String() {
    const uint32_t n = U32();
    Need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  const char* Take(size_t n) {
    Need(n);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n) const {
    Require(n <= bytes_.size() - pos_, ErrorKind::kModel, "checkpoint is truncated");
  }

  std::vector<char> bytes_;
  size_t pos_ = 0;
};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

}  // namespace

void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  Writer w;
  w.Raw(kMagic, sizeof(kMagic));
  w.U32(kCheckpointVersion);
  w.String(checkpoint.config.Serialize());
  w.U32(static_cast<uint32_t>(checkpoint.metadata.size()));
  for (const auto& [key, value] : checkpoint.metadata) {
    w.String(key);
    w.String(value);
  }
  w.U32(static_cast<uint32_t>(checkpoint.tensors.size()));
  for (const auto& [name, tensor] : checkpoint.tensors) {
    w.String(name);
    const nn::Shape& s = tensor.shape();
    for (int d : {s.n, s.c, s.h, s.w}) w.U32(static_cast<uint32_t>(d));
    w.Raw(reinterpret_cast<const char*>(tensor.data()), tensor.size() * sizeof(float));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write checkpoint " + tmp.string());
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    Require(static_cast<bool>(out), ErrorKind::kIo, "failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open checkpoint " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));
  Require(std::memcmp(r.Take(sizeof(kMagic)), kMagic, sizeof(kMagic)) == 0, ErrorKind::kModel,
          path.string() + " is not a checkpoint");
  const uint32_t version = r.U32();
  Require(version == kCheckpointVersion, ErrorKind::kModel, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  try {
    ckpt.config = ModelConfig::Parse(r.String());
  } catch (const Error& e) {
    Fail(ErrorKind::kModel, std::string("checkpoint config invalid: ") + e.what());
  }
  const uint32_t meta = r.U32();
  for (uint32_t i = 0; i < meta; ++i) {
    std::string key = r.String();
    ckpt.metadata[key] = r.String();
  }
  const uint32_t count = r.U32();
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.String();
    int dims[4];
    for (int& d : dims) {
      const uint32_t v = r.U32();
      Require(v <= (1u << 24), ErrorKind::kModel, "implausible tensor dimension in " + name);
      d = static_cast<int>(v);
    }
    const nn::Shape shape{dims[0], dims[1], dims[2], dims[3]};
    nn::Tensor<float> t(shape);
    std::memcpy(t.data(), r.Take(shape.numel() * sizeof(float)), shape.numel() * sizeof(float));
    ckpt.tensors.emplace(std::move(name), std::move(t));
  }
  Require(r.done(), ErrorKind::kModel, "checkpoint has trailing bytes");
  return ckpt;
}

template <typename T>
Checkpoint ExportModel(SelicModel<T>& model) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  for (const nn::Parameter<T>* p : model.Parameters()) {
    ckpt.tensors.emplace(p->name, p->value.template Cast<float>());
  }
  return ckpt;
}

template <typename T>
void ImportModel(const Checkpoint& checkpoint, SelicModel<T>& model) {
  for (nn::Parameter<T>* p : model.Parameters()) {
    const auto it = checkpoint.tensors.find(p->name);
    Require(it != checkpoint.tensors.end(), ErrorKind::kModel, "checkpoint lacks parameter " + p->name);
    Require(it->second.shape() == p->value.shape(), ErrorKind::kModel,
            "parameter " + p->name + " has shape " + it->second.shape().ToString() + ", model expects " +
                p->value.shape().ToString());
    p->value = it->second.template Cast<T>();
  }
}

template Checkpoint ExportModel(SelicModel<float>&);
template Checkpoint ExportModel(SelicModel<double>&);
template void ImportModel(const Checkpoint&, SelicModel<float>&);
template void ImportModel(const Checkpoint&, SelicModel<double>&);

}  // namespace selic::model
