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
#include "selic/semantic/semantic.h"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "selic/core/error.h"
#include "selic/core/log.h"
#include "selic/core/rng.h"

namespace selic::semantic {
namespace {

constexpr std::array<std::string_view, 64> kVocabulary = {
    "red",    "green",   "blue",   "bright", "dark",   "small",  "large",  "old",    "quiet",  "busy",   "wooden",
    "stone",  "glass",   "soft",   "sunny",  "misty",  "dog",    "cat",    "bird",   "horse",  "boat",   "car",
    "house",  "tree",    "flower", "river",  "lake",   "beach",  "hill",   "road",   "bridge", "tower",  "window",
    "door",   "fence",   "garden", "field",  "forest", "cloud",  "sky",    "person", "child",  "woman",  "man",
    "table",  "chair",   "lamp",   "wall",   "street", "market", "harbor", "mountain", "snow", "grass",  "sand",
    "rock",   "leaf",    "fruit",  "bottle", "sign",   "train",  "bicycle", "roof",  "statue"};
constexpr int kStubCaptionWords = 8;

std::vector<std::string> Tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

uint64_t HashString(std::string_view s, uint64_t basis = 0xcbf29ce484222325ull) {
  return Fnv1a64(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()), basis);
}

template <typename V>
uint64_t HashValues(const std::vector<V>& values) {
  return Fnv1a64(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(values.data()), values.size() * sizeof(V)));
}

std::string SafeName(std::string_view s) {
  std::string out;
  for (char ch : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.' || ch == '+';
    out.push_back(keep ? ch : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string Hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string ShellQuote(std::string_view s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'') {
      out += "'\\''";
    } else {
      out.push_back(ch);
    }
  }
  return out + "'";
}

std::string Trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  return s.substr(start);
}

std::filesystem::path TempPath(std::string_view suffix) {
  static std::atomic<uint64_t> counter{0};
  return std::filesystem::temp_directory_path() /
         ("selic-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + std::string(suffix));
}

void WriteFileAtomic(const std::filesystem::path& path, const void* data, size_t size) {
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    Require(static_cast<bool>(out), ErrorKind::kIo, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<std::string> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void CheckEmbedding(const std::vector<float>& v, int dim, const std::string& who) {
  Require(static_cast<int>(v.size()) == dim, ErrorKind::kBackendUnavailable,
          who + " returned " + std::to_string(v.size()) + " values, expected " + std::to_string(dim));
  if (!std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); })) {
    Fail(ErrorKind::kBackendUnavailable, who + " returned non-finite values");
  }
}

}  // namespace

Caption MakeCaption(std::string_view text) {
  std::vector<std::string> tokens = Tokens(text);
  Require(!tokens.empty(), ErrorKind::kInvalidInput, "caption is empty");
  if (tokens.size() > static_cast<size_t>(kMaxCaptionTokens)) tokens.resize(kMaxCaptionTokens);
  Caption caption;
  for (const std::string& t : tokens) {
    if (!caption.text.empty()) caption.text.push_back(' ');
    caption.text += t;
  }
  caption.token_count = static_cast<int>(tokens.size());
  return caption;
}

std::string StubCaptioner::id() const { return "stubcap-s" + std::to_string(seed_); }

Caption StubCaptioner::Describe(const ImagePlane& image) {
  Require(!image.empty(), ErrorKind::kInvalidInput, "cannot caption an empty image");
  const std::vector<uint8_t> bytes = image.ToInterleaved8();
  uint64_t state = DeriveSeed(Fnv1a64(bytes), seed_);
  std::string text = "a photo of";
  for (int i = 0; i < kStubCaptionWords; ++i) {
    text += ' ';
    text += kVocabulary[SplitMix64(state) % kVocabulary.size()];
  }
  return MakeCaption(text);
}

uint64_t StubCaptioner::ParameterChecksum() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (std::string_view w : kVocabulary) h = HashString(w, h);
  return h ^ seed_;
}

StubTextEncoder::StubTextEncoder(int dim, uint64_t seed) : dim_(dim), seed_(seed) {
  Require(dim >= 1, ErrorKind::kConfig, "text embedding width must be positive");
  Rng rng(DeriveSeed(seed, 0x7e47));
  table_.resize(static_cast<size_t>(kBuckets) * dim);
  for (float& v : table_) v = static_cast<float>(rng.Normal());
}

std::string StubTextEncoder::id() const { return "stubtext-s" + std::to_string(seed_); }

std::vector<float> StubTextEncoder::Embed(const Caption& caption) {
  const std::vector<std::string> tokens = Tokens(caption.text);
  Require(!tokens.empty(), ErrorKind::kInvalidInput, "cannot embed an empty caption");
  std::vector<double> acc(dim_, 0.0);
  const size_t used = std::min(tokens.size(), static_cast<size_t>(kMaxCaptionTokens));
  for (size_t t = 0; t < used; ++t) {
    const size_t row = HashString(tokens[t]) % kBuckets;
    for (int d = 0; d < dim_; ++d) acc[d] += table_[row * dim_ + d];
  }
  double norm = 0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<float> out(dim_);
  for (int d = 0; d < dim_; ++d) out[d] = static_cast<float>(norm > 0 ? acc[d] / norm : 0.0);
  return out;
}

uint64_t StubTextEncoder::ParameterChecksum() const { return HashValues(table_); }

std::shared_ptr<HelperBackend> HelperBackend::Connect() {
  const char* command = std::getenv("SELIC_SEMANTIC_HELPER");
  Require(command != nullptr && *command != '\0', ErrorKind::kBackendUnavailable,
          "pretrained semantic backend requested but SELIC_SEMANTIC_HELPER is not set");
  auto helper = std::make_shared<HelperBackend>(command);
  helper->Run({"id"});
  return helper;
}

std::string HelperBackend::Run(const std::vector<std::string>& args) const {
  std::string cmd = command_;
  for (const std::string& a : args) cmd += " " + ShellQuote(a);
  std::FILE* pipe = ::popen(cmd.c_str(), "r");
  Require(pipe != nullptr, ErrorKind::kBackendUnavailable, "cannot start semantic helper: " + command_);
  std::string output;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  Require(status == 0, ErrorKind::kBackendUnavailable,
          "semantic helper failed (" + std::to_string(status) + "): " + command_ + " " + (args.empty() ? "" : args[0]));
  return Trim(output);
}

HelperCaptioner::HelperCaptioner(std::shared_ptr<HelperBackend> helper)
    : helper_(std::move(helper)), id_("cap-" + SafeName(helper_->Run({"id"}))) {}

Caption HelperCaptioner::Describe(const ImagePlane& image) {
  Require(!image.empty(), ErrorKind::kInvalidInput, "cannot caption an empty image");
  const std::filesystem::path path = TempPath(".ppm");
  const std::vector<uint8_t> rgb = image.ToInterleaved8();
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  }
  std::string text;
  try {
    text = helper_->Run({"caption", path.string()});
  } catch (...) {
    std::filesystem::remove(path);
    throw;
  }
  std::filesystem::remove(path);
  Require(!Tokens(text).empty(), ErrorKind::kBackendUnavailable, "semantic helper produced an empty caption");
  return MakeCaption(text);
}

uint64_t HelperCaptioner::ParameterChecksum() const { return std::stoull(helper_->Run({"checksum"})); }

HelperTextEncoder::HelperTextEncoder(std::shared_ptr<HelperBackend> helper, int dim)
    : helper_(std::move(helper)), id_("text-" + SafeName(helper_->Run({"id"}))), dim_(dim) {}

std::vector<float> HelperTextEncoder::Embed(const Caption& caption) {
  Require(!Tokens(caption.text).empty(), ErrorKind::kInvalidInput, "cannot embed an empty caption");
  const std::filesystem::path in = TempPath(".txt");
  const std::filesystem::path out = TempPath(".f32");
  {
    std::ofstream f(in, std::ios::binary);
    f << caption.text;
  }
  std::optional<std::string> bytes;
  try {
    helper_->Run({"embed", in.string(), out.string()});
    bytes = ReadFile(out);
  } catch (...) {
    std::filesystem::remove(in);
    std::filesystem::remove(out);
    throw;
  }
  std::filesystem::remove(in);
  std::filesystem::remove(out);
  Require(bytes.has_value() && bytes->size() % 4 == 0, ErrorKind::kBackendUnavailable,
          "semantic helper wrote no embedding");
  std::vector<float> v(bytes->size() / 4);
  std::memcpy(v.data(), bytes->data(), bytes->size());
  CheckEmbedding(v, dim_, "semantic helper");
  return v;
}

uint64_t HelperTextEncoder::ParameterChecksum() const { return std::stoull(helper_->Run({"checksum"})); }

SemanticPipeline::SemanticPipeline(std::unique_ptr<Captioner> captioner, std::unique_ptr<TextEncoder> encoder)
    : captioner_(std::move(captioner)), encoder_(std::move(encoder)) {}

std::string SemanticPipeline::backend_id() const {
  return SafeName(captioner_->id() + "+" + encoder_->id() + "-d" + std::to_string(encoder_->dim()));
}

SemanticResult SemanticPipeline::Compute(const ImagePlane& image) {
  Require(!image.empty(), ErrorKind::kInvalidInput, "cannot caption an empty image");
  SemanticResult r;
  ++caption_calls_;
  r.caption = captioner_->Describe(image);
  ++embed_calls_;
  r.embedding = encoder_->Embed(r.caption);
  CheckEmbedding(r.embedding, encoder_->dim(), encoder_->id());
  return r;
}

uint64_t SemanticPipeline::ParameterChecksum() const {
  return DeriveSeed(captioner_->ParameterChecksum(), encoder_->ParameterChecksum());
}

std::unique_ptr<SemanticPipeline> MakeSemanticPipeline(const ModelConfig& config) {
  if (config.semantic_backend == "stub") {
    return std::make_unique<SemanticPipeline>(std::make_unique<StubCaptioner>(config.seed),
                                              std::make_unique<StubTextEncoder>(config.text_embed_dim, config.seed));
  }
  if (config.semantic_backend == "pretrained") {
    const std::shared_ptr<HelperBackend> helper = HelperBackend::Connect();
    return std::make_unique<SemanticPipeline>(std::make_unique<HelperCaptioner>(helper),
                                              std::make_unique<HelperTextEncoder>(helper, config.text_embed_dim));
  }
  Fail(ErrorKind::kConfig, "unknown semantic backend '" + config.semantic_backend + "'");
}

SemanticCache::SemanticCache(std::filesystem::path root, SemanticPipeline& pipeline)
    : dir_(std::move(root) / pipeline.backend_id()), pipeline_(pipeline) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path SemanticCache::EntryPath(std::string_view image_id, std::string_view suffix) const {
  std::string key = SafeName(image_id);
  // Distinct ids that sanitize to the same name keep distinct entries.
  if (key != image_id) key += "-" + Hex(HashString(image_id)).substr(0, 8);
  return dir_ / (key + std::string(suffix));
}

std::vector<float> SemanticCache::Get(std::string_view image_id, const ImagePlane& image) {
  Require(!image_id.empty(), ErrorKind::kInvalidInput, "image id is empty");
  const std::filesystem::path embed_path = EntryPath(image_id, ".embed.f32");
  const std::filesystem::path caption_path = EntryPath(image_id, ".caption.txt");
  const bool present = std::filesystem::exists(embed_path) || std::filesystem::exists(caption_path);
  if (present) {
    const std::optional<std::string> bytes = ReadFile(embed_path);
    const std::optional<std::string> caption = ReadFile(caption_path);
    bool valid = bytes.has_value() && caption.has_value() && !Tokens(*caption).empty() &&
                 bytes->size() == static_cast<size_t>(pipeline_.dim()) * sizeof(float);
    std::vector<float> v;
    if (valid) {
      v.resize(pipeline_.dim());
      std::memcpy(v.data(), bytes->data(), bytes->size());
      for (float x : v) valid = valid && std::isfinite(x);
    }
    if (valid) {
      ++hits_;
      return v;
    }
    ++recoveries_;
    LogWarning("semantic cache entry for '" + std::string(image_id) + "' is corrupt; recomputing");
  } else {
    ++misses_;
  }
  const SemanticResult r = pipeline_.Compute(image);
  WriteFileAtomic(caption_path, r.caption.text.data(), r.caption.text.size());
  WriteFileAtomic(embed_path, r.embedding.data(), r.embedding.size() * sizeof(float));
  return r.embedding;
}

std::string SemanticCache::Caption(std::string_view image_id) const {
  const std::optional<std::string> text = ReadFile(EntryPath(image_id, ".caption.txt"));
  Require(text.has_value(), ErrorKind::kIo, "no cached caption for '" + std::string(image_id) + "'");
  return *text;
}

}  // namespace selic::semantic
