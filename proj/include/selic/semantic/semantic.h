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
#ifndef SELIC_SEMANTIC_SEMANTIC_H_
#define SELIC_SEMANTIC_SEMANTIC_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "selic/core/config.h"
#include "selic/core/image.h"

namespace selic::semantic {

inline constexpr int kMaxCaptionTokens = 64;

struct Caption {
  std::string text;
  int token_count = 0;
};

// Whitespace-normalized caption truncated to kMaxCaptionTokens tokens.
// kInvalidInput for text with no tokens.
Caption MakeCaption(std::string_view text);

// Image -> caption. Implementations are frozen: nothing they own changes
// after construction, which ParameterChecksum() lets callers verify.
class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string id() const = 0;
  virtual Caption Describe(const ImagePlane& image) = 0;
  virtual uint64_t ParameterChecksum() const = 0;
};

// Caption -> raw (pre-projection) text embedding of fixed width.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::string id() const = 0;
  virtual int dim() const = 0;
  virtual std::vector<float> Embed(const Caption& caption) = 0;
  virtual uint64_t ParameterChecksum() const = 0;
};

// Hermetic captioner: FNV-1a of the interleaved 8-bit RGB bytes, mixed with
// the seed, selects words from a fixed vocabulary.
class StubCaptioner final : public Captioner {
 public:
  explicit StubCaptioner(uint64_t seed) : seed_(seed) {}
  std::string id() const override;
  Caption Describe(const ImagePlane& image) override;
  uint64_t ParameterChecksum() const override;

 private:
  uint64_t seed_;
};

// Hermetic encoder: each token selects a row of a seeded random table; the
// rows are averaged and scaled to unit norm.
class StubTextEncoder final : public TextEncoder {
 public:
  static constexpr int kBuckets = 1024;

  StubTextEncoder(int dim, uint64_t seed);
  std::string id() const override;
  int dim() const override { return dim_; }
  std::vector<float> Embed(const Caption& caption) override;
  uint64_t ParameterChecksum() const override;

 private:
  int dim_;
  uint64_t seed_;
  std::vector<float> table_;
};

// Pretrained models behind an external helper program named by the
// SELIC_SEMANTIC_HELPER environment variable (a command line). Protocol:
//   <helper> id                         -> prints the backend identity
//   <helper> caption IMAGE.ppm          -> prints the caption
//   <helper> embed CAPTION.txt OUT.f32  -> writes little-endian f32 values
//   <helper> checksum                   -> prints a decimal weight checksum
// Any failure, including a missing variable, is kBackendUnavailable.
class HelperBackend {
 public:
  // Probes the helper with "id"; throws kBackendUnavailable when unusable.
  static std::shared_ptr<HelperBackend> Connect();

  explicit HelperBackend(std::string command) : command_(std::move(command)) {}
  std::string Run(const std::vector<std::string>& args) const;
  const std::string& command() const { return command_; }

 private:
  std::string command_;
};

class HelperCaptioner final : public Captioner {
 public:
  explicit HelperCaptioner(std::shared_ptr<HelperBackend> helper);
  std::string id() const override { return id_; }
  Caption Describe(const ImagePlane& image) override;
  uint64_t ParameterChecksum() const override;

 private:
  std::shared_ptr<HelperBackend> helper_;
  std::string id_;
};

class HelperTextEncoder final : public TextEncoder {
 public:
  HelperTextEncoder(std::shared_ptr<HelperBackend> helper, int dim);
  std::string id() const override { return id_; }
  int dim() const override { return dim_; }
  std::vector<float> Embed(const Caption& caption) override;
  uint64_t ParameterChecksum() const override;

 private:
  std::shared_ptr<HelperBackend> helper_;
  std::string id_;
  int dim_;
};

struct SemanticResult {
  Caption caption;
  std::vector<float> embedding;
};

// Captioner followed by text encoder, with call counters.
class SemanticPipeline {
 public:
  SemanticPipeline(std::unique_ptr<Captioner> captioner, std::unique_ptr<TextEncoder> encoder);

  // Filesystem-safe identity of the backend pair and embedding width.
  std::string backend_id() const;
  int dim() const { return encoder_->dim(); }

  // kInvalidInput for an empty image.
  SemanticResult Compute(const ImagePlane& image);
  uint64_t ParameterChecksum() const;

  size_t caption_calls() const { return caption_calls_; }
  size_t embed_calls() const { return embed_calls_; }

 private:
  std::unique_ptr<Captioner> captioner_;
  std::unique_ptr<TextEncoder> encoder_;
  size_t caption_calls_ = 0;
  size_t embed_calls_ = 0;
};

// semantic.backend: "stub" or "pretrained".
std::unique_ptr<SemanticPipeline> MakeSemanticPipeline(const ModelConfig& config);

// Persistent per-image captions and embeddings:
//   <root>/<backend_id>/<key>.caption.txt
//   <root>/<backend_id>/<key>.embed.f32   (dim little-endian f32)
// Files are replaced atomically. An unreadable, wrongly sized or
// non-finite entry is recomputed and overwritten with a warning.
class SemanticCache {
 public:
  SemanticCache(std::filesystem::path root, SemanticPipeline& pipeline);

  std::vector<float> Get(std::string_view image_id, const ImagePlane& image);
  // Cached caption of an id previously passed to Get.
  std::string Caption(std::string_view image_id) const;

  std::filesystem::path directory() const { return dir_; }
  size_t hits() const { return hits_; }
  size_t misses() const { return misses_; }
  size_t recoveries() const { return recoveries_; }

 private:
  std::filesystem::path EntryPath(std::string_view image_id, std::string_view suffix) const;

  std::filesystem::path dir_;
  SemanticPipeline& pipeline_;
  size_t hits_ = 0;
  size_t misses_ = 0;
  size_t recoveries_ = 0;
};

}  // namespace selic::semantic

#endif  // SELIC_SEMANTIC_SEMANTIC_H_
