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
#ifndef SELIC_EVAL_PIPELINE_H_
#define SELIC_EVAL_PIPELINE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "selic/codec/coder_backend.h"
#include "selic/eval/metrics.h"
#include "selic/model/inference.h"
#include "selic/semantic/semantic.h"
#include "selic/train/trainer.h"

namespace selic::eval {

struct LoadedModel {
  std::filesystem::path checkpoint;
  std::unique_ptr<model::InferenceModel> model;
  std::map<std::string, std::string> metadata;
  const ModelConfig& config() const { return model->config(); }
};

LoadedModel LoadModel(const std::filesystem::path& checkpoint);

// Trainable parameter counts keyed by top-level component ("analysis",
// "fusion", ...), plus "total".
std::map<std::string, size_t> ParameterCounts(model::InferenceModel& model);

struct ImageResult {
  std::string id;
  int height = 0;
  int width = 0;
  size_t file_bytes = 0;
  // file_bytes * 8 / (height * width): the stored file is the ground truth.
  double bpp = 0;
  double psnr_db = 0;
  // NaN below the MS-SSIM minimum side.
  double ms_ssim = 0;
  double encode_ms = 0;
  double decode_ms = 0;
};

struct EvalSummary {
  std::string label;
  ModelConfig config;
  std::vector<ImageResult> images;
  // Per-image means; ms_ssim averages only images where it is defined.
  RdPoint mean;
  double mean_encode_ms = 0;
  double mean_decode_ms = 0;
  std::map<std::string, size_t> parameters;
};

// Encodes every image to <stream_dir>/<id>.selic, reads the file back,
// decodes it and scores the reconstruction. pipeline may be null for a
// model without the semantic branch.
EvalSummary EvaluateModel(model::InferenceModel& model, const train::Dataset& dataset,
                          semantic::SemanticPipeline* pipeline, codec::EntropyCoder& coder,
                          const std::filesystem::path& stream_dir, const std::string& label);

// Loads the checkpoint, builds its semantic pipeline and coder, evaluates.
EvalSummary EvaluateCheckpoint(const std::filesystem::path& checkpoint, const train::Dataset& dataset,
                               const std::filesystem::path& stream_dir, const std::string& coder_backend);

// Per-image results, version 1:
//   # selic eval v1
//   model,image,height,width,bytes,bpp,psnr_db,ms_ssim,encode_ms,decode_ms
void WriteEvalCsv(const std::filesystem::path& path, const std::vector<EvalSummary>& summaries);
std::string FormatEvalSummary(const EvalSummary& summary);

// One RD point per summary, sorted by bpp.
RdCurve CurveFromSummaries(const std::string& label, const std::vector<EvalSummary>& summaries);

struct FusionAblationRow {
  FusionKind strategy = FusionKind::kConcat;
  std::filesystem::path checkpoint;
  bool present = false;
  // Why the row is absent.
  std::string note;
  RdPoint mean;
};

struct FusionAblationReport {
  std::vector<FusionAblationRow> rows;
  bool complete() const;
};

// Rows in the order mul, add, concat. A missing or unreadable checkpoint
// marks its row absent; a checkpoint whose fusion differs from its slot is
// a kConfig error.
FusionAblationReport RunFusionAblation(const std::map<FusionKind, std::filesystem::path>& checkpoints,
                                       const train::Dataset& dataset, const std::filesystem::path& work_dir,
                                       const std::string& coder_backend);

// Version 1: "# selic ablation-fusion v1" then
//   strategy,status,bpp,psnr_db,ms_ssim,checkpoint
void WriteFusionAblationCsv(const std::filesystem::path& path, const FusionAblationReport& report);
std::string FormatFusionAblation(const FusionAblationReport& report);

struct SemanticAblationPair {
  double lambda = 0;
  RdPoint with_semantics;
  RdPoint without_semantics;
  double delta_psnr_db() const { return with_semantics.psnr_db - without_semantics.psnr_db; }
  double delta_bpp() const { return with_semantics.bpp - without_semantics.bpp; }
};

struct SemanticAblationReport {
  std::vector<SemanticAblationPair> pairs;  // ascending lambda
  RdCurve with_curve;
  RdCurve without_curve;
  // NaN with fewer than four pairs.
  double bd_rate = 0;
  double bd_psnr = 0;
};

// Pairs checkpoints by lambda. Every "with" checkpoint must have the
// semantic branch and every "without" checkpoint must not; the two sets
// must cover the same lambdas (kConfig otherwise).
SemanticAblationReport RunSemanticAblation(const std::vector<std::filesystem::path>& with_semantics,
                                           const std::vector<std::filesystem::path>& without_semantics,
                                           const train::Dataset& dataset, const std::filesystem::path& work_dir,
                                           const std::string& coder_backend);

// Version 1: "# selic ablation-semantic v1" then
//   lambda,bpp_with,psnr_with,bpp_without,psnr_without,delta_psnr_db
void WriteSemanticAblationCsv(const std::filesystem::path& path, const SemanticAblationReport& report);
std::string FormatSemanticAblation(const SemanticAblationReport& report);

}  // namespace selic::eval

#endif  // SELIC_EVAL_PIPELINE_H_
