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
#ifndef SELIC_TRAIN_TRAINER_H_
#define SELIC_TRAIN_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "selic/core/config.h"
#include "selic/core/image.h"
#include "selic/core/kv_document.h"
#include "selic/core/rng.h"
#include "selic/model/checkpoint.h"
#include "selic/model/selic_model.h"
#include "selic/nn/adam.h"
#include "selic/semantic/semantic.h"

namespace selic::train {

// Epochs are 0-based: epochs [0, lr_drop_epoch) use lr_initial.
struct TrainSchedule {
  int epochs = 160;
  int batch_size = 8;
  double lr_initial = 1e-4;
  double lr_final = 1e-5;
  int lr_drop_epoch = 130;
  int crop = 256;
  bool flip = true;

  double LearningRate(int epoch) const { return epoch < lr_drop_epoch ? lr_initial : lr_final; }
  void Validate() const;
};

// total == bpp + lambda * mse * 255^2, mse on the [0, 1] scale.
struct RdLoss {
  double bpp = 0;
  double mse = 0;
  double lambda = 0;
  double total = 0;
};

RdLoss MakeRdLoss(double bits, double pixels, double mse, double lambda);

struct TrainConfig {
  ModelConfig model;
  TrainSchedule schedule;
  std::filesystem::path dataset_dir;
  std::filesystem::path output_dir;
  // Defaults to <output_dir>/semantic_cache.
  std::filesystem::path cache_dir;
  // Stop after this many optimizer steps; 0 runs the whole schedule.
  int64_t max_steps = 0;
  int checkpoint_every = 1;

  // Model keys as in ModelConfig plus train.*, data.dir, output.dir and
  // cache.dir. Relative paths resolve against base_dir.
  static TrainConfig FromDocument(const KeyValueDocument& doc, const std::filesystem::path& base_dir = {});
  static TrainConfig Load(const std::filesystem::path& path);
};

struct TrainingImage {
  std::string id;
  ImagePlane image;
  // Caption embedding of the full image; empty for the baseline.
  std::vector<float> embedding;
};

class Dataset {
 public:
  // Every image file directly under dir, in filename order. Unreadable
  // files are skipped and counted; kInvalidInput when nothing is usable.
  static Dataset Load(const std::filesystem::path& dir);
  static Dataset FromImages(std::vector<TrainingImage> images);

  // Captions every image (full frame, before cropping) through the cache.
  void AttachSemantics(semantic::SemanticCache& cache);

  size_t size() const { return images_.size(); }
  size_t skipped() const { return skipped_; }
  const TrainingImage& operator[](size_t i) const { return images_[i]; }

 private:
  std::vector<TrainingImage> images_;
  size_t skipped_ = 0;
};

struct Batch {
  nn::Tensor<float> images;      // (N, 3, crop, crop)
  nn::Tensor<float> embeddings;  // (N, D, 1, 1), empty without semantics
};

// Uniform random crops, edge-padded when an image is smaller than the
// crop, each flipped horizontally with probability 1/2 when flip is set.
Batch SampleBatch(const Dataset& dataset, std::span<const size_t> indices, int crop, bool flip, bool with_semantics,
                  Rng& rng);

// One noise-surrogate forward/backward pass and Adam update. kNumeric
// (with the offending terms in the message) when the loss or a gradient
// is not finite; the parameters are untouched in that case.
RdLoss TrainStep(model::SelicModel<float>& model, const Batch& batch, nn::Adam<float>& adam, double lr, Rng& noise);

// Model weights plus optimizer state and progress counters.
model::Checkpoint MakeTrainingCheckpoint(model::SelicModel<float>& model, const nn::Adam<float>& adam,
                                         int epochs_done, int64_t step);
void RestoreTrainingCheckpoint(const model::Checkpoint& checkpoint, model::SelicModel<float>& model,
                               nn::Adam<float>& adam, int* epochs_done, int64_t* step);

struct StepRecord {
  int64_t step = 0;  // 1-based count of completed updates
  int epoch = 0;
  double lr = 0;
  RdLoss loss;
};

// Runs the schedule over a dataset directory. Output layout:
//   <output_dir>/epoch_NNNN.ckpt  after each checkpointed epoch
//   <output_dir>/final.ckpt       when Run returns
//   <output_dir>/train_log.csv    step,bpp,mse,loss,lr
class Trainer {
 public:
  // pipeline null means one built from the config's semantic backend.
  explicit Trainer(TrainConfig config, std::unique_ptr<semantic::SemanticPipeline> pipeline = nullptr);

  // Resumes from the newest epoch checkpoint in output_dir, if any.
  void Run(const std::function<void(const StepRecord&)>& on_step = {});

  model::SelicModel<float>& model() { return *model_; }
  const Dataset& dataset() const { return dataset_; }
  int epochs_done() const { return epochs_done_; }
  int64_t step() const { return step_; }
  std::filesystem::path CheckpointPath(int epochs_done) const;
  semantic::SemanticPipeline* pipeline() { return pipeline_.get(); }

 private:
  bool Resume();
  void TruncateLog() const;

  TrainConfig config_;
  std::unique_ptr<semantic::SemanticPipeline> pipeline_;
  std::unique_ptr<model::SelicModel<float>> model_;
  nn::Adam<float> adam_;
  Dataset dataset_;
  int epochs_done_ = 0;
  int64_t step_ = 0;
};

}  // namespace selic::train

#endif  // SELIC_TRAIN_TRAINER_H_
