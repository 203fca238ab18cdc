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
#include "selic/train/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

#include "selic/core/error.h"
#include "selic/core/log.h"
#include "selic/io/image_io.h"
#include "selic/model/image_tensor.h"
#include "selic/nn/ops.h"

namespace selic::train {
namespace fs = std::filesystem;
namespace {

constexpr uint64_t kEpochStreamTag = 0x7a11;
constexpr const char* kLogHeader = "step,bpp,mse,loss,lr";
constexpr const char* kAdamM = "adam.m:";
constexpr const char* kAdamV = "adam.v:";

std::string FiniteReport(const RdLoss& loss) {
  std::ostringstream s;
  s << "bpp=" << loss.bpp << " mse=" << loss.mse << " loss=" << loss.total;
  return s.str();
}

fs::path Resolve(const fs::path& base, std::string_view value) {
  const fs::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

void TrainSchedule::Validate() const {
  Require(epochs >= 1, ErrorKind::kConfig, "train.epochs must be >= 1");
  Require(batch_size >= 1, ErrorKind::kConfig, "train.batch_size must be >= 1");
  Require(lr_initial > 0 && lr_final > 0, ErrorKind::kConfig, "learning rates must be positive");
  Require(lr_drop_epoch >= 0 && lr_drop_epoch < epochs, ErrorKind::kConfig,
          "train.lr_drop_epoch must lie inside [0, train.epochs)");
  Require(crop >= ModelConfig::kPadMultiple && crop % ModelConfig::kPadMultiple == 0, ErrorKind::kConfig,
          "train.crop must be a positive multiple of 64");
}

RdLoss MakeRdLoss(double bits, double pixels, double mse, double lambda) {
  RdLoss loss;
  loss.bpp = bits / pixels;
  loss.mse = mse;
  loss.lambda = lambda;
  loss.total = loss.bpp + lambda * mse * model::kDistortionScale;
  return loss;
}

TrainConfig TrainConfig::FromDocument(const KeyValueDocument& doc, const fs::path& base_dir) {
  TrainConfig c;
  for (const auto& [key, value] : doc.entries()) {
    if (c.model.ApplyKey(key, value)) continue;
    if (key == "train.epochs") {
      c.schedule.epochs = static_cast<int>(ParseInt(key, value));
    } else if (key == "train.batch_size") {
      c.schedule.batch_size = static_cast<int>(ParseInt(key, value));
    } else if (key == "train.lr_initial") {
      c.schedule.lr_initial = ParseReal(key, value);
    } else if (key == "train.lr_final") {
      c.schedule.lr_final = ParseReal(key, value);
    } else if (key == "train.lr_drop_epoch") {
      c.schedule.lr_drop_epoch = static_cast<int>(ParseInt(key, value));
    } else if (key == "train.crop") {
      c.schedule.crop = static_cast<int>(ParseInt(key, value));
    } else if (key == "train.flip") {
      c.schedule.flip = ParseBool(key, value);
    } else if (key == "train.max_steps") {
      c.max_steps = ParseInt(key, value);
    } else if (key == "train.checkpoint_every") {
      c.checkpoint_every = static_cast<int>(ParseInt(key, value));
    } else if (key == "data.dir") {
      c.dataset_dir = Resolve(base_dir, value);
    } else if (key == "output.dir") {
      c.output_dir = Resolve(base_dir, value);
    } else if (key == "cache.dir") {
      c.cache_dir = Resolve(base_dir, value);
    } else {
      Fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
    }
  }
  c.model.Validate();
  c.schedule.Validate();
  Require(!c.dataset_dir.empty(), ErrorKind::kConfig, "data.dir is required");
  Require(!c.output_dir.empty(), ErrorKind::kConfig, "output.dir is required");
  Require(c.max_steps >= 0, ErrorKind::kConfig, "train.max_steps must be >= 0");
  Require(c.checkpoint_every >= 1, ErrorKind::kConfig, "train.checkpoint_every must be >= 1");
  return c;
}

TrainConfig TrainConfig::Load(const fs::path& path) {
  return FromDocument(KeyValueDocument::Load(path), path.parent_path());
}

Dataset Dataset::Load(const fs::path& dir) {
  Require(fs::is_directory(dir), ErrorKind::kIo, "dataset directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && io::HasImageExtension(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Dataset d;
  for (const fs::path& f : files) {
    try {
      d.images_.push_back({f.filename().string(), io::ReadImage(f), {}});
    } catch (const Error& e) {
      ++d.skipped_;
      LogWarning("skipping unreadable training image " + f.string() + ": " + e.what());
    }
  }
  if (d.skipped_ > 0) LogWarning("skipped " + std::to_string(d.skipped_) + " unreadable image(s) in " + dir.string());
  Require(!d.images_.empty(), ErrorKind::kInvalidInput, "no usable training images in " + dir.string());
  return d;
}

Dataset Dataset::FromImages(std::vector<TrainingImage> images) {
  Require(!images.empty(), ErrorKind::kInvalidInput, "dataset is empty");
  Dataset d;
  d.images_ = std::move(images);
  return d;
}

void Dataset::AttachSemantics(semantic::SemanticCache& cache) {
  for (TrainingImage& img : images_) img.embedding = cache.Get(img.id, img.image);
}

Batch SampleBatch(const Dataset& dataset, std::span<const size_t> indices, int crop, bool flip, bool with_semantics,
                  Rng& rng) {
  Require(!indices.empty(), ErrorKind::kInvalidInput, "empty batch");
  const int n = static_cast<int>(indices.size());
  Batch batch;
  batch.images = nn::Tensor<float>(nn::Shape{n, 3, crop, crop});
  int dim = 0;
  if (with_semantics) {
    dim = static_cast<int>(dataset[indices[0]].embedding.size());
    Require(dim > 0, ErrorKind::kModel, "training images have no caption embeddings");
    batch.embeddings = nn::Tensor<float>(nn::Shape{n, dim, 1, 1});
  }
  for (int i = 0; i < n; ++i) {
    const TrainingImage& src = dataset[indices[i]];
    const ImagePlane& full =
        src.image.height() < crop || src.image.width() < crop ? PadToMultiple(src.image, crop).image : src.image;
    const int top = static_cast<int>(rng.Below(full.height() - crop + 1));
    const int left = static_cast<int>(rng.Below(full.width() - crop + 1));
    ImagePlane patch = CropRegion(full, top, left, crop, crop);
    if (flip && rng.Below(2) == 1) patch = FlipHorizontal(patch);
    std::copy(patch.values().begin(), patch.values().end(), batch.images.sample(i));
    if (with_semantics) {
      Require(static_cast<int>(src.embedding.size()) == dim, ErrorKind::kModel,
              "caption embedding missing for " + src.id);
      std::copy(src.embedding.begin(), src.embedding.end(), batch.embeddings.sample(i));
    }
  }
  return batch;
}

RdLoss TrainStep(model::SelicModel<float>& model, const Batch& batch, nn::Adam<float>& adam, double lr, Rng& noise) {
  const std::vector<nn::Parameter<float>*> params = model.Parameters();
  for (nn::Parameter<float>* p : params) p->ZeroGrad();
  const nn::Var<float> image = nn::Constant(batch.images);
  const nn::Var<float> raw = model.config().semantic_enabled ? nn::Constant(batch.embeddings) : nullptr;
  const model::RdTerms<float> terms = model.TrainForward(image, raw, noise);
  const RdLoss loss = MakeRdLoss(static_cast<double>(terms.bits_y->value[0]) + terms.bits_z->value[0], terms.pixels,
                                 terms.mse->value[0], model.config().lambda_value);
  if (!std::isfinite(loss.total) || !std::isfinite(terms.loss->value[0])) {
    Fail(ErrorKind::kNumeric, "non-finite training loss (" + FiniteReport(loss) + ")");
  }
  nn::Backward(terms.loss);
  for (const nn::Parameter<float>* p : params) {
    const auto grad = p->grad.values();
    if (!std::all_of(grad.begin(), grad.end(), [](float g) { return std::isfinite(g); })) {
      Fail(ErrorKind::kNumeric, "non-finite gradient in " + p->name + " (" + FiniteReport(loss) + ")");
    }
  }
  adam.Step(params, lr);
  return loss;
}

model::Checkpoint MakeTrainingCheckpoint(model::SelicModel<float>& model, const nn::Adam<float>& adam,
                                         int epochs_done, int64_t step) {
  model::Checkpoint ckpt = model::ExportModel(model);
  ckpt.metadata["train.epochs_done"] = std::to_string(epochs_done);
  ckpt.metadata["train.step"] = std::to_string(step);
  ckpt.metadata["adam.steps"] = std::to_string(adam.steps());
  for (const auto& [name, mom] : adam.state()) {
    ckpt.tensors[kAdamM + name] = mom.m;
    ckpt.tensors[kAdamV + name] = mom.v;
  }
  return ckpt;
}

void RestoreTrainingCheckpoint(const model::Checkpoint& ckpt, model::SelicModel<float>& model, nn::Adam<float>& adam,
                               int* epochs_done, int64_t* step) {
  const auto meta = [&](const std::string& key) -> int64_t {
    const auto it = ckpt.metadata.find(key);
    Require(it != ckpt.metadata.end(), ErrorKind::kModel, "checkpoint has no training state (" + key + ")");
    return ParseInt(key, it->second);
  };
  model::ImportModel(ckpt, model);
  std::map<std::string, nn::Adam<float>::Moments> state;
  for (const auto& [name, tensor] : ckpt.tensors) {
    if (name.rfind(kAdamM, 0) != 0) continue;
    const std::string param = name.substr(std::string(kAdamM).size());
    const auto v = ckpt.tensors.find(kAdamV + param);
    Require(v != ckpt.tensors.end(), ErrorKind::kModel, "checkpoint optimizer state is incomplete for " + param);
    state[param] = {tensor, v->second};
  }
  adam.Restore(static_cast<uint64_t>(meta("adam.steps")), std::move(state));
  *epochs_done = static_cast<int>(meta("train.epochs_done"));
  *step = meta("train.step");
}

Trainer::Trainer(TrainConfig config, std::unique_ptr<semantic::SemanticPipeline> pipeline)
    : config_(std::move(config)), pipeline_(std::move(pipeline)) {
  config_.model.Validate();
  config_.schedule.Validate();
  if (config_.cache_dir.empty()) config_.cache_dir = config_.output_dir / "semantic_cache";
  model_ = std::make_unique<model::SelicModel<float>>(config_.model);
  dataset_ = Dataset::Load(config_.dataset_dir);
  if (config_.model.semantic_enabled) {
    if (!pipeline_) pipeline_ = semantic::MakeSemanticPipeline(config_.model);
    Require(pipeline_->dim() == config_.model.text_embed_dim, ErrorKind::kModel,
            "semantic pipeline width does not match text_embed_dim");
    semantic::SemanticCache cache(config_.cache_dir, *pipeline_);
    dataset_.AttachSemantics(cache);
  }
}

fs::path Trainer::CheckpointPath(int epochs_done) const {
  char name[32];
  std::snprintf(name, sizeof(name), "epoch_%04d.ckpt", epochs_done);
  return config_.output_dir / name;
}

bool Trainer::Resume() {
  int newest = 0;
  const std::regex pattern(R"(epoch_(\d{4,})\.ckpt)");
  for (const auto& entry : fs::directory_iterator(config_.output_dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) newest = std::max(newest, std::stoi(m[1].str()));
  }
  if (newest == 0) return false;
  const model::Checkpoint ckpt = model::ReadCheckpoint(CheckpointPath(newest));
  Require(ckpt.config == config_.model, ErrorKind::kConfig,
          "checkpoint " + CheckpointPath(newest).string() + " was trained with a different model config");
  RestoreTrainingCheckpoint(ckpt, *model_, adam_, &epochs_done_, &step_);
  LogInfo("resuming after epoch " + std::to_string(epochs_done_) + " (step " + std::to_string(step_) + ")");
  return true;
}

// Drops log rows past the resumed step so the log matches an uninterrupted run.
void Trainer::TruncateLog() const {
  const fs::path path = config_.output_dir / "train_log.csv";
  std::vector<std::string> kept = {kLogHeader};
  if (std::ifstream in(path); in) {
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (!line.empty() && std::stoll(line.substr(0, line.find(','))) <= step_) kept.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const std::string& line : kept) out << line << '\n';
}

void Trainer::Run(const std::function<void(const StepRecord&)>& on_step) {
  fs::create_directories(config_.output_dir);
  Resume();
  TruncateLog();
  std::ofstream log(config_.output_dir / "train_log.csv", std::ios::app);
  log.precision(9);
  const TrainSchedule& s = config_.schedule;
  const size_t n = dataset_.size();
  const int steps_per_epoch = static_cast<int>((n + s.batch_size - 1) / s.batch_size);
  const bool semantics = config_.model.semantic_enabled;
  const uint64_t frozen = semantics ? pipeline_->ParameterChecksum() : 0;

  while (epochs_done_ < s.epochs && (config_.max_steps == 0 || step_ < config_.max_steps)) {
    const int epoch = epochs_done_;
    // Everything random in an epoch derives from (seed, epoch), so resuming
    // at an epoch boundary replays the same stream.
    Rng rng(DeriveSeed(config_.model.seed, kEpochStreamTag + static_cast<uint64_t>(epoch)));
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
    const double lr = s.LearningRate(epoch);
    bool stopped = false;
    for (int b = 0; b < steps_per_epoch; ++b) {
      if (config_.max_steps != 0 && step_ >= config_.max_steps) {
        stopped = true;
        break;
      }
      std::vector<size_t> indices(s.batch_size);
      for (int i = 0; i < s.batch_size; ++i) indices[i] = order[(static_cast<size_t>(b) * s.batch_size + i) % n];
      const Batch batch = SampleBatch(dataset_, indices, s.crop, s.flip, semantics, rng);
      StepRecord rec;
      rec.loss = TrainStep(*model_, batch, adam_, lr, rng);
      rec.step = ++step_;
      rec.epoch = epoch;
      rec.lr = lr;
      log << rec.step << ',' << rec.loss.bpp << ',' << rec.loss.mse << ',' << rec.loss.total << ',' << lr << '\n';
      if (on_step) on_step(rec);
    }
    log.flush();
    if (stopped) break;
    ++epochs_done_;
    if (semantics) {
      Require(pipeline_->ParameterChecksum() == frozen, ErrorKind::kModel,
              "semantic backend parameters changed during training");
    }
    if (epochs_done_ % config_.checkpoint_every == 0 || epochs_done_ == s.epochs) {
      model::WriteCheckpoint(CheckpointPath(epochs_done_), MakeTrainingCheckpoint(*model_, adam_, epochs_done_, step_));
    }
  }
  model::WriteCheckpoint(config_.output_dir / "final.ckpt", MakeTrainingCheckpoint(*model_, adam_, epochs_done_, step_));
}

}  // namespace selic::train
