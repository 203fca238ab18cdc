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
// selic: encode, decode, evaluate, train, BD-rate and ablation reports.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "exit_code.h"
#include "selic/codec/image_codec.h"
#include "selic/core/error.h"
#include "selic/core/log.h"
#include "selic/eval/metrics.h"
#include "selic/eval/pipeline.h"
#include "selic/io/image_io.h"
#include "selic/train/trainer.h"

namespace selic::cli {
namespace {

namespace fs = std::filesystem;

std::vector<uint8_t> ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteBytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
}

// Picks the curve named label, or the only curve when label is empty.
eval::RdCurve SelectCurve(const fs::path& csv, const std::string& label) {
  std::vector<eval::RdCurve> curves = eval::ReadRdCsv(csv);
  if (label.empty()) {
    Require(curves.size() == 1, ErrorKind::kConfig,
            csv.string() + " holds " + std::to_string(curves.size()) + " curves; pick one with a label option");
    return curves[0];
  }
  for (eval::RdCurve& c : curves) {
    if (c.label == label) return c;
  }
  Fail(ErrorKind::kConfig, csv.string() + " has no curve labelled '" + label + "'");
}

struct EncodeArgs {
  fs::path input, output, model;
  std::string fusion, coder = "reference";
};

int Encode(const EncodeArgs& a) {
  eval::LoadedModel loaded = eval::LoadModel(a.model);
  const ModelConfig& config = loaded.config();
  if (!a.fusion.empty()) {
    Require(config.semantic_enabled && ParseFusionKind(a.fusion) == config.fusion, ErrorKind::kConfig,
            "--fusion " + a.fusion + " does not match the checkpoint (" +
                (config.semantic_enabled ? std::string(FusionKindName(config.fusion)) : "no semantic branch") + ")");
  }
  std::unique_ptr<semantic::SemanticPipeline> pipeline;
  if (config.semantic_enabled) pipeline = semantic::MakeSemanticPipeline(config);
  const std::unique_ptr<codec::EntropyCoder> coder = codec::MakeCoder(a.coder);
  const ImagePlane image = io::ReadImage(a.input);
  const codec::EncodedImage encoded = codec::EncodeImage(*loaded.model, image, pipeline.get(), *coder);
  WriteBytes(a.output, encoded.bytes);
  const double bpp = encoded.bytes.size() * 8.0 / (static_cast<double>(image.height()) * image.width());
  std::cout << a.output.string() << ": " << encoded.bytes.size() << " bytes, " << eval::FormatMetric(bpp, 4)
            << " bpp\n";
  if (encoded.stats.clamped > 0) {
    LogWarning(std::to_string(encoded.stats.clamped) + " latent symbols were clamped to the symbol range");
  }
  return kExitOk;
}

struct DecodeArgs {
  fs::path input, output, model;
  std::string coder = "reference";
};

int Decode(const DecodeArgs& a) {
  eval::LoadedModel loaded = eval::LoadModel(a.model);
  const std::unique_ptr<codec::EntropyCoder> coder = codec::MakeCoder(a.coder);
  const ImagePlane image = codec::DecodeImage(*loaded.model, ReadBytes(a.input), *coder);
  io::WriteImage(a.output, image);
  std::cout << a.output.string() << ": " << image.width() << "x" << image.height() << '\n';
  return kExitOk;
}

struct EvalArgs {
  fs::path dataset, csv, rd_csv, svg, streams;
  std::vector<fs::path> models;
  std::string label = "selic", coder = "reference";
};

int Evaluate(const EvalArgs& a) {
  const train::Dataset dataset = train::Dataset::Load(a.dataset);
  const fs::path streams = a.streams.empty() ? a.csv.parent_path() / "streams" : a.streams;
  std::vector<eval::EvalSummary> summaries;
  for (const fs::path& model : a.models) {
    summaries.push_back(eval::EvaluateCheckpoint(model, dataset, streams / model.stem(), a.coder));
    std::cout << eval::FormatEvalSummary(summaries.back());
  }
  eval::WriteEvalCsv(a.csv, summaries);
  if (!a.rd_csv.empty() || !a.svg.empty()) {
    const eval::RdCurve curve = eval::CurveFromSummaries(a.label, summaries);
    if (!a.rd_csv.empty()) eval::WriteRdCsv(a.rd_csv, {curve});
    if (!a.svg.empty()) WriteText(a.svg, eval::RdPlotSvg({curve}, "Rate-distortion"));
  }
  return kExitOk;
}

struct TrainArgs {
  fs::path config;
  long max_steps = -1;
};

int Train(const TrainArgs& a) {
  train::TrainConfig config = train::TrainConfig::Load(a.config);
  if (a.max_steps >= 0) config.max_steps = a.max_steps;
  train::Trainer trainer(config);
  trainer.Run([](const train::StepRecord& r) {
    if (r.step % 50 == 0) {
      LogInfo("step " + std::to_string(r.step) + " epoch " + std::to_string(r.epoch) + " loss " +
              eval::FormatMetric(r.loss.total, 4) + " bpp " + eval::FormatMetric(r.loss.bpp, 4) + " mse " +
              eval::FormatMetric(r.loss.mse, 6));
    }
  });
  std::cout << "trained " << trainer.step() << " steps, " << trainer.epochs_done() << " epochs; final weights in "
            << (config.output_dir / "final.ckpt").string() << '\n';
  return kExitOk;
}

struct BdArgs {
  fs::path test, anchor;
  std::string test_label, anchor_label;
};

int BdRateCommand(const BdArgs& a) {
  const eval::RdCurve test = SelectCurve(a.test, a.test_label);
  const eval::RdCurve anchor = SelectCurve(a.anchor, a.anchor_label);
  std::cout << "BD-rate " << test.label << " vs " << anchor.label << ": " << eval::FormatMetric(eval::BdRate(test, anchor), 3)
            << "%\nBD-PSNR: " << eval::FormatMetric(eval::BdPsnr(test, anchor), 4) << " dB\n";
  return kExitOk;
}

struct AblateFusionArgs {
  fs::path dataset, out;
  std::map<FusionKind, fs::path> checkpoints;
  std::string coder = "reference";
};

int AblateFusion(const AblateFusionArgs& a) {
  const train::Dataset dataset = train::Dataset::Load(a.dataset);
  fs::create_directories(a.out);
  const eval::FusionAblationReport report = eval::RunFusionAblation(a.checkpoints, dataset, a.out / "streams", a.coder);
  const std::string text = eval::FormatFusionAblation(report);
  eval::WriteFusionAblationCsv(a.out / "ablation_fusion.csv", report);
  WriteText(a.out / "ablation_fusion.txt", text);
  std::cout << text;
  if (!report.complete()) {
    std::cerr << "selic: fusion ablation incomplete; absent rows are marked\n";
    return kExitData;
  }
  return kExitOk;
}

struct AblateSemanticArgs {
  fs::path dataset, out;
  std::vector<fs::path> with, without;
  std::string coder = "reference";
};

int AblateSemantic(const AblateSemanticArgs& a) {
  const train::Dataset dataset = train::Dataset::Load(a.dataset);
  fs::create_directories(a.out);
  const eval::SemanticAblationReport report =
      eval::RunSemanticAblation(a.with, a.without, dataset, a.out / "streams", a.coder);
  const std::string text = eval::FormatSemanticAblation(report);
  eval::WriteSemanticAblationCsv(a.out / "ablation_semantic.csv", report);
  eval::WriteRdCsv(a.out / "ablation_semantic_rd.csv", {report.with_curve, report.without_curve});
  WriteText(a.out / "ablation_semantic.svg",
            eval::RdPlotSvg({report.with_curve, report.without_curve}, "Semantic modules removed"));
  WriteText(a.out / "ablation_semantic.txt", text);
  std::cout << text;
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"SELIC semantic-enhanced learned image codec"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "selic 0.1.0");
  std::function<int()> command;

  EncodeArgs enc;
  CLI::App* encode = app.add_subcommand("encode", "compress an image to a .selic stream");
  encode->add_option("-i,--input", enc.input, "input image (png, ppm, jpg)")->required()->check(CLI::ExistingFile);
  encode->add_option("-o,--output", enc.output, "output .selic file")->required();
  encode->add_option("--model", enc.model, "model checkpoint")->required();
  encode->add_option("--fusion", enc.fusion, "expected fusion strategy")->check(CLI::IsMember({"concat", "add", "mul"}));
  encode->add_option("--coder", enc.coder, "entropy coder backend")->check(CLI::IsMember({"reference", "fast"}));
  encode->callback([&] { command = [&] { return Encode(enc); }; });

  DecodeArgs dec;
  CLI::App* decode = app.add_subcommand("decode", "reconstruct an image from a .selic stream");
  decode->add_option("-i,--input", dec.input, "input .selic file")->required()->check(CLI::ExistingFile);
  decode->add_option("-o,--output", dec.output, "output image (png, ppm, jpg)")->required();
  decode->add_option("--model", dec.model, "model checkpoint")->required();
  decode->add_option("--coder", dec.coder, "entropy coder backend")->check(CLI::IsMember({"reference", "fast"}));
  decode->callback([&] { command = [&] { return Decode(dec); }; });

  EvalArgs ev;
  CLI::App* evaluate = app.add_subcommand("eval", "rate, PSNR and MS-SSIM over a directory of images");
  evaluate->add_option("--dataset", ev.dataset, "image directory")->required();
  evaluate->add_option("--model", ev.models, "checkpoint; repeat for an RD curve")->required();
  evaluate->add_option("--csv", ev.csv, "per-image results csv")->required();
  evaluate->add_option("--rd-csv", ev.rd_csv, "RD curve csv, one point per model");
  evaluate->add_option("--svg", ev.svg, "RD plot");
  evaluate->add_option("--label", ev.label, "curve label");
  evaluate->add_option("--streams", ev.streams, "where .selic files go (default: next to the csv)");
  evaluate->add_option("--coder", ev.coder, "entropy coder backend")->check(CLI::IsMember({"reference", "fast"}));
  evaluate->callback([&] { command = [&] { return Evaluate(ev); }; });

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "train a model from a config file");
  train->add_option("--config", tr.config, "training config")->required()->check(CLI::ExistingFile);
  train->add_option("--max-steps", tr.max_steps, "stop after this many optimizer steps");
  train->callback([&] { command = [&] { return Train(tr); }; });

  BdArgs bd;
  CLI::App* bdrate = app.add_subcommand("bdrate", "Bjontegaard delta rate between two RD csv files");
  bdrate->add_option("--test", bd.test, "test RD csv")->required()->check(CLI::ExistingFile);
  bdrate->add_option("--anchor", bd.anchor, "anchor RD csv")->required()->check(CLI::ExistingFile);
  bdrate->add_option("--test-label", bd.test_label, "curve to use from the test csv");
  bdrate->add_option("--anchor-label", bd.anchor_label, "curve to use from the anchor csv");
  bdrate->callback([&] { command = [&] { return BdRateCommand(bd); }; });

  CLI::App* ablate = app.add_subcommand("ablate", "ablation reports");
  ablate->require_subcommand(1);
  AblateFusionArgs af;
  fs::path mul, add, concat;
  CLI::App* fusion = ablate->add_subcommand("fusion", "compare fusion strategies");
  fusion->add_option("--dataset", af.dataset, "image directory")->required();
  fusion->add_option("--mul", mul, "element-wise multiplication checkpoint");
  fusion->add_option("--add", add, "element-wise addition checkpoint");
  fusion->add_option("--concat", concat, "channel concatenation checkpoint");
  fusion->add_option("--out", af.out, "report directory")->required();
  fusion->add_option("--coder", af.coder, "entropy coder backend")->check(CLI::IsMember({"reference", "fast"}));
  fusion->callback([&] {
    command = [&] {
      if (!mul.empty()) af.checkpoints[FusionKind::kMul] = mul;
      if (!add.empty()) af.checkpoints[FusionKind::kAdd] = add;
      if (!concat.empty()) af.checkpoints[FusionKind::kConcat] = concat;
      return AblateFusion(af);
    };
  });
  AblateSemanticArgs as;
  CLI::App* sem = ablate->add_subcommand("semantic", "paired RD points with and without the semantic modules");
  sem->add_option("--dataset", as.dataset, "image directory")->required();
  sem->add_option("--with", as.with, "checkpoints with the semantic branch")->required();
  sem->add_option("--without", as.without, "checkpoints without it, same lambdas")->required();
  sem->add_option("--out", as.out, "report directory")->required();
  sem->add_option("--coder", as.coder, "entropy coder backend")->check(CLI::IsMember({"reference", "fast"}));
  sem->callback([&] { command = [&] { return AblateSemantic(as); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    return command();
  } catch (const Error& e) {
    std::cerr << "selic: " << ErrorKindName(e.kind()) << ": " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "selic: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace
}  // namespace selic::cli

int main(int argc, char** argv) { return selic::cli::Main(argc, argv); }
