// tools/farfield-kit.cc

// Copyright 2026  farfield-kit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// farfield-kit: batch front end for enhancement, augmentation, room
// simulation and the toy acoustic-model trainer.
//
//   farfield-kit enhance   --audio A.wav --annotation A.json --speaker S --out E.wav
//   farfield-kit augment   --corpus DIR [--recipe R.json] --out DIR
//   farfield-kit train-toy --features F.txt --labels L.txt --arch NAME|SPEC.json --out M.ftdn
//   farfield-kit gradcheck --arch NAME|SPEC.json [--corrupt]
//   farfield-kit rir       (--room R.json | --default-room I) --out R.wav
//
// Common flags: --config PATH, --seed U64. Standard output carries one JSON
// object; failures print one line on standard error. Exit codes: 0 ok,
// 1 check failed, 2 configuration, 3 I/O or file format, 4 algorithmic,
// 5 training diverged.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "farfield/augmentation/augment.h"
#include "farfield/augmentation/room.h"
#include "farfield/base/error.h"
#include "farfield/cli/pipeline-config.h"
#include "farfield/enhancement/enhance.h"
#include "farfield/ftdnn/model-io.h"
#include "farfield/ftdnn/network.h"
#include "farfield/ftdnn/train.h"
#include "farfield/signal/wav-io.h"
#include "json.hpp"

namespace farfield {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

constexpr double kGradCheckTolerance = 1e-4;
constexpr double kGradCheckL2 = 1e-3;
constexpr int kGradCheckClasses = 4;
constexpr int kGradCheckWidth = 16;

enum ExitCode {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitAlgorithm = 4,
  kExitDiverged = 5,
};

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return kExitConfig;
    case ErrorCode::kIoError:
    case ErrorCode::kFormatError: return kExitIo;
    case ErrorCode::kTrainingDiverged: return kExitDiverged;
    default: return kExitAlgorithm;
  }
}

void Fail(const std::string &message) {
  std::string line = message;
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::cerr << "farfield-kit: " << line << std::endl;
}

void Emit(const Json &summary) { std::cout << summary.dump() << std::endl; }

struct Common {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out;

  PipelineConfig Config() const {
    PipelineConfig cfg =
        config_path.empty() ? PipelineConfig{} : PipelineConfig::Load(config_path);
    if (seed) {
      cfg.seed = seed;
      cfg.training.seed = *seed;
    }
    return cfg;
  }
};

std::string ReadText(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Preset name, or a path to a NetworkSpec JSON file.
NetworkSpec ResolveArch(const std::string &arch, int num_classes, int input_dim) {
  for (const char *name : kPresetNames)
    if (arch == name) return Preset(arch, num_classes, input_dim);
  if (arch.size() > 5 && arch.ends_with(".json"))
    return NetworkSpec::FromJson(ReadText(arch));
  throw Error(ErrorCode::kInvalidConfig,
              "unknown architecture '" + arch +
                  "' (expected ftdnn15, ftdnn18, ftdnn18_lstm3 or a .json spec)");
}

int RunEnhance(const Common &common, const std::string &audio,
               const std::string &annotation_path, const std::string &speaker) {
  const PipelineConfig cfg = common.Config();
  const Waveform wave = ReadWav(audio);
  const ActivityAnnotation annotation = ActivityAnnotation::Load(annotation_path);
  const EnhanceResult r =
      EnhanceUtteranceDetailed(wave, annotation, speaker, cfg.enhance);
  WriteWav(common.out, r.output, WavSampleFormat::kFloat32);
  Emit({{"frames", r.masks.NumFrames()},
        {"iterations", cfg.enhance.gss.iterations},
        {"final_ll", r.state.log_likelihood.empty() ? 0.0
                                                    : r.state.log_likelihood.back()},
        {"sample_rate", r.output.SampleRate()},
        {"samples", r.output.Length()}});
  return kExitOk;
}

int RunAugment(const Common &common, const std::string &corpus,
               const std::string &recipe_path) {
  const PipelineConfig cfg = common.Config();
  const std::string path = !recipe_path.empty() ? recipe_path : cfg.augmentation_recipe;
  const AugmentationRecipe recipe =
      path.empty() ? AugmentationRecipe::Default() : AugmentationRecipe::Load(path);
  if (!fs::is_directory(corpus))
    throw Error(ErrorCode::kIoError, "corpus directory not found: " + corpus);
  const AugmentManifest m = AugmentCorpus(corpus, recipe, common.out);
  for (const auto &w : m.warnings) std::cerr << "warning: " << w << "\n";
  if (m.inputs == 0) std::cerr << "warning: no WAV files in " << corpus << "\n";
  Emit({{"inputs", m.inputs},
        {"skipped", m.skipped},
        {"outputs", m.rows.size()},
        {"copies_per_input", recipe.rooms.size() * recipe.speed_factors.size()},
        {"manifest", (fs::path(common.out) / "manifest.jsonl").string()}});
  return kExitOk;
}

int RunTrainToy(const Common &common, const std::string &features_path,
                const std::string &labels_path, const std::string &arch,
                std::string log_path) {
  const PipelineConfig cfg = common.Config();
  const std::vector<Sequence> features = ReadFeatureText(features_path);
  const std::vector<Labels> labels = ReadLabelText(labels_path);
  if (features.empty())
    throw Error(ErrorCode::kFormatError, features_path + " holds no utterances");
  int num_classes = 0;
  for (const auto &l : labels)
    for (int y : l) num_classes = std::max(num_classes, y + 1);
  const NetworkSpec spec =
      ResolveArch(arch, num_classes, static_cast<int>(features.front().cols()));

  if (log_path.empty()) log_path = common.out + ".log.jsonl";
  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw Error(ErrorCode::kIoError, "cannot write " + log_path);
  const TrainResult r = TrainToy(spec, features, labels, cfg.training,
                                 [&](const EpochLog &e) {
                                   log << EpochLogJson(e) << "\n";
                                   log.flush();
                                 });
  if (!log) throw Error(ErrorCode::kIoError, "write error on " + log_path);
  WriteModel(common.out, {spec.input_dim, r.params, r.normalization});
  Emit({{"epochs", r.log.size()},
        {"final_loss", r.log.back().loss},
        {"frame_acc", r.heldout_accuracy},
        {"max_orth_err", r.log.back().max_orth_err},
        {"params", ParamCount(spec)}});
  return kExitOk;
}

int RunGradCheck(const Common &common, const std::string &arch, bool corrupt) {
  const PipelineConfig cfg = common.Config();
  const NetworkSpec full = ResolveArch(arch, kGradCheckClasses, 40);
  int widest = 1;
  for (const auto &l : full.layers)
    widest = std::max({widest, l.hidden, l.cell, l.recurrent + l.nonrecurrent});
  const int divisor = std::max(1, widest / kGradCheckWidth);
  const NetworkSpec spec = ScaleSpec(full, divisor);
  const GradCheckFixture fx = MakeGradCheckFixture(spec, cfg.seed.value_or(0));
  const GradCheckResult r = GradCheck(fx.params, fx.features, fx.labels,
                                      kGradCheckL2, 1e-5, corrupt);
  const bool ok = r.max_rel_error <= kGradCheckTolerance;
  Emit({{"arch", arch},
        {"divisor", divisor},
        {"params", r.num_params},
        {"kinked", r.kinked},
        {"max_rel_error", r.max_rel_error},
        {"worst_index", r.worst_index},
        {"pass", ok}});
  if (!ok) {
    Fail("gradient check failed: max relative error " +
         std::to_string(r.max_rel_error) + " > 1e-4");
    return kExitCheckFailed;
  }
  return kExitOk;
}

int RunRir(const Common &common, const std::string &room_path,
           std::optional<int> default_room) {
  RoomSpec room;
  if (default_room) {
    const auto rooms = DefaultRooms();
    if (*default_room < 0 || *default_room >= static_cast<int>(rooms.size()))
      throw Error(ErrorCode::kInvalidConfig,
                  "--default-room must lie in [0, " + std::to_string(rooms.size()) + ")");
    room = rooms[*default_room];
  } else {
    room = RoomSpec::FromJson(ReadText(room_path));
  }
  const RoomImpulseResponse rir = SimulateRir(room);
  WriteWav(common.out, Waveform(rir.taps, rir.sample_rate_hz),
           WavSampleFormat::kFloat32);
  Json t60 = Json::array();
  for (int m = 0; m < rir.NumMics(); ++m)
    t60.push_back(SchroederT60(rir.Channel(m), rir.sample_rate_hz));
  Emit({{"mics", rir.NumMics()},
        {"length", rir.Length()},
        {"sample_rate", rir.sample_rate_hz},
        {"t60_s", t60},
        {"sabine_t60_s", SabineT60(room)},
        {"direct_path_index", rir.direct_path_index}});
  return kExitOk;
}

int Main(int argc, char **argv) {
  CLI::App app{"Far-field speech enhancement, augmentation and f-tdnn tools",
               "farfield-kit"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Common common;
  uint64_t seed = 0;
  app.add_option("--config", common.config_path, "pipeline configuration (JSON)");
  auto *seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--out", common.out, "output path");

  std::string audio, annotation, speaker, corpus, recipe, features, labels, arch,
      log_path, room;
  int default_room = 0;
  bool corrupt = false;

  auto *enhance = app.add_subcommand("enhance", "GSS + MVDR enhancement of one utterance");
  enhance->add_option("--audio", audio, "multi-channel WAV")->required();
  enhance->add_option("--annotation", annotation, "activity annotation (JSON)")->required();
  enhance->add_option("--speaker", speaker, "target speaker id")->required();

  auto *augment = app.add_subcommand("augment", "speed + reverberation augmentation");
  augment->add_option("--corpus", corpus, "directory of WAV files")->required();
  augment->add_option("--recipe", recipe, "augmentation recipe (JSON)");

  auto *train = app.add_subcommand("train-toy", "cross-entropy training of an f-tdnn");
  train->add_option("--features", features, "feature text file")->required();
  train->add_option("--labels", labels, "label text file")->required();
  train->add_option("--arch", arch, "preset name or spec JSON")->required();
  train->add_option("--log", log_path, "training log (JSON lines)");

  auto *gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("--arch", arch, "preset name or spec JSON")->required();
  gradcheck->add_flag("--corrupt", corrupt, "inject a 10% gradient fault");

  auto *rir = app.add_subcommand("rir", "image-source room impulse response");
  auto *room_opt = rir->add_option("--room", room, "room spec (JSON)");
  auto *default_opt = rir->add_option("--default-room", default_room, "default room index");
  room_opt->excludes(default_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    Fail(std::string("InvalidConfig: ") + e.what());
    return kExitConfig;
  }
  if (seed_opt->count()) common.seed = seed;

  try {
    const bool needs_out = !gradcheck->parsed();
    if (needs_out && common.out.empty())
      throw Error(ErrorCode::kInvalidConfig, "--out is required");
    if (enhance->parsed()) return RunEnhance(common, audio, annotation, speaker);
    if (augment->parsed()) return RunAugment(common, corpus, recipe);
    if (train->parsed()) return RunTrainToy(common, features, labels, arch, log_path);
    if (gradcheck->parsed()) return RunGradCheck(common, arch, corrupt);
    if (room_opt->count() == 0 && default_opt->count() == 0)
      throw Error(ErrorCode::kInvalidConfig, "rir needs --room or --default-room");
    return RunRir(common, room,
                  default_opt->count() ? std::optional<int>(default_room) : std::nullopt);
  } catch (const Error &e) {
    Fail(e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception &e) {
    Fail(e.what());
    return kExitAlgorithm;
  }
}

}  // namespace
}  // namespace farfield

int main(int argc, char **argv) { return farfield::Main(argc, argv); }
