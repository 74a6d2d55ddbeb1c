// include/farfield/cli/pipeline-config.h

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

#ifndef FARFIELD_CLI_PIPELINE_CONFIG_H_
#define FARFIELD_CLI_PIPELINE_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "farfield/enhancement/enhance.h"
#include "farfield/ftdnn/train.h"

namespace farfield {

// Configuration shared by the farfield-kit subcommands:
//   {"stft": {"window_length", "hop", "fft_size", "window"},
//    "gss": {"iterations", "context_s"},
//    "wpe": {"enabled", "taps", "delay", "iterations"},
//    "reference_channel": 0,
//    "augmentation_recipe": "recipe.json",
//    "training": {"lr_initial", "lr_final", "l2_coefficient", "epochs",
//                 "batch_size", "constraint_interval", "heldout_fraction"},
//    "seed": 0}
// Every key is optional; unknown keys and mistyped values raise
// InvalidConfig. A relative recipe path is resolved against the config
// file's directory by Load().
struct PipelineConfig {
  EnhanceConfig enhance;
  std::string augmentation_recipe;
  TrainConfig training;
  std::optional<uint64_t> seed;

  static PipelineConfig FromJson(const std::string &text);
  // IoError if the file cannot be read.
  static PipelineConfig Load(const std::string &path);
};

}  // namespace farfield

#endif  // FARFIELD_CLI_PIPELINE_CONFIG_H_
