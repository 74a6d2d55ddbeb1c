// src/cli/pipeline-config.cc

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

#include "farfield/cli/pipeline-config.h"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "farfield/base/error.h"
#include "json.hpp"

namespace farfield {

namespace {

using Json = nlohmann::json;
using Handler = std::function<void(const Json &)>;

Error Bad(const std::string &what) {
  return Error(ErrorCode::kInvalidConfig, "config: " + what);
}

void Dispatch(const Json &obj, const std::string &where,
              const std::map<std::string, Handler> &handlers) {
  if (!obj.is_object()) throw Bad(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    auto h = handlers.find(it.key());
    if (h == handlers.end())
      throw Bad("unknown key '" + it.key() + "' in " + where);
    h->second(it.value());
  }
}

Handler Int(int *dst, const std::string &key) {
  return [dst, key](const Json &v) {
    if (!v.is_number_integer()) throw Bad("'" + key + "' must be an integer");
    *dst = v.get<int>();
  };
}

Handler Real(double *dst, const std::string &key) {
  return [dst, key](const Json &v) {
    if (!v.is_number()) throw Bad("'" + key + "' must be a number");
    *dst = v.get<double>();
  };
}

Handler Bool(bool *dst, const std::string &key) {
  return [dst, key](const Json &v) {
    if (!v.is_boolean()) throw Bad("'" + key + "' must be true or false");
    *dst = v.get<bool>();
  };
}

}  // namespace

PipelineConfig PipelineConfig::FromJson(const std::string &text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception &e) {
    throw Bad(std::string("not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  int window = cfg.enhance.stft.window_length(), hop = cfg.enhance.stft.hop(),
      fft = cfg.enhance.stft.fft_size();
  WindowKind kind = cfg.enhance.stft.window_kind();
  TrainConfig &tc = cfg.training;
  WpeConfig &wpe = cfg.enhance.wpe;
  GssConfig &gss = cfg.enhance.gss;

  Dispatch(doc, "config", {
      {"stft", [&](const Json &v) {
         Dispatch(v, "stft", {
             {"window_length", Int(&window, "window_length")},
             {"hop", Int(&hop, "hop")},
             {"fft_size", Int(&fft, "fft_size")},
             {"window", [&](const Json &w) {
                if (!w.is_string()) throw Bad("'window' must be a string");
                kind = ParseWindowKind(w.get<std::string>());
              }}});
       }},
      {"gss", [&](const Json &v) {
         Dispatch(v, "gss", {{"iterations", Int(&gss.iterations, "iterations")},
                             {"context_s", Real(&gss.context_s, "context_s")}});
       }},
      {"wpe", [&](const Json &v) {
         Dispatch(v, "wpe", {{"enabled", Bool(&cfg.enhance.wpe_enabled, "enabled")},
                             {"taps", Int(&wpe.taps, "taps")},
                             {"delay", Int(&wpe.delay, "delay")},
                             {"iterations", Int(&wpe.iterations, "iterations")}});
       }},
      {"reference_channel",
       Int(&cfg.enhance.reference_channel, "reference_channel")},
      {"augmentation_recipe", [&](const Json &v) {
         if (!v.is_string()) throw Bad("'augmentation_recipe' must be a path");
         cfg.augmentation_recipe = v.get<std::string>();
       }},
      {"training", [&](const Json &v) {
         Dispatch(v, "training", {
             {"lr_initial", Real(&tc.lr_initial, "lr_initial")},
             {"lr_final", Real(&tc.lr_final, "lr_final")},
             {"l2_coefficient", Real(&tc.l2_coefficient, "l2_coefficient")},
             {"epochs", Int(&tc.epochs, "epochs")},
             {"batch_size", Int(&tc.batch_size, "batch_size")},
             {"constraint_interval",
              Int(&tc.constraint_interval, "constraint_interval")},
             {"heldout_fraction", Real(&tc.heldout_fraction, "heldout_fraction")}});
       }},
      {"seed", [&](const Json &v) {
         if (!v.is_number_unsigned()) throw Bad("'seed' must be a non-negative integer");
         cfg.seed = v.get<uint64_t>();
       }}});

  cfg.enhance.stft = StftConfig(window, hop, fft, kind);
  if (gss.iterations < 1) throw Bad("gss iterations must be >= 1");
  if (gss.context_s < 0.0) throw Bad("gss context_s must be >= 0");
  if (cfg.enhance.reference_channel < 0)
    throw Bad("reference_channel must be >= 0");
  tc.Validate();
  if (cfg.seed) tc.seed = *cfg.seed;
  return cfg;
}

PipelineConfig PipelineConfig::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  PipelineConfig cfg = FromJson(ss.str());
  namespace fs = std::filesystem;
  if (!cfg.augmentation_recipe.empty() &&
      fs::path(cfg.augmentation_recipe).is_relative())
    cfg.augmentation_recipe =
        (fs::path(path).parent_path() / cfg.augmentation_recipe).string();
  return cfg;
}

}  // namespace farfield
