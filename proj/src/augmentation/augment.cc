// src/augmentation/augment.cc

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

#include "farfield/augmentation/augment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "farfield/base/error.h"
#include "farfield/base/random.h"
#include "farfield/signal/fft.h"
#include "farfield/signal/resample.h"
#include "farfield/signal/wav-io.h"
#include "json.hpp"

namespace farfield {

namespace fs = std::filesystem;

namespace {

// Short kernels (identity rooms, tests) are convolved directly so that a unit
// impulse reproduces its input bit for bit.
constexpr size_t kDirectConvolutionLimit = 64;

std::vector<double> Convolve(std::span<const double> x,
                             std::span<const double> h) {
  if (std::min(x.size(), h.size()) > kDirectConvolutionLimit)
    return FftConvolve(x, h);
  std::vector<double> out(x.size() + h.size() - 1, 0.0);
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = 0; j < h.size(); ++j) out[i + j] += x[i] * h[j];
  return out;
}

std::string FactorTag(double factor) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", factor);
  return buf;
}

}  // namespace

Waveform ConvolveReverb(const Waveform &mono, const RoomImpulseResponse &rir) {
  if (mono.NumChannels() != 1)
    throw Error(ErrorCode::kChannelMismatch,
                "reverberation expects a mono source");
  if (mono.SampleRate() != rir.sample_rate_hz)
    throw Error(ErrorCode::kRateMismatch,
                "signal at " + std::to_string(mono.SampleRate()) +
                    " Hz, RIR at " + std::to_string(rir.sample_rate_hz) +
                    " Hz");
  const std::vector<double> x = mono.Channel(0);
  const Eigen::Index out_len = mono.Length() + rir.Length() - 1;
  Eigen::MatrixXd out(rir.NumMics(), out_len);
  for (int m = 0; m < rir.NumMics(); ++m) {
    const std::vector<double> h = rir.Channel(m);
    const std::vector<double> y = Convolve(x, h);
    for (Eigen::Index n = 0; n < out_len; ++n) out(m, n) = y[n];
  }
  return Waveform(std::move(out), mono.SampleRate());
}

Waveform SpeedPerturb(const Waveform &wave, double factor) {
  return Resample(wave, factor);
}

AugmentationRecipe AugmentationRecipe::Default() {
  AugmentationRecipe recipe;
  recipe.rooms = DefaultRooms();
  return recipe;
}

AugmentationRecipe AugmentationRecipe::FromJson(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("recipe is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw Error(ErrorCode::kInvalidConfig, "recipe must be a JSON object");
  AugmentationRecipe recipe = Default();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "rooms") {
      if (!it.value().is_array())
        throw Error(ErrorCode::kInvalidConfig, "'rooms' must be an array");
      recipe.rooms.clear();
      for (const auto &room : it.value()) {
        recipe.rooms.push_back(RoomSpec::FromJson(room.dump()));
        recipe.rooms.back().Validate();
      }
    } else if (it.key() == "speed_factors") {
      if (!it.value().is_array())
        throw Error(ErrorCode::kInvalidConfig,
                    "'speed_factors' must be an array");
      recipe.speed_factors.clear();
      for (const auto &f : it.value()) {
        if (!f.is_number() || !(f.get<double>() >= 0.5) ||
            !(f.get<double>() <= 2.0))
          throw Error(ErrorCode::kInvalidConfig,
                      "speed factors must be numbers in [0.5, 2.0]");
        recipe.speed_factors.push_back(f.get<double>());
      }
    } else {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown recipe key '" + it.key() + "'");
    }
  }
  return recipe;
}

AugmentationRecipe AugmentationRecipe::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

std::string ManifestRow::ToJson() const {
  nlohmann::json j = {
      {"source", source}, {"room", room}, {"factor", factor}, {"output", output}};
  return j.dump();
}

AugmentManifest AugmentCorpus(const std::string &corpus_dir,
                              const AugmentationRecipe &recipe,
                              const std::string &out_dir) {
  std::vector<RoomImpulseResponse> rirs;
  rirs.reserve(recipe.rooms.size());
  for (const auto &room : recipe.rooms) rirs.push_back(SimulateRir(room));
  return AugmentCorpusWithRirs(corpus_dir, rirs, recipe.speed_factors,
                               out_dir);
}

AugmentManifest AugmentCorpusWithRirs(
    const std::string &corpus_dir, const std::vector<RoomImpulseResponse> &rirs,
    const std::vector<double> &speed_factors, const std::string &out_dir) {
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec))
    throw Error(ErrorCode::kIoError, "corpus directory " + corpus_dir +
                                         " does not exist");
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw Error(ErrorCode::kIoError, "cannot create output directory " +
                                         out_dir);
  const fs::path manifest_path = fs::path(out_dir) / "manifest.jsonl";
  std::ofstream manifest(manifest_path, std::ios::trunc);
  if (!manifest)
    throw Error(ErrorCode::kIoError,
                "cannot write " + manifest_path.string());

  std::vector<fs::path> inputs;
  for (const auto &entry : fs::directory_iterator(corpus_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());

  AugmentManifest result;
  result.inputs = static_cast<int>(inputs.size());
  for (const auto &path : inputs) {
    Waveform wave;
    try {
      wave = ReadWav(path.string());
    } catch (const Error &e) {
      ++result.skipped;
      result.warnings.push_back("skipping " + path.string() + ": " + e.what());
      continue;
    }
    // Training audio is mono; multichannel inputs contribute channel 0.
    const Waveform mono = wave.NumChannels() == 1 ? wave : wave.SelectChannel(0);
    for (double factor : speed_factors) {
      const Waveform perturbed = SpeedPerturb(mono, factor);
      for (size_t r = 0; r < rirs.size(); ++r) {
        RoomImpulseResponse mic0;
        mic0.taps = rirs[r].taps.topRows(1);
        mic0.sample_rate_hz = rirs[r].sample_rate_hz;
        mic0.direct_path_index = {rirs[r].direct_path_index.at(0)};
        const Waveform out = ConvolveReverb(perturbed, mic0);
        const fs::path out_path =
            fs::path(out_dir) / (path.stem().string() + "-sp" +
                                 FactorTag(factor) + "-room" +
                                 std::to_string(r) + ".wav");
        WriteWav(out_path.string(), out, WavSampleFormat::kFloat32);
        ManifestRow row{path.string(), static_cast<int>(r), factor,
                        out_path.string()};
        manifest << row.ToJson() << '\n';
        result.rows.push_back(std::move(row));
      }
    }
  }
  manifest.flush();
  if (!manifest)
    throw Error(ErrorCode::kIoError,
                "failed writing " + manifest_path.string());
  return result;
}

Scene SynthScene(const RoomSpec &room, const std::vector<SceneSource> &sources,
                 double noise_snr_db, uint64_t seed) {
  if (sources.empty())
    throw Error(ErrorCode::kInvalidConfig, "scene needs at least one source");
  const Eigen::Index len = sources[0].signal.Length();
  const int sr = sources[0].signal.SampleRate();
  const int num_mics = static_cast<int>(room.mic_positions_m.size());
  if (sr != room.sample_rate_hz)
    throw Error(ErrorCode::kRateMismatch, "source and room sample rates differ");

  Scene scene;
  std::vector<ActivitySegment> segments;
  Eigen::MatrixXd mixture = Eigen::MatrixXd::Zero(num_mics, len);
  for (const auto &src : sources) {
    if (src.signal.NumChannels() != 1)
      throw Error(ErrorCode::kChannelMismatch, "scene sources must be mono");
    if (src.signal.Length() != len || src.signal.SampleRate() != sr)
      throw Error(ErrorCode::kShapeMismatch,
                  "scene sources must share length and sample rate");
    RoomSpec placed = room;
    placed.source_position_m = src.position_m;
    const RoomImpulseResponse rir = SimulateRir(placed);

    auto activity = src.activity;
    if (activity.empty())
      activity.push_back({0.0, static_cast<double>(len) / sr});
    Eigen::MatrixXd gated = src.signal.samples();
    for (Eigen::Index n = 0; n < len; ++n) {
      const double t = static_cast<double>(n) / sr;
      bool active = false;
      for (const auto &[start, end] : activity)
        active = active || (t >= start && t < end);
      if (!active) gated(0, n) = 0.0;
    }
    for (const auto &[start, end] : activity)
      segments.push_back({src.speaker, start, end});

    const Waveform wet = ConvolveReverb(Waveform(std::move(gated), sr), rir);
    Eigen::MatrixXd stem = wet.samples().leftCols(len);
    mixture += stem;
    scene.stems.emplace_back(std::move(stem), sr);
  }

  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(num_mics, len);
  if (std::isfinite(noise_snr_db)) {
    const double power = mixture.squaredNorm() / mixture.size();
    const double stddev = std::sqrt(power / std::pow(10.0, noise_snr_db / 10.0));
    Rng rng(seed);
    for (Eigen::Index n = 0; n < len; ++n)
      for (int m = 0; m < num_mics; ++m) noise(m, n) = stddev * rng.Gauss();
  }
  scene.mixture = Waveform(mixture + noise, sr);
  scene.noise = Waveform(std::move(noise), sr);
  scene.annotation = ActivityAnnotation(std::move(segments));
  return scene;
}

}  // namespace farfield
