// include/farfield/augmentation/augment.h

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

#ifndef FARFIELD_AUGMENTATION_AUGMENT_H_
#define FARFIELD_AUGMENTATION_AUGMENT_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "farfield/augmentation/room.h"
#include "farfield/enhancement/annotation.h"
#include "farfield/signal/waveform.h"

namespace farfield {

// Full linear convolution of a mono signal with every mic of `rir`.
// Output has rir.NumMics() channels and length len + rir_len - 1.
// RateMismatch if sample rates differ, ChannelMismatch for multichannel input.
Waveform ConvolveReverb(const Waveform &mono, const RoomImpulseResponse &rir);

// Speed perturbation by `factor`: length round(len / factor), pitch scaled by
// factor, sample rate unchanged.
Waveform SpeedPerturb(const Waveform &wave, double factor);

struct AugmentationRecipe {
  std::vector<RoomSpec> rooms;
  std::vector<double> speed_factors{0.9, 1.0, 1.1};

  int NumCopies() const {
    return static_cast<int>(rooms.size() * speed_factors.size());
  }

  // Five default rooms and the 3-way speed scheme: 15 copies.
  static AugmentationRecipe Default();
  // {"rooms": [RoomSpec...], "speed_factors": [...]}; either key may be
  // omitted to take the default. Unknown keys are rejected (InvalidConfig).
  static AugmentationRecipe FromJson(const std::string &text);
  static AugmentationRecipe Load(const std::string &path);
};

struct ManifestRow {
  std::string source;
  int room = 0;
  double factor = 1.0;
  std::string output;

  std::string ToJson() const;
};

struct AugmentManifest {
  std::vector<ManifestRow> rows;
  int inputs = 0;   // WAV files found
  int skipped = 0;  // of those, unreadable
  std::vector<std::string> warnings;
};

// For every *.wav in corpus_dir (sorted by name): speed perturbation first,
// then reverberation with mic 0 of each room's RIR, written as 32-bit float
// WAV into out_dir together with manifest.jsonl. Unreadable inputs are
// skipped with a warning. IoError if out_dir cannot be created or written.
AugmentManifest AugmentCorpus(const std::string &corpus_dir,
                              const AugmentationRecipe &recipe,
                              const std::string &out_dir);

// Same, with precomputed impulse responses (one per room) instead of
// simulating recipe.rooms.
AugmentManifest AugmentCorpusWithRirs(
    const std::string &corpus_dir, const std::vector<RoomImpulseResponse> &rirs,
    const std::vector<double> &speed_factors, const std::string &out_dir);

struct SceneSource {
  std::string speaker;
  Waveform signal;  // mono
  Eigen::Vector3d position_m;
  // Active intervals in seconds; empty means active throughout.
  std::vector<std::pair<double, double>> activity;
};

struct Scene {
  Waveform mixture;            // mics x len
  ActivityAnnotation annotation;
  std::vector<Waveform> stems;  // reverberant, gated image of each source
  Waveform noise;               // mics x len (zeros for infinite SNR)
};

// Mixes gated, reverberated sources in `room` (its source_position_m is
// replaced per source) and adds white Gaussian noise at `noise_snr_db`
// relative to the mixture power; +inf disables the noise. All sources must
// share length and sample rate, and the output keeps that length.
Scene SynthScene(const RoomSpec &room, const std::vector<SceneSource> &sources,
                 double noise_snr_db, uint64_t seed);

}  // namespace farfield

#endif  // FARFIELD_AUGMENTATION_AUGMENT_H_
