// include/farfield/enhancement/enhance.h

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

#ifndef FARFIELD_ENHANCEMENT_ENHANCE_H_
#define FARFIELD_ENHANCEMENT_ENHANCE_H_

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "farfield/enhancement/annotation.h"
#include "farfield/enhancement/beamformer.h"
#include "farfield/enhancement/gss.h"
#include "farfield/enhancement/wpe.h"
#include "farfield/signal/stft.h"
#include "farfield/signal/waveform.h"

namespace farfield {

struct EnhanceConfig {
  StftConfig stft{1024, 256, 1024, WindowKind::kSqrtHann};
  GssConfig gss;
  bool wpe_enabled = false;
  WpeConfig wpe;
  int reference_channel = 0;
  // Replaces the target speaker's GSS mask (T x F) when set. The noise
  // covariance still uses 1 - mask.
  std::optional<Eigen::MatrixXd> target_mask_override;
};

struct EnhanceResult {
  Waveform output;  // mono, same length as the input
  TimeFrequencyMask masks;
  CacgmmState state;
  Eigen::MatrixXd target_mask;  // T x F mask actually used
  BinVectors steering;
  BinVectors weights;
};

// stft -> [wpe] -> gss -> covariances -> steering -> mvdr -> istft.
// NeedsMultichannel for mono input, InvalidConfig for an unknown target or
// reference channel; other errors propagate from the stages.
EnhanceResult EnhanceUtteranceDetailed(const Waveform &wave,
                                       const ActivityAnnotation &annotation,
                                       const std::string &target_speaker,
                                       const EnhanceConfig &config = {});

Waveform EnhanceUtterance(const Waveform &wave,
                          const ActivityAnnotation &annotation,
                          const std::string &target_speaker,
                          const EnhanceConfig &config = {});

}  // namespace farfield

#endif  // FARFIELD_ENHANCEMENT_ENHANCE_H_
