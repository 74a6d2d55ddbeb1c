// src/enhancement/enhance.cc

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

#include "farfield/enhancement/enhance.h"

#include <algorithm>

#include "farfield/base/error.h"

namespace farfield {

EnhanceResult EnhanceUtteranceDetailed(const Waveform &wave,
                                       const ActivityAnnotation &annotation,
                                       const std::string &target_speaker,
                                       const EnhanceConfig &config) {
  if (wave.NumChannels() < 2)
    throw Error(ErrorCode::kNeedsMultichannel,
                "enhancement needs a multichannel recording");
  if (config.reference_channel < 0 ||
      config.reference_channel >= wave.NumChannels())
    throw Error(ErrorCode::kInvalidConfig,
                "reference channel " + std::to_string(config.reference_channel) +
                    " out of range");
  if (!annotation.HasSpeaker(target_speaker))
    throw Error(ErrorCode::kInvalidConfig,
                "target speaker '" + target_speaker + "' is not annotated");

  ComplexSpectrogram spec = Stft(wave, config.stft);
  if (config.wpe_enabled) spec = WpeDereverb(spec, config.wpe);

  GssResult gss = EstimateMasksGss(spec, annotation, config.gss);
  EnhanceResult result;
  result.target_mask = config.target_mask_override
                           ? *config.target_mask_override
                           : gss.masks.Source(gss.masks.IndexOf(target_speaker));
  const Eigen::MatrixXd noise_mask =
      Eigen::MatrixXd::Ones(result.target_mask.rows(),
                            result.target_mask.cols()) -
      result.target_mask;

  const SpatialCovariance phi_s =
      ComputeSpatialCovariance(spec, result.target_mask);
  const SpatialCovariance phi_n = ComputeSpatialCovariance(spec, noise_mask);
  result.steering = EstimateSteeringVectors(phi_s, config.reference_channel);
  result.weights = MvdrWeights(phi_n, result.steering);
  const Waveform full = Istft(ApplyBeamformer(spec, result.weights));

  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(1, wave.Length());
  const Eigen::Index keep = std::min(wave.Length(), full.Length());
  samples.leftCols(keep) = full.samples().leftCols(keep);
  result.output = Waveform(std::move(samples), wave.SampleRate());
  result.masks = std::move(gss.masks);
  result.state = std::move(gss.state);
  return result;
}

Waveform EnhanceUtterance(const Waveform &wave,
                          const ActivityAnnotation &annotation,
                          const std::string &target_speaker,
                          const EnhanceConfig &config) {
  return EnhanceUtteranceDetailed(wave, annotation, target_speaker, config)
      .output;
}

}  // namespace farfield
