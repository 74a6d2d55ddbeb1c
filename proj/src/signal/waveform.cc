// src/signal/waveform.cc

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

#include "farfield/signal/waveform.h"

#include <string>

#include "farfield/base/error.h"

namespace farfield {

Waveform::Waveform(Eigen::MatrixXd samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (sample_rate_hz_ <= 0)
    throw Error(ErrorCode::kInvalidConfig,
                "sample rate must be positive, got " +
                    std::to_string(sample_rate_hz_));
  if (!samples_.allFinite())
    throw Error(ErrorCode::kFormatError, "waveform contains NaN or Inf");
}

Waveform Waveform::Mono(std::span<const double> samples, int sample_rate_hz) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) m(0, i) = samples[i];
  return Waveform(std::move(m), sample_rate_hz);
}

Waveform Waveform::Zeros(int num_channels, Eigen::Index length,
                         int sample_rate_hz) {
  return Waveform(Eigen::MatrixXd::Zero(num_channels, length), sample_rate_hz);
}

std::vector<double> Waveform::Channel(int c) const {
  std::vector<double> out(static_cast<size_t>(Length()));
  for (Eigen::Index i = 0; i < Length(); ++i) out[i] = samples_(c, i);
  return out;
}

Waveform Waveform::SelectChannel(int c) const {
  if (c < 0 || c >= NumChannels())
    throw Error(ErrorCode::kChannelMismatch,
                "channel " + std::to_string(c) + " out of range");
  return Waveform(samples_.row(c), sample_rate_hz_);
}

}  // namespace farfield
