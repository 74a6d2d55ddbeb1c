// include/farfield/signal/waveform.h

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

#ifndef FARFIELD_SIGNAL_WAVEFORM_H_
#define FARFIELD_SIGNAL_WAVEFORM_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace farfield {

// Multi-channel time-domain audio. Rows are channels, columns are samples.
// Immutable after construction; the constructor rejects a non-positive
// sample rate and non-finite samples.
class Waveform {
 public:
  Waveform() = default;
  Waveform(Eigen::MatrixXd samples, int sample_rate_hz);

  static Waveform Mono(std::span<const double> samples, int sample_rate_hz);
  static Waveform Zeros(int num_channels, Eigen::Index length,
                        int sample_rate_hz);

  int NumChannels() const { return static_cast<int>(samples_.rows()); }
  Eigen::Index Length() const { return samples_.cols(); }
  int SampleRate() const { return sample_rate_hz_; }
  double Duration() const {
    return static_cast<double>(Length()) / sample_rate_hz_;
  }

  const Eigen::MatrixXd &samples() const { return samples_; }
  std::vector<double> Channel(int c) const;
  Waveform SelectChannel(int c) const;

  double Energy() const { return samples_.squaredNorm(); }

 private:
  Eigen::MatrixXd samples_;
  int sample_rate_hz_ = 16000;
};

}  // namespace farfield

#endif  // FARFIELD_SIGNAL_WAVEFORM_H_
