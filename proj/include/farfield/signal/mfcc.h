// include/farfield/signal/mfcc.h

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

#ifndef FARFIELD_SIGNAL_MFCC_H_
#define FARFIELD_SIGNAL_MFCC_H_

#include <vector>

#include <Eigen/Dense>

#include "farfield/signal/waveform.h"

namespace farfield {

struct FeatureConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int num_mel_bins = 40;
  int num_ceps = 13;
  double preemph_coeff = 0.97;
  double low_freq_hz = 20.0;
  double high_freq_hz = 0.0;  // <= 0 means Nyquist
  double log_floor = 1e-10;   // applied to mel power before the log

  int WindowSamples(int sample_rate_hz) const;
  int HopSamples(int sample_rate_hz) const;
};

double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filters equally spaced on the HTK mel scale, applied to a
// one-sided power spectrum of `fft_size` points.
class MelFilterbank {
 public:
  MelFilterbank(int num_bins, int fft_size, int sample_rate_hz,
                double low_freq_hz, double high_freq_hz);

  int NumBins() const { return static_cast<int>(weights_.rows()); }
  // Weight of band `band` at frequency `hz` (direct triangle evaluation).
  double Response(int band, double hz) const;
  double CenterHz(int band) const { return centers_hz_[band + 1]; }
  // bands x (fft_size/2 + 1)
  const Eigen::MatrixXd &weights() const { return weights_; }

 private:
  Eigen::MatrixXd weights_;
  std::vector<double> centers_hz_;  // num_bins + 2 edge/center frequencies
};

// Linear-power mel filterbank energies, frames x num_mel_bins.
// Requires mono input at >= 8 kHz (ChannelMismatch / InvalidConfig).
Eigen::MatrixXd ComputeMelEnergies(const Waveform &wave,
                                   const FeatureConfig &config);

// frames x num_ceps cepstra (orthonormal DCT-II of floored log mel power).
Eigen::MatrixXd ComputeMfcc(const Waveform &wave, const FeatureConfig &config);

}  // namespace farfield

#endif  // FARFIELD_SIGNAL_MFCC_H_
