// include/farfield/signal/stft.h

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

#ifndef FARFIELD_SIGNAL_STFT_H_
#define FARFIELD_SIGNAL_STFT_H_

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "farfield/signal/waveform.h"

namespace farfield {

enum class WindowKind { kHann, kSqrtHann, kHamming, kRectangular };

const char *WindowKindName(WindowKind kind);
WindowKind ParseWindowKind(const std::string &name);

// Periodic (DFT-even) window of the given length.
std::vector<double> MakeWindow(WindowKind kind, int length);

// Analysis/synthesis configuration. sqrt_hann resynthesizes with sqrt_hann,
// every other kind with a rectangular window. The constructor verifies that this product overlap-adds to a constant at the
// given hop (relative deviation <= 1e-10) and throws InvalidConfig if not.
class StftConfig {
 public:
  StftConfig(int window_length, int hop, int fft_size,
             WindowKind window_kind = WindowKind::kSqrtHann);

  int window_length() const { return window_length_; }
  int hop() const { return hop_; }
  int fft_size() const { return fft_size_; }
  WindowKind window_kind() const { return window_kind_; }
  int NumBins() const { return fft_size_ / 2 + 1; }

  const std::vector<double> &analysis_window() const { return analysis_; }
  const std::vector<double> &synthesis_window() const { return synthesis_; }
  // Constant value of sum_t analysis(n - tH) * synthesis(n - tH).
  double ola_gain() const { return ola_gain_; }

  // Frames produced for a signal of `length` samples (no padding).
  int NumFrames(Eigen::Index length) const;
  // Sample range [begin, end) covered by a full set of overlapping frames,
  // where istft(stft(x)) reproduces x exactly.
  std::pair<Eigen::Index, Eigen::Index> InteriorRange(int num_frames) const;

  // Relative deviation of the overlap-added window product from constant.
  static double OlaDeviation(WindowKind kind, int window_length, int hop);

 private:
  int window_length_;
  int hop_;
  int fft_size_;
  WindowKind window_kind_;
  std::vector<double> analysis_;
  std::vector<double> synthesis_;
  double ola_gain_ = 0.0;
};

// T x F x C complex tensor, stored frame-major with channels innermost so the
// per-(t, f) channel vector is contiguous.
class ComplexSpectrogram {
 public:
  ComplexSpectrogram(int num_frames, int num_channels, StftConfig config,
                     int sample_rate_hz);

  int NumFrames() const { return num_frames_; }
  int NumBins() const { return num_bins_; }
  int NumChannels() const { return num_channels_; }
  const StftConfig &config() const { return config_; }
  int SampleRate() const { return sample_rate_hz_; }

  std::complex<double> &operator()(int t, int f, int c) {
    return data_[Offset(t, f) + c];
  }
  const std::complex<double> &operator()(int t, int f, int c) const {
    return data_[Offset(t, f) + c];
  }

  Eigen::Map<Eigen::VectorXcd> Vector(int t, int f) {
    return Eigen::Map<Eigen::VectorXcd>(&data_[Offset(t, f)], num_channels_);
  }
  Eigen::Map<const Eigen::VectorXcd> Vector(int t, int f) const {
    return Eigen::Map<const Eigen::VectorXcd>(&data_[Offset(t, f)],
                                              num_channels_);
  }

  bool AllFinite() const;
  ComplexSpectrogram SelectChannel(int c) const;

 private:
  size_t Offset(int t, int f) const {
    return (static_cast<size_t>(t) * num_bins_ + f) * num_channels_;
  }

  int num_frames_;
  int num_bins_;
  int num_channels_;
  StftConfig config_;
  int sample_rate_hz_;
  std::vector<std::complex<double>> data_;
};

ComplexSpectrogram Stft(const Waveform &wave, const StftConfig &config);

// Weighted overlap-add synthesis. Output length is
// (T - 1) * hop + window_length; only InteriorRange() is exact.
Waveform Istft(const ComplexSpectrogram &spec);

}  // namespace farfield

#endif  // FARFIELD_SIGNAL_STFT_H_
