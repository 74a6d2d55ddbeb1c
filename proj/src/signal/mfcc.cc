// src/signal/mfcc.cc

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

#include "farfield/signal/mfcc.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "farfield/base/error.h"
#include "farfield/signal/fft.h"
#include "farfield/signal/stft.h"

namespace farfield {

int FeatureConfig::WindowSamples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(window_ms * 1e-3 * sample_rate_hz));
}

int FeatureConfig::HopSamples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(hop_ms * 1e-3 * sample_rate_hz));
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank::MelFilterbank(int num_bins, int fft_size, int sample_rate_hz,
                             double low_freq_hz, double high_freq_hz) {
  const double nyquist = 0.5 * sample_rate_hz;
  if (high_freq_hz <= 0.0) high_freq_hz = nyquist;
  if (num_bins < 1 || !(0.0 <= low_freq_hz && low_freq_hz < high_freq_hz &&
                        high_freq_hz <= nyquist))
    throw Error(ErrorCode::kInvalidConfig, "bad mel filterbank range");
  const double mel_lo = HzToMel(low_freq_hz), mel_hi = HzToMel(high_freq_hz);
  centers_hz_.resize(num_bins + 2);
  for (int i = 0; i < num_bins + 2; ++i)
    centers_hz_[i] =
        MelToHz(mel_lo + (mel_hi - mel_lo) * i / (num_bins + 1.0));
  const int spectrum_bins = fft_size / 2 + 1;
  weights_ = Eigen::MatrixXd::Zero(num_bins, spectrum_bins);
  for (int b = 0; b < num_bins; ++b)
    for (int k = 0; k < spectrum_bins; ++k)
      weights_(b, k) =
          Response(b, static_cast<double>(k) * sample_rate_hz / fft_size);
}

double MelFilterbank::Response(int band, double hz) const {
  const double left = centers_hz_[band], center = centers_hz_[band + 1],
               right = centers_hz_[band + 2];
  if (hz <= left || hz >= right) return 0.0;
  if (hz <= center) return (hz - left) / (center - left);
  return (right - hz) / (right - center);
}

Eigen::MatrixXd ComputeMelEnergies(const Waveform &wave,
                                   const FeatureConfig &config) {
  if (wave.NumChannels() != 1)
    throw Error(ErrorCode::kChannelMismatch,
                "mfcc needs mono input, got " +
                    std::to_string(wave.NumChannels()) + " channels");
  if (wave.SampleRate() < 8000)
    throw Error(ErrorCode::kInvalidConfig, "mfcc needs >= 8 kHz audio");
  const int sr = wave.SampleRate();
  const int win = config.WindowSamples(sr);
  const int hop = config.HopSamples(sr);
  if (win <= 0 || hop <= 0)
    throw Error(ErrorCode::kInvalidConfig, "bad mfcc window or hop");
  if (wave.Length() < win)
    throw Error(ErrorCode::kSignalTooShort, "signal shorter than one window");
  const int num_frames = 1 + static_cast<int>((wave.Length() - win) / hop);
  const int fft_size = NextPowerOfTwo(win);

  MelFilterbank bank(config.num_mel_bins, fft_size, sr, config.low_freq_hz,
                     config.high_freq_hz);
  const std::vector<double> window = MakeWindow(WindowKind::kHann, win);
  RealFft fft(fft_size);
  std::vector<double> frame(win);
  std::vector<std::complex<double>> bins;
  Eigen::VectorXd power(fft_size / 2 + 1);
  Eigen::MatrixXd out(num_frames, config.num_mel_bins);
  const auto &x = wave.samples();
  for (int t = 0; t < num_frames; ++t) {
    const Eigen::Index start = static_cast<Eigen::Index>(t) * hop;
    // Frame-local pre-emphasis keeps frames independent of their neighbours.
    for (int n = win - 1; n >= 0; --n) {
      double prev = x(0, start + (n > 0 ? n - 1 : 0));
      frame[n] = (x(0, start + n) - config.preemph_coeff * prev) * window[n];
    }
    fft.Forward(frame, &bins);
    for (int k = 0; k < power.size(); ++k) power(k) = std::norm(bins[k]);
    out.row(t) = (bank.weights() * power).transpose();
  }
  return out;
}

Eigen::MatrixXd ComputeMfcc(const Waveform &wave,
                            const FeatureConfig &config) {
  if (config.num_ceps < 1 || config.num_ceps > config.num_mel_bins)
    throw Error(ErrorCode::kInvalidConfig, "num_ceps must be in [1, bands]");
  Eigen::MatrixXd mel = ComputeMelEnergies(wave, config);
  mel = mel.array().max(config.log_floor).log().matrix();
  const int m = config.num_mel_bins;
  Eigen::MatrixXd dct(config.num_ceps, m);
  for (int k = 0; k < config.num_ceps; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (int n = 0; n < m; ++n)
      dct(k, n) = scale * std::cos(std::numbers::pi * k * (n + 0.5) / m);
  }
  return mel * dct.transpose();
}

}  // namespace farfield
