// src/signal/stft.cc

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

#include "farfield/signal/stft.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "farfield/base/error.h"
#include "farfield/signal/fft.h"

namespace farfield {

const char *WindowKindName(WindowKind kind) {
  switch (kind) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kSqrtHann: return "sqrt_hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kRectangular: return "rectangular";
  }
  return "unknown";
}

WindowKind ParseWindowKind(const std::string &name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "sqrt_hann") return WindowKind::kSqrtHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "rectangular") return WindowKind::kRectangular;
  throw Error(ErrorCode::kInvalidConfig, "unknown window kind '" + name + "'");
}

std::vector<double> MakeWindow(WindowKind kind, int length) {
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) {
    double c = std::cos(2.0 * std::numbers::pi * n / length);
    switch (kind) {
      case WindowKind::kHann: w[n] = 0.5 - 0.5 * c; break;
      case WindowKind::kSqrtHann: w[n] = std::sqrt(0.5 - 0.5 * c); break;
      case WindowKind::kHamming: w[n] = 0.54 - 0.46 * c; break;
      case WindowKind::kRectangular: w[n] = 1.0; break;
    }
  }
  return w;
}

namespace {

std::vector<double> SynthesisWindowFor(WindowKind kind, int length) {
  if (kind == WindowKind::kSqrtHann) return MakeWindow(kind, length);
  return std::vector<double>(length, 1.0);
}

// Returns (mean, max relative deviation) of sum_k p(n + k * hop).
std::pair<double, double> OlaStats(const std::vector<double> &product,
                                   int hop) {
  const int len = static_cast<int>(product.size());
  std::vector<double> sums(hop, 0.0);
  // Sum over every frame overlapping a sample in steady state.
  for (int n = 0; n < len; ++n) sums[n % hop] += product[n];
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= hop;
  double dev = 0.0;
  for (double s : sums) dev = std::max(dev, std::abs(s - mean));
  return {mean, mean > 0.0 ? dev / mean : INFINITY};
}

std::vector<double> WindowProduct(WindowKind kind, int length) {
  std::vector<double> a = MakeWindow(kind, length);
  std::vector<double> s = SynthesisWindowFor(kind, length);
  for (int n = 0; n < length; ++n) a[n] *= s[n];
  return a;
}

}  // namespace

double StftConfig::OlaDeviation(WindowKind kind, int window_length, int hop) {
  return OlaStats(WindowProduct(kind, window_length), hop).second;
}

StftConfig::StftConfig(int window_length, int hop, int fft_size,
                       WindowKind window_kind)
    : window_length_(window_length),
      hop_(hop),
      fft_size_(fft_size),
      window_kind_(window_kind) {
  if (!(0 < hop && hop <= window_length && window_length <= fft_size))
    throw Error(ErrorCode::kInvalidConfig,
                "need 0 < hop <= window_length <= fft_size, got hop=" +
                    std::to_string(hop) +
                    " window=" + std::to_string(window_length) +
                    " fft=" + std::to_string(fft_size));
  auto [gain, deviation] =
      OlaStats(WindowProduct(window_kind, window_length), hop);
  if (!(deviation <= 1e-10))
    throw Error(ErrorCode::kInvalidConfig,
                std::string(WindowKindName(window_kind)) + " window of " +
                    std::to_string(window_length) + " with hop " +
                    std::to_string(hop) + " is not constant-overlap-add");
  analysis_ = MakeWindow(window_kind, window_length);
  synthesis_ = SynthesisWindowFor(window_kind, window_length);
  ola_gain_ = gain;
}

int StftConfig::NumFrames(Eigen::Index length) const {
  if (length < window_length_) return 0;
  return 1 + static_cast<int>((length - window_length_) / hop_);
}

std::pair<Eigen::Index, Eigen::Index> StftConfig::InteriorRange(
    int num_frames) const {
  Eigen::Index begin = window_length_ - hop_;
  Eigen::Index end = static_cast<Eigen::Index>(num_frames) * hop_;
  return {begin, std::max(begin, end)};
}

ComplexSpectrogram::ComplexSpectrogram(int num_frames, int num_channels,
                                       StftConfig config, int sample_rate_hz)
    : num_frames_(num_frames),
      num_bins_(config.NumBins()),
      num_channels_(num_channels),
      config_(std::move(config)),
      sample_rate_hz_(sample_rate_hz),
      data_(static_cast<size_t>(num_frames) * num_bins_ * num_channels) {}

bool ComplexSpectrogram::AllFinite() const {
  for (const auto &v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

ComplexSpectrogram ComplexSpectrogram::SelectChannel(int c) const {
  ComplexSpectrogram out(num_frames_, 1, config_, sample_rate_hz_);
  for (int t = 0; t < num_frames_; ++t)
    for (int f = 0; f < num_bins_; ++f) out(t, f, 0) = (*this)(t, f, c);
  return out;
}

ComplexSpectrogram Stft(const Waveform &wave, const StftConfig &config) {
  const int num_frames = config.NumFrames(wave.Length());
  if (num_frames == 0)
    throw Error(ErrorCode::kSignalTooShort,
                "signal of " + std::to_string(wave.Length()) +
                    " samples is shorter than one window (" +
                    std::to_string(config.window_length()) + ")");
  ComplexSpectrogram spec(num_frames, wave.NumChannels(), config,
                          wave.SampleRate());
  RealFft fft(config.fft_size());
  const auto &window = config.analysis_window();
  const int len = config.window_length();
  std::vector<double> frame(len);
  std::vector<std::complex<double>> bins;
  for (int c = 0; c < wave.NumChannels(); ++c) {
    for (int t = 0; t < num_frames; ++t) {
      const Eigen::Index start = static_cast<Eigen::Index>(t) * config.hop();
      for (int n = 0; n < len; ++n)
        frame[n] = wave.samples()(c, start + n) * window[n];
      fft.Forward(frame, &bins);
      for (int f = 0; f < spec.NumBins(); ++f) spec(t, f, c) = bins[f];
    }
  }
  return spec;
}

Waveform Istft(const ComplexSpectrogram &spec) {
  const StftConfig &config = spec.config();
  // The config was validated at construction; re-check in case a caller
  // built the spectrogram from a config that no longer meets the contract.
  if (!(StftConfig::OlaDeviation(config.window_kind(), config.window_length(),
                                 config.hop()) <= 1e-10))
    throw Error(ErrorCode::kInvalidConfig, "istft requires a COLA config");
  const int num_frames = spec.NumFrames();
  const int len = config.window_length();
  const Eigen::Index out_len =
      num_frames == 0
          ? 0
          : static_cast<Eigen::Index>(num_frames - 1) * config.hop() + len;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.NumChannels(), out_len);
  RealFft fft(config.fft_size());
  std::vector<std::complex<double>> bins(spec.NumBins());
  std::vector<double> frame;
  const auto &synth = config.synthesis_window();
  const double scale = 1.0 / config.ola_gain();
  for (int c = 0; c < spec.NumChannels(); ++c) {
    for (int t = 0; t < num_frames; ++t) {
      for (int f = 0; f < spec.NumBins(); ++f) bins[f] = spec(t, f, c);
      fft.Inverse(bins, &frame);
      const Eigen::Index start = static_cast<Eigen::Index>(t) * config.hop();
      for (int n = 0; n < len; ++n)
        out(c, start + n) += frame[n] * synth[n] * scale;
    }
  }
  return Waveform(std::move(out), spec.SampleRate());
}

}  // namespace farfield
