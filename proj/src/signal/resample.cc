// src/signal/resample.cc

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

#include "farfield/signal/resample.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "farfield/base/error.h"

namespace farfield {

namespace {

constexpr int kHalfTaps = 32;       // 64 taps per phase
constexpr int kPhasesPerUnit = 512;  // table resolution per zero crossing
constexpr double kKaiserBeta = 8.6;

// sin(pi u) / (pi u), exactly zero at nonzero integers.
double Sinc(double u) {
  if (u == 0.0) return 1.0;
  if (u == std::floor(u)) return 0.0;
  return std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
}

// Windowed-sinc prototype sampled on u in [0, kHalfTaps], u measured in
// zero crossings of the (possibly narrowed) lowpass.
const std::vector<double> &KernelTable() {
  static const std::vector<double> table = [] {
    const int n = kHalfTaps * kPhasesPerUnit + 2;
    std::vector<double> t(n, 0.0);
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (int i = 0; i < n; ++i) {
      double u = static_cast<double>(i) / kPhasesPerUnit;
      if (u >= kHalfTaps) break;
      double r = u / kHalfTaps;
      double kaiser =
          std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
      t[i] = Sinc(u) * kaiser;
    }
    return t;
  }();
  return table;
}

double Kernel(const std::vector<double> &table, double u) {
  u = std::abs(u);
  if (u >= kHalfTaps) return 0.0;
  double pos = u * kPhasesPerUnit;
  size_t idx = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(idx);
  if (frac == 0.0) return table[idx];
  return table[idx] + frac * (table[idx + 1] - table[idx]);
}

}  // namespace

Waveform Resample(const Waveform &wave, double ratio) {
  if (!(ratio >= 0.5 && ratio <= 2.0))
    throw Error(ErrorCode::kInvalidRatio,
                "ratio " + std::to_string(ratio) + " outside [0.5, 2.0]");
  const Eigen::Index in_len = wave.Length();
  const auto out_len = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(in_len) / ratio));
  // Compressing time (ratio > 1) raises frequencies; narrow the lowpass so
  // nothing folds over the output Nyquist.
  const double cutoff = std::min(1.0, 1.0 / ratio);
  const double reach = kHalfTaps / cutoff;
  const auto &table = KernelTable();

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(wave.NumChannels(), out_len);
  std::vector<double> weights;
  for (Eigen::Index m = 0; m < out_len; ++m) {
    const double pos = static_cast<double>(m) * ratio;
    const auto first = std::max<Eigen::Index>(
        0, static_cast<Eigen::Index>(std::ceil(pos - reach)));
    const auto last = std::min<Eigen::Index>(
        in_len - 1, static_cast<Eigen::Index>(std::floor(pos + reach)));
    if (first > last) continue;
    weights.resize(static_cast<size_t>(last - first + 1));
    for (Eigen::Index n = first; n <= last; ++n)
      weights[n - first] =
          cutoff * Kernel(table, (pos - static_cast<double>(n)) * cutoff);
    for (int c = 0; c < wave.NumChannels(); ++c) {
      double acc = 0.0;
      for (Eigen::Index n = first; n <= last; ++n)
        acc += weights[n - first] * wave.samples()(c, n);
      out(c, m) = acc;
    }
  }
  return Waveform(std::move(out), wave.SampleRate());
}

}  // namespace farfield
