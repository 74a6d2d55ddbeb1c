// src/enhancement/wpe.cc

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

#include "farfield/enhancement/wpe.h"

#include <algorithm>

#include "farfield/base/error.h"

namespace farfield {

namespace {

constexpr double kPowerFloor = 1e-10;
constexpr double kNormalEquationLoad = 1e-8;

}  // namespace

ComplexSpectrogram WpeDereverb(const ComplexSpectrogram &spec,
                               const WpeConfig &config) {
  if (config.taps < 1 || config.delay < 1 || config.iterations < 1)
    throw Error(ErrorCode::kInvalidConfig,
                "WPE taps, delay and iterations must be positive");
  const int num_frames = spec.NumFrames();
  const int first = config.delay + config.taps;
  if (num_frames <= first)
    throw Error(ErrorCode::kSignalTooShort,
                "WPE needs more than " + std::to_string(first) + " frames, got " +
                    std::to_string(num_frames));
  const int c = spec.NumChannels();
  const int dim = c * config.taps;

  ComplexSpectrogram out = spec;
  const int n = num_frames - first;
  Eigen::MatrixXcd history(dim, n);  // stacked delayed observations
  Eigen::MatrixXcd current(c, n);
  Eigen::VectorXd inv_power(n);
  for (int f = 0; f < spec.NumBins(); ++f) {
    for (int i = 0; i < n; ++i) {
      const int t = first + i;
      current.col(i) = spec.Vector(t, f);
      for (int k = 0; k < config.taps; ++k)
        history.block(k * c, i, c, 1) = spec.Vector(t - config.delay - k, f);
    }
    Eigen::MatrixXcd estimate = current;
    for (int it = 0; it < config.iterations; ++it) {
      for (int i = 0; i < n; ++i)
        inv_power(i) =
            1.0 / std::max(estimate.col(i).squaredNorm() / c, kPowerFloor);
      const Eigen::MatrixXcd weighted = history * inv_power.asDiagonal();
      Eigen::MatrixXcd r = weighted * history.adjoint();
      const Eigen::MatrixXcd p = weighted * current.adjoint();
      r.diagonal().array() += kNormalEquationLoad;
      const Eigen::MatrixXcd g = r.llt().solve(p);
      estimate = current - g.adjoint() * history;
    }
    for (int i = 0; i < n; ++i) out.Vector(first + i, f) = estimate.col(i);
  }
  return out;
}

}  // namespace farfield
