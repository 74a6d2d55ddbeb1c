// src/enhancement/beamformer.cc

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

#include "farfield/enhancement/beamformer.h"

#include <cmath>
#include <complex>

#include "farfield/base/error.h"

namespace farfield {

SpatialCovariance ComputeSpatialCovariance(const ComplexSpectrogram &spec,
                                           const Eigen::MatrixXd &mask) {
  if (mask.rows() != spec.NumFrames() || mask.cols() != spec.NumBins())
    throw Error(ErrorCode::kShapeMismatch,
                "mask is " + std::to_string(mask.rows()) + "x" +
                    std::to_string(mask.cols()) + ", spectrogram has " +
                    std::to_string(spec.NumFrames()) + " frames and " +
                    std::to_string(spec.NumBins()) + " bins");
  const int c = spec.NumChannels();
  SpatialCovariance phi;
  phi.matrices.reserve(spec.NumBins());
  for (int f = 0; f < spec.NumBins(); ++f) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(c, c);
    double mass = 0.0;
    for (int t = 0; t < spec.NumFrames(); ++t) {
      const double m = mask(t, f);
      if (m == 0.0) continue;
      const auto y = spec.Vector(t, f);
      acc.noalias() += m * (y * y.adjoint());
      mass += m;
    }
    if (!(mass > 0.0))
      throw Error::AtBin(ErrorCode::kEmptyMask, f,
                         "mask sums to zero at bin " + std::to_string(f));
    phi.matrices.push_back(acc / mass);
  }
  return phi;
}

BinVectors EstimateSteeringVectors(const SpatialCovariance &phi_s,
                                   int reference_channel) {
  BinVectors steering;
  steering.reserve(phi_s.NumBins());
  for (int f = 0; f < phi_s.NumBins(); ++f) {
    const Eigen::MatrixXcd &phi = phi_s.matrices[f];
    if (reference_channel < 0 || reference_channel >= phi.rows())
      throw Error(ErrorCode::kInvalidConfig, "reference channel out of range");
    if (phi.cwiseAbs().maxCoeff() == 0.0 || !phi.allFinite())
      throw Error::AtBin(ErrorCode::kDegenerateCovariance, f,
                         "degenerate covariance at bin " + std::to_string(f));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(phi);
    Eigen::VectorXcd d = eig.eigenvectors().col(phi.rows() - 1);
    d.normalize();
    // Phase from the reference channel, or the largest entry if it vanishes.
    Eigen::Index ref = reference_channel;
    if (std::abs(d(ref)) < 1e-12) d.cwiseAbs().maxCoeff(&ref);
    d *= std::conj(d(ref)) / std::abs(d(ref));
    d(ref) = std::abs(d(ref));
    steering.push_back(std::move(d));
  }
  return steering;
}

BinVectors MvdrWeights(const SpatialCovariance &phi_n,
                       const BinVectors &steering) {
  if (static_cast<int>(steering.size()) != phi_n.NumBins())
    throw Error(ErrorCode::kShapeMismatch,
                "steering vectors and noise covariance disagree on bin count");
  BinVectors weights;
  weights.reserve(steering.size());
  for (int f = 0; f < phi_n.NumBins(); ++f) {
    const Eigen::MatrixXcd &phi = phi_n.matrices[f];
    const Eigen::VectorXcd &d = steering[f];
    if (d.size() != phi.rows())
      throw Error(ErrorCode::kShapeMismatch,
                  "steering vector length differs from channel count");
    const double c = static_cast<double>(phi.rows());
    const double load = kMvdrDiagonalLoading * phi.trace().real() / c;
    auto singular = [f] {
      return Error::AtBin(ErrorCode::kSingularNoiseCovariance, f,
                          "noise covariance is singular at bin " +
                              std::to_string(f));
    };
    if (!(load > 0.0) || !std::isfinite(load)) throw singular();
    Eigen::MatrixXcd loaded = phi;
    loaded.diagonal().array() += load;
    Eigen::LLT<Eigen::MatrixXcd> llt(loaded);
    if (llt.info() != Eigen::Success) throw singular();
    const Eigen::VectorXcd x = llt.solve(d);
    const std::complex<double> denom = d.dot(x);  // dᴴ Φ⁻¹ d
    if (!(std::abs(denom) > 0.0) || !x.allFinite()) throw singular();
    weights.push_back(x / denom);
  }
  return weights;
}

ComplexSpectrogram ApplyBeamformer(const ComplexSpectrogram &spec,
                                   const BinVectors &weights) {
  if (static_cast<int>(weights.size()) != spec.NumBins())
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(weights.size()) + " weight vectors for " +
                    std::to_string(spec.NumBins()) + " bins");
  for (const auto &w : weights)
    if (w.size() != spec.NumChannels())
      throw Error(ErrorCode::kShapeMismatch,
                  "weight vector length differs from channel count");
  ComplexSpectrogram out(spec.NumFrames(), 1, spec.config(), spec.SampleRate());
  for (int t = 0; t < spec.NumFrames(); ++t)
    for (int f = 0; f < spec.NumBins(); ++f)
      out(t, f, 0) = weights[f].dot(spec.Vector(t, f));
  return out;
}

}  // namespace farfield
