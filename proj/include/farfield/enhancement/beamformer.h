// include/farfield/enhancement/beamformer.h

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

#ifndef FARFIELD_ENHANCEMENT_BEAMFORMER_H_
#define FARFIELD_ENHANCEMENT_BEAMFORMER_H_

#include <vector>

#include <Eigen/Dense>

#include "farfield/signal/stft.h"

namespace farfield {

// One C x C Hermitian matrix per frequency bin.
struct SpatialCovariance {
  std::vector<Eigen::MatrixXcd> matrices;

  int NumBins() const { return static_cast<int>(matrices.size()); }
  int NumChannels() const {
    return matrices.empty() ? 0 : static_cast<int>(matrices[0].rows());
  }
};

// Per-bin complex vectors (steering vectors or beamformer weights).
using BinVectors = std::vector<Eigen::VectorXcd>;

// Phi(f) = sum_t m(t,f) y yᴴ / sum_t m(t,f). `mask` is T x F.
// ShapeMismatch if the mask does not match the spectrogram, EmptyMask at the
// first bin whose mask sums to zero.
SpatialCovariance ComputeSpatialCovariance(const ComplexSpectrogram &spec,
                                           const Eigen::MatrixXd &mask);

// Unit-norm principal eigenvector per bin with the reference component made
// real and positive. DegenerateCovariance for an all-zero matrix.
BinVectors EstimateSteeringVectors(const SpatialCovariance &phi_s,
                                   int reference_channel = 0);

// Relative diagonal load added to the noise covariance before inversion.
inline constexpr double kMvdrDiagonalLoading = 1e-6;

// w(f) = Phi_n⁻¹ d / (dᴴ Phi_n⁻¹ d) with Phi_n loaded by
// kMvdrDiagonalLoading * trace / C. SingularNoiseCovariance if the loaded
// matrix still cannot be factorized.
BinVectors MvdrWeights(const SpatialCovariance &phi_n,
                       const BinVectors &steering);

// out(t, f) = w(f)ᴴ y(t, f); single-channel result.
ComplexSpectrogram ApplyBeamformer(const ComplexSpectrogram &spec,
                                   const BinVectors &weights);

}  // namespace farfield

#endif  // FARFIELD_ENHANCEMENT_BEAMFORMER_H_
