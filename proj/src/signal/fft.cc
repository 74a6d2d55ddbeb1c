// src/signal/fft.cc

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

#include "farfield/signal/fft.h"

#include <algorithm>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "farfield/base/error.h"

namespace farfield {

struct RealFft::Impl {
  Eigen::FFT<double> fft;
};

RealFft::RealFft(int size) : size_(size), impl_(std::make_unique<Impl>()) {
  if (size <= 0)
    throw Error(ErrorCode::kInvalidConfig, "FFT size must be positive");
  impl_->fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  scratch_in_.resize(size);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft &&) noexcept = default;
RealFft &RealFft::operator=(RealFft &&) noexcept = default;

void RealFft::Forward(std::span<const double> input,
                      std::vector<std::complex<double>> *spectrum) {
  if (static_cast<int>(input.size()) > size_)
    throw Error(ErrorCode::kShapeMismatch, "FFT input longer than FFT size");
  std::copy(input.begin(), input.end(), scratch_in_.begin());
  std::fill(scratch_in_.begin() + input.size(), scratch_in_.end(), 0.0);
  impl_->fft.fwd(*spectrum, scratch_in_);
  spectrum->resize(NumBins());
}

void RealFft::Inverse(std::span<const std::complex<double>> spectrum,
                      std::vector<double> *output) {
  if (static_cast<int>(spectrum.size()) != NumBins())
    throw Error(ErrorCode::kShapeMismatch, "inverse FFT bin count mismatch");
  std::vector<std::complex<double>> half(spectrum.begin(), spectrum.end());
  impl_->fft.inv(*output, half, size_);
}

int NextPowerOfTwo(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const size_t out_len = a.size() + b.size() - 1;
  RealFft fft(NextPowerOfTwo(static_cast<int>(out_len)));
  std::vector<std::complex<double>> fa, fb;
  fft.Forward(a, &fa);
  fft.Forward(b, &fb);
  for (size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> out;
  fft.Inverse(fa, &out);
  out.resize(out_len);
  return out;
}

}  // namespace farfield
