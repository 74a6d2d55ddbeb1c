// include/farfield/signal/fft.h

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

#ifndef FARFIELD_SIGNAL_FFT_H_
#define FARFIELD_SIGNAL_FFT_H_

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace farfield {

// Real-input FFT of a fixed size producing the one-sided spectrum
// (size/2 + 1 bins). Each instance caches its own twiddles, so an instance
// must not be shared across threads; separate instances are independent.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(RealFft &&) noexcept;
  RealFft &operator=(RealFft &&) noexcept;

  int size() const { return size_; }
  int NumBins() const { return size_ / 2 + 1; }

  // `input` is zero-padded (or must not exceed) to size().
  void Forward(std::span<const double> input,
               std::vector<std::complex<double>> *spectrum);
  // Inverse of Forward, including the 1/size scaling.
  void Inverse(std::span<const std::complex<double>> spectrum,
               std::vector<double> *output);

 private:
  struct Impl;
  int size_;
  std::unique_ptr<Impl> impl_;
  std::vector<double> scratch_in_;
};

int NextPowerOfTwo(int n);

// Full linear convolution, length a.size() + b.size() - 1, via FFT.
std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b);

}  // namespace farfield

#endif  // FARFIELD_SIGNAL_FFT_H_
