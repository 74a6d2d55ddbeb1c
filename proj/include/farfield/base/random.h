// include/farfield/base/random.h

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

#ifndef FARFIELD_BASE_RANDOM_H_
#define FARFIELD_BASE_RANDOM_H_

#include <cstdint>
#include <random>

namespace farfield {

// Seeded generator whose output sequence is identical on every platform.
// The <random> distributions are implementation-defined, so the uniform and
// Gaussian draws are derived directly from the engine bits.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Standard normal (Marsaglia polar method).
  double Gauss();

  // Uniform integer in [0, n).
  uint64_t Index(uint64_t n) { return engine_() % n; }

  uint64_t Bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace farfield

#endif  // FARFIELD_BASE_RANDOM_H_
