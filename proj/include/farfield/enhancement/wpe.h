// include/farfield/enhancement/wpe.h

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

#ifndef FARFIELD_ENHANCEMENT_WPE_H_
#define FARFIELD_ENHANCEMENT_WPE_H_

#include "farfield/signal/stft.h"

namespace farfield {

struct WpeConfig {
  int taps = 10;
  int delay = 3;
  int iterations = 3;
};

// Weighted prediction error dereverberation, per bin and multichannel. Each
// iteration estimates the per-frame power from the current output (floored
// at 1e-10), solves the power-normalized normal equations for a delayed
// linear predictor over frames [t - delay - taps + 1, t - delay] and
// subtracts the prediction. Frames before delay + taps are passed through.
// InvalidConfig for non-positive parameters, SignalTooShort when
// T <= taps + delay.
ComplexSpectrogram WpeDereverb(const ComplexSpectrogram &spec,
                               const WpeConfig &config = {});

}  // namespace farfield

#endif  // FARFIELD_ENHANCEMENT_WPE_H_
