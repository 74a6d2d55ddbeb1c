// include/farfield/signal/resample.h

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

#ifndef FARFIELD_SIGNAL_RESAMPLE_H_
#define FARFIELD_SIGNAL_RESAMPLE_H_

#include "farfield/signal/waveform.h"

namespace farfield {

// Band-limited time-scale change used by speed perturbation. The output keeps
// the input sample rate and has round(length / ratio) samples; output sample
// m is the input interpolated at position m * ratio, so a tone at f Hz comes
// out at ratio * f Hz. Interpolation is a Kaiser-windowed sinc (beta 8.6,
// 64 taps per phase) whose cutoff follows the lower of the two Nyquist
// rates. `ratio` must lie in [0.5, 2.0] (InvalidRatio otherwise).
Waveform Resample(const Waveform &wave, double ratio);

}  // namespace farfield

#endif  // FARFIELD_SIGNAL_RESAMPLE_H_
