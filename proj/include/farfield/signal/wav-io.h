// include/farfield/signal/wav-io.h

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

#ifndef FARFIELD_SIGNAL_WAV_IO_H_
#define FARFIELD_SIGNAL_WAV_IO_H_

#include <iosfwd>
#include <string>

#include "farfield/signal/waveform.h"

namespace farfield {

enum class WavSampleFormat { kPcm16, kFloat32 };

// RIFF/WAVE with 16-bit PCM or 32-bit IEEE float samples, 1 to 8 channels.
// PCM values are scaled by 1/32768 on read and by 32768 (rounded, clipped to
// the int16 range) on write. WAVE_FORMAT_EXTENSIBLE headers are accepted on
// read. Unopenable files raise IoError, malformed content FormatError.
Waveform ReadWav(const std::string &path,
                 WavSampleFormat *format_out = nullptr);
Waveform ReadWav(std::istream &in, WavSampleFormat *format_out = nullptr);

void WriteWav(const std::string &path, const Waveform &wave,
              WavSampleFormat format);
void WriteWav(std::ostream &out, const Waveform &wave, WavSampleFormat format);

}  // namespace farfield

#endif  // FARFIELD_SIGNAL_WAV_IO_H_
