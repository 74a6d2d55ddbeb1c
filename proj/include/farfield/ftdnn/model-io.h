// include/farfield/ftdnn/model-io.h

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

#ifndef FARFIELD_FTDNN_MODEL_IO_H_
#define FARFIELD_FTDNN_MODEL_IO_H_

#include <cstdint>
#include <string>

#include "farfield/ftdnn/network.h"
#include "farfield/ftdnn/train.h"

namespace farfield {

// Binary model file, all integers and doubles little-endian:
//   "FTDN", u32 version (1), u32 input_dim, u32 num_layers, then per layer
//   u32 tag and a shape header followed by row-major double payloads:
//     1 f-tdnn: u32 b, d, h, u32 num_offsets, i32 offsets[]; N, M, bias
//     2 lstmp:  u32 cell, input, recurrent, nonrecurrent; w_input,
//               w_recurrent, bias, recurrent_proj, nonrecurrent_proj
//     3 affine: u32 output, input; weight, bias
//   and optionally a trailing tag 4: u32 dim; mean, scale.
inline constexpr uint32_t kModelFormatVersion = 1;

struct Model {
  int input_dim = 0;
  NetworkParams params;
  FeatureNormalization normalization;  // may be empty
};

void WriteModel(const std::string &path, const Model &model);
// IoError if unreadable; FormatError for a bad magic, unsupported version,
// unknown tag, inconsistent shapes or truncated payload.
Model ReadModel(const std::string &path);

// Serialized bytes, as written by WriteModel.
std::string SerializeModel(const Model &model);
Model DeserializeModel(const std::string &bytes);

// Architecture implied by the parameter shapes.
NetworkSpec SpecOf(const Model &model);

}  // namespace farfield

#endif  // FARFIELD_FTDNN_MODEL_IO_H_
