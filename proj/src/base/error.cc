// src/base/error.cc

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

#include "farfield/base/error.h"

namespace farfield {

const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSignalTooShort: return "SignalTooShort";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidRatio: return "InvalidRatio";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kNeedsMultichannel: return "NeedsMultichannel";
    case ErrorCode::kEmptyActivity: return "EmptyActivity";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::kSingularNoiseCovariance: return "SingularNoiseCovariance";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kGeometryError: return "GeometryError";
    case ErrorCode::kRateMismatch: return "RateMismatch";
    case ErrorCode::kTrainingDiverged: return "TrainingDiverged";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string &detail)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
      code_(code) {}

Error Error::AtBin(ErrorCode code, int bin, const std::string &detail) {
  Error e(code, detail + " (bin " + std::to_string(bin) + ")");
  e.bin_ = bin;
  return e;
}

}  // namespace farfield
