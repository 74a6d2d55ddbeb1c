// include/farfield/base/error.h

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

#ifndef FARFIELD_BASE_ERROR_H_
#define FARFIELD_BASE_ERROR_H_

#include <stdexcept>
#include <string>

namespace farfield {

// Every failure the library reports carries one of these codes; the CLI maps
// them onto its exit codes.
enum class ErrorCode {
  kSignalTooShort,
  kInvalidConfig,
  kInvalidRatio,
  kChannelMismatch,
  kNeedsMultichannel,
  kEmptyActivity,
  kEmptyMask,
  kDegenerateCovariance,
  kSingularNoiseCovariance,
  kShapeMismatch,
  kShapeError,
  kGeometryError,
  kRateMismatch,
  kTrainingDiverged,
  kIoError,
  kFormatError,
};

const char *ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &detail);

  ErrorCode code() const { return code_; }
  // Frequency bin for per-bin failures (EmptyMask, DegenerateCovariance,
  // SingularNoiseCovariance), otherwise -1.
  int bin() const { return bin_; }

  static Error AtBin(ErrorCode code, int bin, const std::string &detail);

 private:
  ErrorCode code_;
  int bin_ = -1;
};

}  // namespace farfield

#endif  // FARFIELD_BASE_ERROR_H_
