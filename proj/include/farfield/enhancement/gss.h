// include/farfield/enhancement/gss.h

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

#ifndef FARFIELD_ENHANCEMENT_GSS_H_
#define FARFIELD_ENHANCEMENT_GSS_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "farfield/enhancement/annotation.h"
#include "farfield/signal/stft.h"

namespace farfield {

// Per-source time-frequency masks, K sources of T x F values each. For masks
// produced by guided source separation the sources are the annotated speakers
// in sorted order followed by the noise class.
class TimeFrequencyMask {
 public:
  static constexpr const char *kNoiseLabel = "noise";

  TimeFrequencyMask() = default;
  TimeFrequencyMask(std::vector<std::string> source_ids, int num_frames,
                    int num_bins);

  int NumSources() const { return static_cast<int>(ids_.size()); }
  int NumFrames() const { return num_frames_; }
  int NumBins() const { return num_bins_; }
  const std::vector<std::string> &source_ids() const { return ids_; }
  // Index of `id`, or -1.
  int IndexOf(const std::string &id) const;

  double &operator()(int k, int t, int f) { return values_[k](t, f); }
  double operator()(int k, int t, int f) const { return values_[k](t, f); }
  // T x F mask of source k.
  const Eigen::MatrixXd &Source(int k) const { return values_[k]; }
  Eigen::MatrixXd &Source(int k) { return values_[k]; }

 private:
  std::vector<std::string> ids_;
  int num_frames_ = 0;
  int num_bins_ = 0;
  std::vector<Eigen::MatrixXd> values_;
};

// Complex angular central Gaussian mixture parameters, one set per bin.
struct CacgmmState {
  std::vector<Eigen::VectorXd> weights;              // [f] K-simplex
  std::vector<std::vector<Eigen::MatrixXcd>> shapes;  // [f][k] C x C, trace C
  std::vector<double> log_likelihood;                 // one entry per iteration
};

struct GssConfig {
  int iterations = 20;
  // Activity segments are widened by this many seconds on both sides.
  double context_s = 0.0;
};

struct GssResult {
  TimeFrequencyMask masks;
  CacgmmState state;
};

// Frame t is attributed to time (t * hop + window_length / 2) / fs.
double FrameCenterSeconds(const StftConfig &config, int sample_rate_hz, int t);

// Guided source separation: cACGMM EM over unit-normalized channel vectors,
// one class per annotated speaker plus an always-active noise class. Outside
// a speaker's activity its posterior is clamped to exactly zero before
// normalization. Throws NeedsMultichannel for C < 2, EmptyActivity for a
// speaker with no active frame, InvalidConfig for iterations < 1 or a speaker
// named like the noise class.
GssResult EstimateMasksGss(const ComplexSpectrogram &spec,
                           const ActivityAnnotation &annotation,
                           const GssConfig &config = {});

}  // namespace farfield

#endif  // FARFIELD_ENHANCEMENT_GSS_H_
