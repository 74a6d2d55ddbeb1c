// include/farfield/ftdnn/train.h

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

#ifndef FARFIELD_FTDNN_TRAIN_H_
#define FARFIELD_FTDNN_TRAIN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "farfield/ftdnn/network.h"

namespace farfield {

// Per-dimension feature standardization x' = (x - mean) * scale.
struct FeatureNormalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  bool empty() const { return mean.size() == 0; }
  Sequence Apply(const Sequence &features) const;
  // Statistics over every frame; dimensions with zero variance get scale 1.
  static FeatureNormalization Estimate(const std::vector<Sequence> &features);
};

struct TrainConfig {
  // Exponential decay from lr_initial (first epoch) to lr_final (last).
  double lr_initial = 0.05;
  double lr_final = 0.005;
  double l2_coefficient = 1e-5;
  int epochs = 10;
  int batch_size = 4;           // utterances per update
  int constraint_interval = 4;  // updates between semi-orthogonal steps
  double heldout_fraction = 0.2;
  uint64_t seed = 0;

  // InvalidConfig for negative l2, non-positive rates/epochs/batch size or
  // interval, or a held-out fraction outside [0, 1).
  void Validate() const;
  double LearningRate(int epoch) const;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;       // training objective after the epoch
  double frame_acc = 0.0;  // held-out frame accuracy
  double max_orth_err = 0.0;
};

struct TrainResult {
  NetworkParams params;
  FeatureNormalization normalization;
  double heldout_accuracy = 0.0;
  std::vector<EpochLog> log;
};

std::string EpochLogJson(const EpochLog &entry);

// Frame cross-entropy training with SGD over utterance minibatches.
// Labels hold either one class per input frame (the network's context is
// cropped off) or one per output frame. Features are standardized with
// statistics from the training utterances. The L2 term is applied as a
// proximal step theta <- (theta - lr * grad_ce) / (1 + lr * l2). Every
// `constraint_interval` updates each factor N takes one semi-orthogonal
// step; at the end of each epoch the step is repeated until the error is
// below 1e-8 (at most 30 times). The held-out utterances are the last
// round(heldout_fraction * U) of a seeded permutation (training accuracy is
// reported when the fraction is 0). TrainingDiverged on a non-finite loss.
// `on_epoch`, if set, sees every log entry as it is produced.
TrainResult TrainToy(const NetworkSpec &spec,
                     const std::vector<Sequence> &features,
                     const std::vector<Labels> &labels,
                     const TrainConfig &config,
                     const std::function<void(const EpochLog &)> &on_epoch = {});

// Frame accuracy of a trained network on raw (unnormalized) features.
double FrameAccuracy(const NetworkParams &params,
                     const FeatureNormalization &normalization,
                     const NetworkSpec &spec,
                     const std::vector<Sequence> &features,
                     const std::vector<Labels> &labels);

// Two Gaussian frame classes (means +separation/2 and -separation/2 along
// every dimension, unit variance) in runs of `run` frames per class.
struct ToyTask {
  std::vector<Sequence> features;
  std::vector<Labels> labels;  // one per input frame
};
ToyTask MakeSeparableToyTask(int num_utterances, int frames, int dim,
                             double separation, int run, uint64_t seed);

// Text formats: one frame per line (whitespace-separated numbers for
// features, a single class index for labels), blank lines between
// utterances. IoError if unreadable, FormatError on malformed content.
std::vector<Sequence> ReadFeatureText(const std::string &path);
std::vector<Labels> ReadLabelText(const std::string &path);
void WriteFeatureText(const std::string &path, const std::vector<Sequence> &features);
void WriteLabelText(const std::string &path, const std::vector<Labels> &labels);

}  // namespace farfield

#endif  // FARFIELD_FTDNN_TRAIN_H_
