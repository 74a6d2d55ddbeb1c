// include/farfield/ftdnn/network.h

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

#ifndef FARFIELD_FTDNN_NETWORK_H_
#define FARFIELD_FTDNN_NETWORK_H_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "farfield/base/random.h"
#include "farfield/ftdnn/layers.h"

namespace farfield {

enum class LayerKind { kFtdnn, kLstmp, kAffine };

struct LayerSpec {
  LayerKind kind = LayerKind::kFtdnn;
  // kFtdnn
  int hidden = 0;
  int bottleneck = 0;
  std::vector<int> offsets;
  // kLstmp
  int cell = 0;
  int recurrent = 0;
  int nonrecurrent = 0;
  // kAffine
  int output = 0;

  static LayerSpec Ftdnn(int hidden, int bottleneck, std::vector<int> offsets);
  static LayerSpec Lstmp(int cell, int recurrent, int nonrecurrent);
  static LayerSpec Affine(int output);

  int OutputDim() const;
};

struct NetworkSpec {
  int input_dim = 40;
  std::vector<LayerSpec> layers;

  int OutputDim() const;
  // Input width of every layer.
  std::vector<int> LayerInputDims() const;
  // Frames lost to splicing (sum over layers of max - min offset).
  int TotalContext() const;
  // Frames lost on the left, i.e. output frame t sits on input frame
  // t + LeftContext().
  int LeftContext() const;

  // InvalidConfig for non-positive dims, empty/unsorted offsets, or an
  // f-tdnn layer without bottleneck semantics (b < d and b <= h).
  void Validate() const;

  // {"input_dim": 40, "layers": [{"type": "ftdnn", "hidden", "bottleneck",
  // "offsets"}, {"type": "lstmp", "cell", "recurrent", "nonrecurrent"},
  // {"type": "affine", "output"}]}. Strict: unknown keys are rejected.
  static NetworkSpec FromJson(const std::string &text);
  std::string ToJson() const;
};

inline constexpr const char *kPresetNames[] = {"ftdnn15", "ftdnn18",
                                               "ftdnn18_lstm3"};

// ftdnn15 / ftdnn18: 15 or 18 f-tdnn layers of 1536 units with a 160-dim
// bottleneck. ftdnn18_lstm3: 18 f-tdnn layers of 1024 units (bottleneck 160)
// with an LSTMP layer (cell 1024, projections 512 + 512) after f-tdnn layers
// 5, 10 and 15. The first layer splices {-2..2}, later ones {-1, 0, 1}; an
// affine output layer maps to `num_classes`. InvalidConfig for other names.
NetworkSpec Preset(const std::string &name, int num_classes,
                   int input_dim = 40);

// Divides every hidden dimension by `divisor` (rounded, at least 1), keeping
// bottleneck semantics; input and output widths are untouched.
NetworkSpec ScaleSpec(const NetworkSpec &spec, int divisor);

// Closed-form parameter count.
int64_t ParamCount(const NetworkSpec &spec);

using LayerParams =
    std::variant<FtdnnLayerParams, LstmpLayerParams, AffineLayerParams>;

struct NetworkParams {
  std::vector<LayerParams> layers;

  // Zero-filled parameters with the shapes implied by `spec`.
  static NetworkParams Zeros(const NetworkSpec &spec);
  // Gaussian init with stddev 1/sqrt(fan_in); every factor N is then made
  // exactly semi-orthogonal. Biases start at zero.
  static NetworkParams Random(const NetworkSpec &spec, Rng *rng);

  // Every parameter array in a fixed order (layer by layer, in declaration
  // order of the layer's fields).
  std::vector<std::span<double>> Arrays();
  std::vector<std::span<const double>> Arrays() const;
  int64_t Count() const;
  double SquaredNorm() const;
  // Max ||N Nᵀ - I||_F over the f-tdnn layers (0 without any).
  double MaxOrthogonalityError() const;
};

Sequence NetworkForward(const NetworkParams &params, const Sequence &features);

// Per-output-frame class labels for one utterance.
using Labels = std::vector<int>;

struct LossAndGradient {
  double loss = 0.0;          // mean cross-entropy + (l2 / 2) ||theta||^2
  double cross_entropy = 0.0;  // mean over frames
  int correct = 0;
  int frames = 0;
  NetworkParams gradient;
};

// Cross-entropy over one or more utterances with exact gradients. Labels
// must have one entry per output frame (ShapeMismatch otherwise) and lie in
// [0, num_classes).
LossAndGradient NetworkBackward(const NetworkParams &params,
                                std::span<const Sequence> features,
                                std::span<const Labels> labels,
                                double l2_coefficient);

double NetworkLoss(const NetworkParams &params,
                   std::span<const Sequence> features,
                   std::span<const Labels> labels, double l2_coefficient);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int64_t worst_index = -1;  // flat parameter index
  int64_t num_params = 0;
  // Parameters whose +-h stencil flips a ReLU; their central difference
  // straddles a kink and they are left out of max_rel_error.
  int64_t kinked = 0;
};

// Central differences with step h over every parameter; relative error
// |a - fd| / max(|a|, |fd|, 1e-12). The objective is accumulated in extended
// precision for the differences. With `corrupt`, the analytic entry of
// largest magnitude (among kink-free ones) is scaled by 1.1 before the
// comparison.
GradCheckResult GradCheck(const NetworkParams &params,
                          std::span<const Sequence> features,
                          std::span<const Labels> labels,
                          double l2_coefficient, double h = 1e-5,
                          bool corrupt = false);

// Random network, features and labels for a gradient check: Random() init
// with every parameter then jittered by N(0, 0.1^2), one utterance with
// `output_frames` labelled frames of unit-variance Gaussian features.
struct GradCheckFixture {
  NetworkParams params;
  std::vector<Sequence> features;
  std::vector<Labels> labels;
};
GradCheckFixture MakeGradCheckFixture(const NetworkSpec &spec, uint64_t seed,
                                      int output_frames = 10);

}  // namespace farfield

#endif  // FARFIELD_FTDNN_NETWORK_H_
