// include/farfield/ftdnn/layers.h

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

#ifndef FARFIELD_FTDNN_LAYERS_H_
#define FARFIELD_FTDNN_LAYERS_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace farfield {

// A feature or activation sequence: one row per frame.
using Sequence = Eigen::MatrixXd;

// Output frame t concatenates input frames t - offsets.front() + o for every
// offset o (offsets strictly increasing). Only fully covered frames are
// produced: T' = T - (max - min). SignalTooShort if T <= max - min,
// InvalidConfig for an empty or unsorted offset list.
Sequence Splice(const Sequence &seq, std::span<const int> offsets);

// Adjoint of Splice: scatters d_spliced back onto a zero sequence of
// `num_frames` frames.
Sequence SpliceBackward(const Sequence &d_spliced, std::span<const int> offsets,
                        Eigen::Index num_frames);

// Factorized TDNN layer y = ReLU(M (N splice(x)) + b).
struct FtdnnLayerParams {
  Eigen::MatrixXd factor_n;  // bottleneck x (input_dim * |offsets|)
  Eigen::MatrixXd factor_m;  // hidden x bottleneck
  Eigen::VectorXd bias;      // hidden
  std::vector<int> splice_offsets;

  int InputDim() const {
    return static_cast<int>(factor_n.cols() / splice_offsets.size());
  }
  int Bottleneck() const { return static_cast<int>(factor_n.rows()); }
  int OutputDim() const { return static_cast<int>(factor_m.rows()); }
};

struct FtdnnCache {
  Sequence spliced;
  Sequence bottleneck;
  Sequence preactivation;
  Eigen::Index input_frames = 0;
};

// ShapeMismatch if the input width times |offsets| differs from N's columns
// or the factor shapes disagree.
Sequence FtdnnForward(const FtdnnLayerParams &layer, const Sequence &x,
                      FtdnnCache *cache = nullptr);
// Accumulates parameter gradients into `grad` (same shapes as `layer`) and
// returns dL/dx.
Sequence FtdnnBackward(const FtdnnLayerParams &layer, const FtdnnCache &cache,
                       const Sequence &dy, FtdnnLayerParams *grad);

// ||N Nᵀ - I||_F.
double OrthogonalityError(const Eigen::MatrixXd &n);

// One Newton-Schulz step toward N Nᵀ = I: N <- N - 1/2 (N Nᵀ - I) N. When the
// largest eigenvalue of N Nᵀ exceeds 2, N is first rescaled so that it
// equals 1, which keeps the iteration contracting. Semi-orthogonal inputs
// are returned unchanged and the row space is preserved. ShapeError when N
// has more rows than columns.
Eigen::MatrixXd SemiOrthogonalStep(const Eigen::MatrixXd &n);

// LSTM with recurrent and non-recurrent projections (no peepholes). Gates
// are stacked i, f, g, o. The recurrent state is the recurrent projection
// r_t; the output is [r_t, p_t].
struct LstmpLayerParams {
  Eigen::MatrixXd w_input;            // 4*cell x input
  Eigen::MatrixXd w_recurrent;        // 4*cell x recurrent
  Eigen::VectorXd bias;               // 4*cell
  Eigen::MatrixXd recurrent_proj;     // recurrent x cell
  Eigen::MatrixXd nonrecurrent_proj;  // nonrecurrent x cell

  int InputDim() const { return static_cast<int>(w_input.cols()); }
  int CellDim() const { return static_cast<int>(recurrent_proj.cols()); }
  int RecurrentDim() const { return static_cast<int>(recurrent_proj.rows()); }
  int NonrecurrentDim() const {
    return static_cast<int>(nonrecurrent_proj.rows());
  }
  int OutputDim() const { return RecurrentDim() + NonrecurrentDim(); }
};

struct LstmpCache {
  Sequence input;
  Sequence gates;  // post-nonlinearity i, f, g, o per frame
  Sequence cell;
  Sequence cell_tanh;
  Sequence memory;     // o * tanh(c)
  Sequence recurrent;  // r_t
};

Sequence LstmpForward(const LstmpLayerParams &layer, const Sequence &x,
                      LstmpCache *cache = nullptr);
Sequence LstmpBackward(const LstmpLayerParams &layer, const LstmpCache &cache,
                       const Sequence &dy, LstmpLayerParams *grad);

// Frame-wise affine map y = W x + b, used for the output layer.
struct AffineLayerParams {
  Eigen::MatrixXd weight;  // output x input
  Eigen::VectorXd bias;

  int InputDim() const { return static_cast<int>(weight.cols()); }
  int OutputDim() const { return static_cast<int>(weight.rows()); }
};

Sequence AffineForward(const AffineLayerParams &layer, const Sequence &x);
Sequence AffineBackward(const AffineLayerParams &layer, const Sequence &x,
                        const Sequence &dy, AffineLayerParams *grad);

}  // namespace farfield

#endif  // FARFIELD_FTDNN_LAYERS_H_
