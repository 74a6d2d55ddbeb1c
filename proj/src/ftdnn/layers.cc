// src/ftdnn/layers.cc

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

#include "farfield/ftdnn/layers.h"

#include <cmath>
#include <string>

#include "farfield/base/error.h"

namespace farfield {

namespace {

void CheckOffsets(std::span<const int> offsets) {
  if (offsets.empty())
    throw Error(ErrorCode::kInvalidConfig, "splice offsets must not be empty");
  for (size_t i = 1; i < offsets.size(); ++i)
    if (offsets[i] <= offsets[i - 1])
      throw Error(ErrorCode::kInvalidConfig,
                  "splice offsets must be strictly increasing");
}

std::string Shape(const Eigen::MatrixXd &m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Sequence Splice(const Sequence &seq, std::span<const int> offsets) {
  CheckOffsets(offsets);
  const int lo = offsets.front(), span = offsets.back() - offsets.front();
  if (seq.rows() <= span)
    throw Error(ErrorCode::kSignalTooShort,
                std::to_string(seq.rows()) + " frames cannot cover a context of " +
                    std::to_string(span + 1));
  const Eigen::Index frames = seq.rows() - span, dim = seq.cols();
  Sequence out(frames, dim * static_cast<Eigen::Index>(offsets.size()));
  for (size_t j = 0; j < offsets.size(); ++j)
    out.middleCols(j * dim, dim) = seq.middleRows(offsets[j] - lo, frames);
  return out;
}

Sequence SpliceBackward(const Sequence &d_spliced, std::span<const int> offsets,
                        Eigen::Index num_frames) {
  CheckOffsets(offsets);
  const int lo = offsets.front();
  const Eigen::Index frames = d_spliced.rows();
  const Eigen::Index dim = d_spliced.cols() / static_cast<Eigen::Index>(offsets.size());
  Sequence out = Sequence::Zero(num_frames, dim);
  for (size_t j = 0; j < offsets.size(); ++j)
    out.middleRows(offsets[j] - lo, frames) += d_spliced.middleCols(j * dim, dim);
  return out;
}

Sequence FtdnnForward(const FtdnnLayerParams &layer, const Sequence &x,
                      FtdnnCache *cache) {
  const auto width = static_cast<Eigen::Index>(layer.splice_offsets.size());
  if (x.cols() * width != layer.factor_n.cols())
    throw Error(ErrorCode::kShapeMismatch,
                "input width " + std::to_string(x.cols()) + " x " +
                    std::to_string(width) + " offsets does not match N " +
                    Shape(layer.factor_n));
  if (layer.factor_m.cols() != layer.factor_n.rows() ||
      layer.bias.size() != layer.factor_m.rows())
    throw Error(ErrorCode::kShapeMismatch,
                "inconsistent factor shapes: N " + Shape(layer.factor_n) +
                    ", M " + Shape(layer.factor_m) + ", bias " +
                    std::to_string(layer.bias.size()));
  Sequence spliced = Splice(x, layer.splice_offsets);
  Sequence bottleneck = spliced * layer.factor_n.transpose();
  Sequence pre = bottleneck * layer.factor_m.transpose();
  pre.rowwise() += layer.bias.transpose();
  Sequence y = pre.cwiseMax(0.0);
  if (cache) {
    cache->spliced = std::move(spliced);
    cache->bottleneck = std::move(bottleneck);
    cache->preactivation = std::move(pre);
    cache->input_frames = x.rows();
  }
  return y;
}

Sequence FtdnnBackward(const FtdnnLayerParams &layer, const FtdnnCache &cache,
                       const Sequence &dy, FtdnnLayerParams *grad) {
  const Sequence dz =
      (cache.preactivation.array() > 0.0).select(dy, Sequence::Zero(dy.rows(), dy.cols()));
  grad->bias += dz.colwise().sum().transpose();
  grad->factor_m += dz.transpose() * cache.bottleneck;
  const Sequence du = dz * layer.factor_m;
  grad->factor_n += du.transpose() * cache.spliced;
  return SpliceBackward(du * layer.factor_n, layer.splice_offsets,
                        cache.input_frames);
}

double OrthogonalityError(const Eigen::MatrixXd &n) {
  return (n * n.transpose() -
          Eigen::MatrixXd::Identity(n.rows(), n.rows()))
      .norm();
}

Eigen::MatrixXd SemiOrthogonalStep(const Eigen::MatrixXd &n) {
  if (n.rows() > n.cols())
    throw Error(ErrorCode::kShapeError,
                "semi-orthogonal constraint needs rows <= columns, got " +
                    Shape(n));
  Eigen::MatrixXd p = n * n.transpose();
  Eigen::MatrixXd scaled = n;
  // Gershgorin bound first; the eigensolver only runs when it is needed.
  if (p.cwiseAbs().rowwise().sum().maxCoeff() > 2.0) {
    const double top =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .maxCoeff();
    if (top > 2.0) {
      scaled /= std::sqrt(top);
      p /= top;
    }
  }
  p.diagonal().array() -= 1.0;
  return scaled - 0.5 * p * scaled;
}

Sequence LstmpForward(const LstmpLayerParams &layer, const Sequence &x,
                      LstmpCache *cache) {
  const int n = layer.CellDim(), r = layer.RecurrentDim();
  if (x.cols() != layer.InputDim())
    throw Error(ErrorCode::kShapeMismatch,
                "LSTM input width " + std::to_string(x.cols()) + ", expected " +
                    std::to_string(layer.InputDim()));
  if (layer.w_input.rows() != 4 * n || layer.w_recurrent.rows() != 4 * n ||
      layer.w_recurrent.cols() != r || layer.bias.size() != 4 * n ||
      layer.nonrecurrent_proj.cols() != n)
    throw Error(ErrorCode::kShapeMismatch, "inconsistent LSTM parameter shapes");

  const Eigen::Index frames = x.rows();
  Sequence input_part = x * layer.w_input.transpose();
  input_part.rowwise() += layer.bias.transpose();
  Sequence gates(frames, 4 * n), cell(frames, n), cell_tanh(frames, n),
      memory(frames, n), recurrent(frames, r);
  Sequence out(frames, layer.OutputDim());
  Eigen::VectorXd r_prev = Eigen::VectorXd::Zero(r);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < frames; ++t) {
    Eigen::VectorXd a =
        input_part.row(t).transpose() + layer.w_recurrent * r_prev;
    for (int j = 0; j < n; ++j) {
      a(j) = Sigmoid(a(j));                   // input gate
      a(n + j) = Sigmoid(a(n + j));           // forget gate
      a(2 * n + j) = std::tanh(a(2 * n + j));  // candidate
      a(3 * n + j) = Sigmoid(a(3 * n + j));   // output gate
    }
    const auto i = a.segment(0, n), f = a.segment(n, n), g = a.segment(2 * n, n),
               o = a.segment(3 * n, n);
    Eigen::VectorXd c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    Eigen::VectorXd tc = c.array().tanh().matrix();
    Eigen::VectorXd m = o.cwiseProduct(tc);
    Eigen::VectorXd rt = layer.recurrent_proj * m;
    out.row(t).head(r) = rt.transpose();
    out.row(t).tail(layer.NonrecurrentDim()) =
        (layer.nonrecurrent_proj * m).transpose();
    gates.row(t) = a.transpose();
    cell.row(t) = c.transpose();
    cell_tanh.row(t) = tc.transpose();
    memory.row(t) = m.transpose();
    recurrent.row(t) = rt.transpose();
    r_prev = std::move(rt);
    c_prev = std::move(c);
  }
  if (cache) {
    cache->input = x;
    cache->gates = std::move(gates);
    cache->cell = std::move(cell);
    cache->cell_tanh = std::move(cell_tanh);
    cache->memory = std::move(memory);
    cache->recurrent = std::move(recurrent);
  }
  return out;
}

Sequence LstmpBackward(const LstmpLayerParams &layer, const LstmpCache &cache,
                       const Sequence &dy, LstmpLayerParams *grad) {
  const int n = layer.CellDim(), r = layer.RecurrentDim();
  const Eigen::Index frames = cache.input.rows();
  Sequence da_all(frames, 4 * n);
  Eigen::VectorXd dr_next = Eigen::VectorXd::Zero(r);  // from step t + 1
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    const Eigen::VectorXd dr = dy.row(t).head(r).transpose() + dr_next;
    const Eigen::VectorXd dp = dy.row(t).tail(layer.NonrecurrentDim()).transpose();
    const Eigen::VectorXd m = cache.memory.row(t).transpose();
    grad->recurrent_proj += dr * m.transpose();
    grad->nonrecurrent_proj += dp * m.transpose();
    const Eigen::VectorXd dm = layer.recurrent_proj.transpose() * dr +
                               layer.nonrecurrent_proj.transpose() * dp;

    const Eigen::VectorXd a = cache.gates.row(t).transpose();
    const auto i = a.segment(0, n), f = a.segment(n, n), g = a.segment(2 * n, n),
               o = a.segment(3 * n, n);
    const Eigen::VectorXd tc = cache.cell_tanh.row(t).transpose();
    Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(n);
    if (t > 0) c_prev = cache.cell.row(t - 1).transpose();

    const Eigen::VectorXd dc =
        dm.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix()) +
        dc_next;
    Eigen::VectorXd da(4 * n);
    da.segment(0, n) = dc.cwiseProduct(g).cwiseProduct(
        (i.array() * (1.0 - i.array())).matrix());
    da.segment(n, n) = dc.cwiseProduct(c_prev).cwiseProduct(
        (f.array() * (1.0 - f.array())).matrix());
    da.segment(2 * n, n) = dc.cwiseProduct(i).cwiseProduct(
        (1.0 - g.array().square()).matrix());
    da.segment(3 * n, n) = dm.cwiseProduct(tc).cwiseProduct(
        (o.array() * (1.0 - o.array())).matrix());
    da_all.row(t) = da.transpose();

    if (t > 0)
      grad->w_recurrent += da * cache.recurrent.row(t - 1);
    dr_next = layer.w_recurrent.transpose() * da;
    dc_next = dc.cwiseProduct(f);
  }
  grad->w_input += da_all.transpose() * cache.input;
  grad->bias += da_all.colwise().sum().transpose();
  return da_all * layer.w_input;
}

Sequence AffineForward(const AffineLayerParams &layer, const Sequence &x) {
  if (x.cols() != layer.InputDim() || layer.bias.size() != layer.OutputDim())
    throw Error(ErrorCode::kShapeMismatch,
                "affine layer expects width " + std::to_string(layer.InputDim()) +
                    ", got " + std::to_string(x.cols()));
  Sequence y = x * layer.weight.transpose();
  y.rowwise() += layer.bias.transpose();
  return y;
}

Sequence AffineBackward(const AffineLayerParams &layer, const Sequence &x,
                        const Sequence &dy, AffineLayerParams *grad) {
  grad->weight += dy.transpose() * x;
  grad->bias += dy.colwise().sum().transpose();
  return dy * layer.weight;
}

}  // namespace farfield
