// tests/ftdnn-test.cc

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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "farfield/base/error.h"
#include "farfield/base/random.h"
#include "farfield/ftdnn/layers.h"
#include "farfield/ftdnn/model-io.h"
#include "farfield/ftdnn/network.h"
#include "farfield/ftdnn/train.h"
#include "test-util.h"

namespace farfield {
namespace {

namespace fs = std::filesystem;
using testing::RelErr;

Eigen::MatrixXd RandomMatrix(Eigen::Index rows, Eigen::Index cols, Rng *rng,
                             double stddev = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = stddev * rng->Gauss();
  return m;
}

Eigen::MatrixXd SelectionN(int b, int d, double scale = 1.0) {
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(b, d);
  n.leftCols(b).setIdentity();
  return scale * n;
}

FtdnnLayerParams RandomFtdnn(int in, int b, int h, std::vector<int> offsets,
                             Rng *rng) {
  FtdnnLayerParams p;
  p.splice_offsets = std::move(offsets);
  p.factor_n = RandomMatrix(b, in * static_cast<int>(p.splice_offsets.size()), rng, 0.5);
  p.factor_m = RandomMatrix(h, b, rng, 0.5);
  p.bias = RandomMatrix(h, 1, rng, 0.5);
  return p;
}

LstmpLayerParams RandomLstmp(int in, int cell, int rec, int nrec, Rng *rng) {
  LstmpLayerParams p;
  p.w_input = RandomMatrix(4 * cell, in, rng, 0.5);
  p.w_recurrent = RandomMatrix(4 * cell, rec, rng, 0.5);
  p.bias = RandomMatrix(4 * cell, 1, rng, 0.5);
  p.recurrent_proj = RandomMatrix(rec, cell, rng, 0.5);
  p.nonrecurrent_proj = RandomMatrix(nrec, cell, rng, 0.5);
  return p;
}

// Explicit W = M N applied to hand-concatenated context, frame by frame.
Sequence OracleFtdnn(const FtdnnLayerParams &p, const Sequence &x) {
  const Eigen::MatrixXd w = p.factor_m * p.factor_n;
  const auto &o = p.splice_offsets;
  const int lo = o.front(), hi = o.back();
  Sequence y(x.rows() - (hi - lo), w.rows());
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      double acc = p.bias(i);
      for (size_t k = 0; k < o.size(); ++k)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
          acc += w(i, k * x.cols() + j) * x(t - lo + o[k], j);
      y(t, i) = std::max(acc, 0.0);
    }
  }
  return y;
}

double Sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Scalar-loop LSTMP recurrence.
Sequence OracleLstmp(const LstmpLayerParams &p, const Sequence &x) {
  const int n = static_cast<int>(p.recurrent_proj.cols());
  const int r = static_cast<int>(p.recurrent_proj.rows());
  const int q = static_cast<int>(p.nonrecurrent_proj.rows());
  std::vector<double> rp(r, 0.0), c(n, 0.0), m(n);
  Sequence y(x.rows(), r + q);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    for (int j = 0; j < n; ++j) {
      double a[4];
      for (int g = 0; g < 4; ++g) {
        double acc = p.bias(g * n + j);
        for (Eigen::Index k = 0; k < x.cols(); ++k) acc += p.w_input(g * n + j, k) * x(t, k);
        for (int k = 0; k < r; ++k) acc += p.w_recurrent(g * n + j, k) * rp[k];
        a[g] = acc;
      }
      c[j] = Sig(a[1]) * c[j] + Sig(a[0]) * std::tanh(a[2]);
      m[j] = Sig(a[3]) * std::tanh(c[j]);
    }
    for (int i = 0; i < r; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += p.recurrent_proj(i, j) * m[j];
      rp[i] = acc;
      y(t, i) = acc;
    }
    for (int i = 0; i < q; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += p.nonrecurrent_proj(i, j) * m[j];
      y(t, r + i) = acc;
    }
  }
  return y;
}

Sequence OracleAffine(const AffineLayerParams &p, const Sequence &x) {
  Sequence y(x.rows(), p.weight.rows());
  for (Eigen::Index t = 0; t < x.rows(); ++t)
    for (Eigen::Index i = 0; i < p.weight.rows(); ++i) {
      double acc = p.bias(i);
      for (Eigen::Index j = 0; j < x.cols(); ++j) acc += p.weight(i, j) * x(t, j);
      y(t, i) = acc;
    }
  return y;
}

double MaxAbsDiff(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

// sin of the largest principal angle between the row spaces of a and b.
double RowSpaceSine(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> sa(a, Eigen::ComputeThinV);
  Eigen::JacobiSVD<Eigen::MatrixXd> sb(b, Eigen::ComputeThinV);
  const Eigen::MatrixXd va = sa.matrixV(), vb = sb.matrixV();
  const Eigen::MatrixXd resid = vb - va * (va.transpose() * vb);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(resid).singularValues()(0);
}

int StepsToConverge(Eigen::MatrixXd n, double tol, int max_steps) {
  for (int k = 0; k <= max_steps; ++k) {
    if (OrthogonalityError(n) <= tol) return k;
    n = SemiOrthogonalStep(n);
  }
  return max_steps + 1;
}

NetworkSpec ToySpec() {
  NetworkSpec spec;
  spec.input_dim = 10;
  spec.layers = {LayerSpec::Ftdnn(16, 8, {-2, -1, 0, 1, 2}),
                 LayerSpec::Ftdnn(16, 8, {-1, 0, 1}), LayerSpec::Affine(2)};
  return spec;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &name)
      : path(fs::temp_directory_path() / ("farfield-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// ---------------------------------------------------------------- splice

TEST_CASE("splice with offset 0 is the identity") {
  Rng rng(1);
  const Sequence x = RandomMatrix(7, 3, &rng);
  const std::vector<int> o{0};
  CHECK(Splice(x, o) == x);
}

TEST_CASE("splice -1,0,1 over 10 frames keeps 8 and triples the width") {
  Rng rng(2);
  const std::vector<int> o{-1, 0, 1};
  const Sequence y = Splice(RandomMatrix(10, 4, &rng), o);
  CHECK(y.rows() == 8);
  CHECK(y.cols() == 12);
}

TEST_CASE("splice matches a loop oracle") {
  Rng rng(3);
  const Sequence x = RandomMatrix(15, 5, &rng);
  const std::vector<int> o{-3, 0, 3};
  const Sequence y = Splice(x, o);
  REQUIRE(y.rows() == 9);
  for (Eigen::Index t = 0; t < y.rows(); ++t)
    for (size_t k = 0; k < o.size(); ++k)
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        CHECK(y(t, k * x.cols() + j) == x(t + 3 + o[k], j));
}

TEST_CASE("splice backward is the adjoint of splice") {
  Rng rng(4);
  const std::vector<int> o{-2, 0, 1};
  const Sequence x = RandomMatrix(12, 3, &rng);
  const Sequence dy = RandomMatrix(9, 9, &rng);
  const double lhs = (Splice(x, o).array() * dy.array()).sum();
  const double rhs = (x.array() * SpliceBackward(dy, o, 12).array()).sum();
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
}

TEST_CASE("splice errors") {
  Rng rng(5);
  const std::vector<int> wide{-1, 0, 1}, unsorted{0, -1}, empty{};
  try {
    Splice(RandomMatrix(2, 3, &rng), wide);
    FAIL("expected SignalTooShort");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kSignalTooShort);
  }
  CHECK_THROWS_AS(Splice(RandomMatrix(5, 3, &rng), unsorted), Error);
  CHECK_THROWS_AS(Splice(RandomMatrix(5, 3, &rng), empty), Error);
}

// ---------------------------------------------------------------- f-tdnn

TEST_CASE("f-tdnn with selection weights copies the leading coordinates") {
  const int b = 3, d = 5, h = 6;
  FtdnnLayerParams p;
  p.splice_offsets = {0};
  p.factor_n = SelectionN(b, d);
  p.factor_m = Eigen::MatrixXd::Zero(h, b);
  p.factor_m.topRows(b).setIdentity();
  p.bias = Eigen::VectorXd::Zero(h);
  Rng rng(6);
  const Sequence x = RandomMatrix(4, d, &rng).cwiseAbs();
  const Sequence y = FtdnnForward(p, x);
  CHECK(y.leftCols(b) == x.leftCols(b));
  CHECK(y.rightCols(h - b).isZero(0.0));
}

TEST_CASE("f-tdnn with a huge negative bias outputs zeros") {
  Rng rng(7);
  FtdnnLayerParams p = RandomFtdnn(4, 3, 5, {-1, 0, 1}, &rng);
  p.bias.setConstant(-1e6);
  CHECK(FtdnnForward(p, RandomMatrix(9, 4, &rng)).isZero(0.0));
}

TEST_CASE("f-tdnn equals the explicit product W = M N") {
  for (uint64_t seed = 10; seed < 30; ++seed) {
    Rng rng(seed);
    const FtdnnLayerParams p = RandomFtdnn(4, 4, 8, {-1, 0, 1}, &rng);  // d = 12
    const Sequence x = RandomMatrix(6, 4, &rng);
    CHECK(MaxAbsDiff(FtdnnForward(p, x), OracleFtdnn(p, x)) <= 1e-12);
  }
}

TEST_CASE("f-tdnn shape mismatch") {
  Rng rng(8);
  const FtdnnLayerParams p = RandomFtdnn(4, 3, 5, {-1, 0, 1}, &rng);
  try {
    FtdnnForward(p, RandomMatrix(9, 5, &rng));
    FAIL("expected ShapeMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
}

// ------------------------------------------------------- semi-orthogonal

TEST_CASE("semi-orthogonal step leaves (I | 0) unchanged") {
  for (int b : {1, 4, 160}) {
    const Eigen::MatrixXd n = SelectionN(b, 3 * b);
    CHECK(MaxAbsDiff(SemiOrthogonalStep(n), n) <= 1e-15);
  }
}

TEST_CASE("semi-orthogonal step is idempotent on random orthonormal rows") {
  Rng rng(20);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(RandomMatrix(8, 24, &rng),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
  CHECK(MaxAbsDiff(SemiOrthogonalStep(q), q) <= 1e-14);
}

TEST_CASE("semi-orthogonal iteration converges from 2 (I | 0)") {
  const int steps = StepsToConverge(SelectionN(160, 480, 2.0), 1e-6, 30);
  MESSAGE("steps: " << steps);
  CHECK(steps <= 30);
}

TEST_CASE("semi-orthogonal iteration converges from a random 160 x 480 matrix") {
  Rng rng(21);
  Eigen::MatrixXd n = RandomMatrix(160, 480, &rng, 0.1);
  const Eigen::MatrixXd start = n;
  int steps = 0;
  while (OrthogonalityError(n) > 1e-6 && steps < 30) {
    n = SemiOrthogonalStep(n);
    ++steps;
  }
  MESSAGE("steps: " << steps);
  CHECK(OrthogonalityError(n) <= 1e-6);
  CHECK(RowSpaceSine(start, n) < 1e-6);
}

TEST_CASE("semi-orthogonal row space is preserved from near-orthogonal starts") {
  Rng rng(22);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(RandomMatrix(16, 40, &rng),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::MatrixXd start =
      svd.matrixU() * svd.matrixV().transpose() + RandomMatrix(16, 40, &rng, 1e-3);
  Eigen::MatrixXd n = start;
  for (int k = 0; k < 10; ++k) n = SemiOrthogonalStep(n);
  CHECK(OrthogonalityError(n) <= 1e-6);
  CHECK(RowSpaceSine(start, n) < 1e-6);
}

TEST_CASE("semi-orthogonal iteration converges whenever ||N N^T||_2 <= 4") {
  Rng rng(23);
  for (double top : {0.05, 0.5, 1.0, 1.9, 2.0, 2.5, 3.0, 4.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::MatrixXd n = RandomMatrix(20, 60, &rng);
      const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(n).singularValues()(0);
      n *= std::sqrt(top) / s;
      CAPTURE(top);
      CHECK(StepsToConverge(n, 1e-6, 30) <= 30);
    }
  }
}

TEST_CASE("semi-orthogonal factors are isometries on their row space") {
  Rng rng(24);
  Eigen::MatrixXd n = RandomMatrix(12, 30, &rng, 0.2);
  for (int k = 0; k < 30; ++k) n = SemiOrthogonalStep(n);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(n).singularValues();
  CHECK((sv.array() - 1.0).abs().maxCoeff() <= 1e-6);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd v = RandomMatrix(30, 1, &rng);
    CHECK((n * v).norm() <= v.norm() * (1.0 + 1e-12));
    const Eigen::VectorXd in_rows = n.transpose() * RandomMatrix(12, 1, &rng);
    CHECK(RelErr((n * in_rows).norm(), in_rows.norm()) <= 1e-6);
  }
}

TEST_CASE("semi-orthogonal step rejects tall matrices") {
  try {
    SemiOrthogonalStep(Eigen::MatrixXd::Identity(5, 4));
    FAIL("expected ShapeError");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kShapeError);
  }
}

// ------------------------------------------------------------------ LSTM

TEST_CASE("LSTM with zero parameters outputs zeros") {
  LstmpLayerParams p;
  p.w_input = Eigen::MatrixXd::Zero(4 * 6, 5);
  p.w_recurrent = Eigen::MatrixXd::Zero(4 * 6, 3);
  p.bias = Eigen::VectorXd::Zero(4 * 6);
  p.recurrent_proj = Eigen::MatrixXd::Zero(3, 6);
  p.nonrecurrent_proj = Eigen::MatrixXd::Zero(4, 6);
  Rng rng(30);
  const Sequence y = LstmpForward(p, RandomMatrix(8, 5, &rng));
  CHECK(y.cols() == 7);
  CHECK(y.isZero(0.0));
}

TEST_CASE("LSTM single frame matches a scalar oracle") {
  for (uint64_t seed = 31; seed < 41; ++seed) {
    Rng rng(seed);
    const LstmpLayerParams p = RandomLstmp(5, 6, 3, 4, &rng);
    const Sequence x = RandomMatrix(1, 5, &rng);
    CHECK(MaxAbsDiff(LstmpForward(p, x), OracleLstmp(p, x)) <= 1e-12);
  }
}

TEST_CASE("LSTM sequence matches a scalar oracle") {
  Rng rng(41);
  const LstmpLayerParams p = RandomLstmp(5, 6, 3, 4, &rng);
  const Sequence x = RandomMatrix(20, 5, &rng);
  CHECK(MaxAbsDiff(LstmpForward(p, x), OracleLstmp(p, x)) <= 1e-12);
}

TEST_CASE("LSTM output width is recurrent + non-recurrent") {
  Rng rng(42);
  const LstmpLayerParams p = RandomLstmp(7, 16, 512, 512, &rng);
  CHECK(LstmpForward(p, RandomMatrix(3, 7, &rng)).cols() == 1024);
  CHECK_THROWS_AS(LstmpForward(p, RandomMatrix(3, 8, &rng)), Error);
}

// --------------------------------------------------------------- network

TEST_CASE("ftdnn18 preset output shape") {
  const NetworkSpec spec = Preset("ftdnn18", 42);
  const NetworkParams params = NetworkParams::Zeros(spec);
  const int frames = spec.TotalContext() + 5;
  const Sequence logits = NetworkForward(params, Sequence::Zero(frames, 40));
  CHECK(logits.cols() == 42);
  CHECK(logits.rows() == frames - spec.TotalContext());
  CHECK(spec.TotalContext() == 4 + 17 * 2);
}

TEST_CASE("single-layer network equals the layer itself") {
  NetworkSpec spec;
  spec.input_dim = 6;
  spec.layers = {LayerSpec::Ftdnn(8, 4, {-1, 0, 1})};
  Rng rng(50);
  const NetworkParams params = NetworkParams::Random(spec, &rng);
  const Sequence x = RandomMatrix(9, 6, &rng);
  CHECK(NetworkForward(params, x) ==
        FtdnnForward(std::get<FtdnnLayerParams>(params.layers[0]), x));
}

TEST_CASE("three-layer network matches a layer-by-layer oracle") {
  NetworkSpec spec;
  spec.input_dim = 5;
  spec.layers = {LayerSpec::Ftdnn(8, 4, {-1, 0, 1}), LayerSpec::Lstmp(6, 3, 3),
                 LayerSpec::Affine(4)};
  for (uint64_t seed = 51; seed < 56; ++seed) {
    Rng rng(seed);
    NetworkParams params = NetworkParams::Random(spec, &rng);
    for (auto a : params.Arrays())
      for (double &v : a) v += 0.1 * rng.Gauss();
    const Sequence x = RandomMatrix(12, 5, &rng);
    const Sequence expect = OracleAffine(
        std::get<AffineLayerParams>(params.layers[2]),
        OracleLstmp(std::get<LstmpLayerParams>(params.layers[1]),
                    OracleFtdnn(std::get<FtdnnLayerParams>(params.layers[0]), x)));
    CHECK(MaxAbsDiff(NetworkForward(params, x), expect) <= 1e-12);
  }
}

TEST_CASE("random init makes every factor N semi-orthogonal") {
  Rng rng(57);
  const NetworkParams params = NetworkParams::Random(ToySpec(), &rng);
  CHECK(params.MaxOrthogonalityError() <= 1e-12);
}

TEST_CASE("uniform logits give loss ln K") {
  for (int k : {2, 5, 11}) {
    NetworkSpec spec;
    spec.input_dim = 4;
    spec.layers = {LayerSpec::Ftdnn(6, 3, {-1, 0, 1}), LayerSpec::Affine(k)};
    const NetworkParams params = NetworkParams::Zeros(spec);
    Rng rng(58);
    const std::vector<Sequence> x{RandomMatrix(10, 4, &rng)};
    const std::vector<Labels> y{Labels(8, k - 1)};
    const LossAndGradient lg = NetworkBackward(params, x, y, 0.0);
    CHECK(RelErr(lg.loss, std::log(static_cast<double>(k))) <= 1e-14);
    CHECK(lg.frames == 8);
  }
}

TEST_CASE("L2 term contributes exactly lambda times the parameter") {
  const NetworkSpec spec = ToySpec();
  Rng rng(59);
  NetworkParams params = NetworkParams::Random(spec, &rng);
  for (auto &layer : params.layers)
    if (auto *p = std::get_if<FtdnnLayerParams>(&layer)) p->bias.setZero();
  const std::vector<Sequence> x{Sequence::Zero(20, 10)};
  const std::vector<Labels> y{Labels(14, 0)};
  const double lambda = 0.37;
  const LossAndGradient with = NetworkBackward(params, x, y, lambda);
  const LossAndGradient without = NetworkBackward(params, x, y, 0.0);
  const auto g = with.gradient.Arrays();
  const auto g0 = without.gradient.Arrays();
  const auto theta = params.Arrays();
  const size_t output_bias = theta.size() - 1;
  for (size_t a = 0; a < theta.size(); ++a) {
    for (size_t k = 0; k < theta[a].size(); ++k) {
      if (a == output_bias) {
        CHECK(std::abs(g[a][k] - g0[a][k] - lambda * theta[a][k]) <= 1e-15);
      } else {
        // Zero input leaves every ReLU off, so no cross-entropy gradient.
        CHECK(g0[a][k] == 0.0);
        CHECK(g[a][k] == lambda * theta[a][k]);
      }
    }
  }
  CHECK(RelErr(with.loss - without.loss, 0.5 * lambda * params.SquaredNorm()) <= 1e-12);
}

TEST_CASE("network backward rejects misaligned or out-of-range labels") {
  const NetworkSpec spec = ToySpec();
  Rng rng(60);
  const NetworkParams params = NetworkParams::Random(spec, &rng);
  const std::vector<Sequence> x{RandomMatrix(20, 10, &rng)};
  try {
    NetworkBackward(params, x, std::vector<Labels>{Labels(20, 0)}, 0.0);
    FAIL("expected ShapeMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
  CHECK_THROWS_AS(NetworkBackward(params, x, std::vector<Labels>{Labels(14, 2)}, 0.0),
                  Error);
  CHECK_THROWS_AS(NetworkBackward(params, x, std::vector<Labels>{}, 0.0), Error);
}

// ------------------------------------------------------------ gradcheck

NetworkSpec ToyLstmSpec() {
  NetworkSpec spec;
  spec.input_dim = 6;
  spec.layers = {LayerSpec::Ftdnn(8, 4, {-1, 0, 1}), LayerSpec::Lstmp(6, 3, 3),
                 LayerSpec::Ftdnn(8, 4, {-1, 0, 1}), LayerSpec::Affine(3)};
  return spec;
}

TEST_CASE("gradient check on a toy f-tdnn network") {
  NetworkSpec spec = ToySpec();
  spec.layers.back() = LayerSpec::Affine(3);
  for (uint64_t seed : {1, 2, 3}) {
    for (double l2 : {0.0, 1e-3}) {
      const GradCheckFixture fx = MakeGradCheckFixture(spec, seed, 12);
      const GradCheckResult r = GradCheck(fx.params, fx.features, fx.labels, l2);
      CAPTURE(seed);
      CAPTURE(l2);
      CHECK(r.num_params == ParamCount(spec));
      CHECK(r.max_rel_error <= 1e-4);
      CHECK(r.kinked * 100 <= r.num_params);
    }
  }
}

TEST_CASE("gradient check on a toy f-tdnn + LSTM network") {
  const NetworkSpec spec = ToyLstmSpec();
  REQUIRE(ParamCount(spec) <= 2000);
  for (uint64_t seed : {4, 5, 6}) {
    const GradCheckFixture fx = MakeGradCheckFixture(spec, seed, 12);
    const GradCheckResult r = GradCheck(fx.params, fx.features, fx.labels, 1e-3);
    CAPTURE(seed);
    CHECK(r.max_rel_error <= 1e-4);
    CHECK(r.kinked * 100 <= r.num_params);
  }
}

TEST_CASE("gradient check on an LSTM-only network") {
  NetworkSpec spec;
  spec.input_dim = 5;
  spec.layers = {LayerSpec::Lstmp(6, 3, 4), LayerSpec::Lstmp(5, 2, 3),
                 LayerSpec::Affine(3)};
  const GradCheckFixture fx = MakeGradCheckFixture(spec, 7, 15);
  const GradCheckResult r = GradCheck(fx.params, fx.features, fx.labels, 0.0);
  CHECK(r.kinked == 0);
  CHECK(r.max_rel_error <= 1e-4);
}

TEST_CASE("gradient check catches a 10% fault") {
  const NetworkSpec spec = ToyLstmSpec();
  const GradCheckFixture fx = MakeGradCheckFixture(spec, 8, 12);
  const GradCheckResult r =
      GradCheck(fx.params, fx.features, fx.labels, 1e-3, 1e-5, true);
  CHECK(r.max_rel_error >= 5e-2);
}

// --------------------------------------------------------- architecture

TEST_CASE("presets carry the published dimensions") {
  for (const char *name : {"ftdnn15", "ftdnn18"}) {
    const NetworkSpec spec = Preset(name, 100);
    const int expect_layers = std::string(name) == "ftdnn15" ? 15 : 18;
    int ftdnn = 0;
    for (const auto &l : spec.layers) {
      if (l.kind != LayerKind::kFtdnn) continue;
      ++ftdnn;
      CHECK(l.hidden == 1536);
      CHECK(l.bottleneck == 160);
    }
    CHECK(ftdnn == expect_layers);
    CHECK(spec.layers.back().kind == LayerKind::kAffine);
    CHECK(spec.OutputDim() == 100);
  }
  const NetworkSpec lstm = Preset("ftdnn18_lstm3", 100);
  std::vector<int> lstm_after;
  int ftdnn = 0;
  for (const auto &l : lstm.layers) {
    if (l.kind == LayerKind::kFtdnn) {
      ++ftdnn;
      CHECK(l.hidden == 1024);
      CHECK(l.bottleneck == 160);
    } else if (l.kind == LayerKind::kLstmp) {
      lstm_after.push_back(ftdnn);
      CHECK(l.cell == 1024);
      CHECK(l.recurrent == 512);
      CHECK(l.nonrecurrent == 512);
      CHECK(l.OutputDim() == 1024);
    }
  }
  CHECK(ftdnn == 18);
  CHECK(lstm_after == std::vector<int>{5, 10, 15});
  CHECK_THROWS_AS(Preset("tdnn7", 10), Error);
}

TEST_CASE("param count of a single f-tdnn layer") {
  NetworkSpec spec;
  spec.input_dim = 1536;
  spec.layers = {LayerSpec::Ftdnn(1536, 160, {-1, 0})};
  CHECK(ParamCount(spec) == 738816);
  CHECK(ParamCount(NetworkSpec{}) == 0);
}

TEST_CASE("param count equals element enumeration for every preset") {
  for (const char *name : kPresetNames) {
    const NetworkSpec spec = Preset(name, 300);
    const NetworkParams params = NetworkParams::Zeros(spec);
    int64_t enumerated = 0;
    for (const auto &layer : params.layers)
      std::visit([&](const auto &p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FtdnnLayerParams>)
          enumerated += p.factor_n.size() + p.factor_m.size() + p.bias.size();
        else if constexpr (std::is_same_v<T, LstmpLayerParams>)
          enumerated += p.w_input.size() + p.w_recurrent.size() + p.bias.size() +
                        p.recurrent_proj.size() + p.nonrecurrent_proj.size();
        else
          enumerated += p.weight.size() + p.bias.size();
      }, layer);
    CAPTURE(name);
    CHECK(ParamCount(spec) == enumerated);
    CHECK(params.Count() == enumerated);
  }
}

TEST_CASE("scaled presets stay valid and small") {
  for (auto [name, divisor] : {std::pair{"ftdnn18", 96}, std::pair{"ftdnn18_lstm3", 64}}) {
    const NetworkSpec spec = ScaleSpec(Preset(name, 4), divisor);
    CHECK_NOTHROW(spec.Validate());
    for (const auto &l : spec.layers) {
      CHECK(l.hidden <= 64);
      CHECK(l.bottleneck <= 64);
      CHECK(l.cell <= 64);
      CHECK(l.recurrent + l.nonrecurrent <= 64);
    }
  }
}

TEST_CASE("network spec JSON round trip and strictness") {
  const NetworkSpec spec = Preset("ftdnn18_lstm3", 7);
  const NetworkSpec back = NetworkSpec::FromJson(spec.ToJson());
  CHECK(back.ToJson() == spec.ToJson());
  CHECK(ParamCount(back) == ParamCount(spec));
  CHECK_THROWS_AS(NetworkSpec::FromJson(R"({"layers": [{"type": "affine", "output": 2, "bias": 1}]})"),
                  Error);
  CHECK_THROWS_AS(NetworkSpec::FromJson(R"({"layers": [], "extra": 1})"), Error);
  CHECK_THROWS_AS(NetworkSpec::FromJson(R"({"input_dim": 4, "layers": [{"type": "ftdnn", "hidden": 8, "bottleneck": 12, "offsets": [0]}]})"),
                  Error);
}

// -------------------------------------------------------------- training

TEST_CASE("toy task is linearly separable") {
  const ToyTask task = MakeSeparableToyTask(20, 100, 10, 2.0, 20, 7);
  int correct = 0, total = 0;
  for (size_t u = 0; u < task.features.size(); ++u)
    for (Eigen::Index t = 0; t < task.features[u].rows(); ++t) {
      correct += (task.features[u].row(t).sum() > 0.0) == (task.labels[u][t] == 1);
      ++total;
    }
  CHECK(static_cast<double>(correct) / total >= 0.99);
}

TEST_CASE("toy training reaches 99% held-out accuracy with orthogonal factors") {
  const ToyTask task = MakeSeparableToyTask(20, 100, 10, 2.0, 20, 7);
  TrainConfig config;
  config.seed = 3;
  config.constraint_interval = 4;
  const TrainResult r = TrainToy(ToySpec(), task.features, task.labels, config);
  CHECK(r.heldout_accuracy >= 0.99);
  for (const auto &layer : r.params.layers)
    if (const auto *p = std::get_if<FtdnnLayerParams>(&layer))
      CHECK(OrthogonalityError(p->factor_n) <= 1e-4);
  REQUIRE(r.log.size() == 10);
  for (int e = 1; e < 5; ++e) CHECK(r.log[e].loss < r.log[e - 1].loss);
  CHECK(r.log.back().frame_acc == r.heldout_accuracy);
}

TEST_CASE("huge L2 drives the parameters toward zero") {
  const ToyTask task = MakeSeparableToyTask(20, 100, 10, 2.0, 20, 7);
  TrainConfig config;
  config.seed = 3;
  config.l2_coefficient = 1e6;
  config.lr_initial = config.lr_final = 1e-7;
  double previous = std::numeric_limits<double>::infinity();
  double previous_free = previous;
  for (int epochs = 1; epochs <= 5; ++epochs) {
    config.epochs = epochs;
    const TrainResult r = TrainToy(ToySpec(), task.features, task.labels, config);
    double free = 0.0;  // everything but the constrained factors
    for (const auto &layer : r.params.layers)
      std::visit([&](const auto &p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FtdnnLayerParams>)
          free += p.factor_m.squaredNorm() + p.bias.squaredNorm();
        else if constexpr (std::is_same_v<T, AffineLayerParams>)
          free += p.weight.squaredNorm() + p.bias.squaredNorm();
      }, layer);
    CAPTURE(epochs);
    CHECK(r.params.SquaredNorm() < previous);
    CHECK(free < 0.5 * previous_free);
    previous = r.params.SquaredNorm();
    previous_free = free;
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  const ToyTask task = MakeSeparableToyTask(10, 60, 10, 2.0, 15, 9);
  TrainConfig config;
  config.seed = 11;
  config.epochs = 3;
  const NetworkSpec spec = ToySpec();
  auto run = [&]() {
    const TrainResult r = TrainToy(spec, task.features, task.labels, config);
    return SerializeModel({spec.input_dim, r.params, r.normalization});
  };
  const std::string first = run();
  CHECK(run() == first);
  config.seed = 12;
  CHECK(run() != first);
}

TEST_CASE("labels may be given per input frame or per output frame") {
  const ToyTask task = MakeSeparableToyTask(6, 50, 10, 2.0, 10, 13);
  const NetworkSpec spec = ToySpec();
  std::vector<Labels> cropped;
  for (const auto &l : task.labels)
    cropped.emplace_back(l.begin() + spec.LeftContext(),
                         l.end() - (spec.TotalContext() - spec.LeftContext()));
  TrainConfig config;
  config.epochs = 2;
  const TrainResult a = TrainToy(spec, task.features, task.labels, config);
  const TrainResult b = TrainToy(spec, task.features, cropped, config);
  CHECK(SerializeModel({10, a.params, a.normalization}) ==
        SerializeModel({10, b.params, b.normalization}));
}

TEST_CASE("NaN features make training diverge") {
  ToyTask task = MakeSeparableToyTask(6, 50, 10, 2.0, 10, 14);
  task.features[2](7, 3) = std::numeric_limits<double>::quiet_NaN();
  try {
    TrainToy(ToySpec(), task.features, task.labels, TrainConfig{});
    FAIL("expected TrainingDiverged");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kTrainingDiverged);
  }
}

TEST_CASE("training config validation") {
  const ToyTask task = MakeSeparableToyTask(4, 30, 10, 2.0, 10, 15);
  for (auto mutate : std::vector<void (*)(TrainConfig &)>{
           [](TrainConfig &c) { c.l2_coefficient = -1.0; },
           [](TrainConfig &c) { c.constraint_interval = 0; },
           [](TrainConfig &c) { c.epochs = 0; },
           [](TrainConfig &c) { c.lr_initial = 0.0; },
           [](TrainConfig &c) { c.heldout_fraction = 1.0; }}) {
    TrainConfig config;
    mutate(config);
    try {
      TrainToy(ToySpec(), task.features, task.labels, config);
      FAIL("expected InvalidConfig");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kInvalidConfig);
    }
  }
}

TEST_CASE("learning rate decays exponentially between the endpoints") {
  TrainConfig config;
  config.lr_initial = 0.1;
  config.lr_final = 0.001;
  config.epochs = 3;
  CHECK(config.LearningRate(0) == 0.1);
  CHECK(RelErr(config.LearningRate(1), 0.01) <= 1e-12);
  CHECK(RelErr(config.LearningRate(2), 0.001) <= 1e-12);
}

// -------------------------------------------------------------- file IO

TEST_CASE("model file round trip") {
  TempDir dir("model-io");
  const NetworkSpec spec = ToyLstmSpec();
  Rng rng(70);
  Model model{spec.input_dim, NetworkParams::Random(spec, &rng), {}};
  model.normalization.mean = RandomMatrix(6, 1, &rng);
  model.normalization.scale = RandomMatrix(6, 1, &rng).cwiseAbs();
  const std::string path = (dir.path / "m.ftdn").string();
  WriteModel(path, model);
  const Model back = ReadModel(path);
  CHECK(SerializeModel(back) == SerializeModel(model));
  CHECK(SpecOf(back).ToJson() == spec.ToJson());
  const auto a = model.params.Arrays();
  const auto b = back.params.Arrays();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(std::equal(a[i].begin(), a[i].end(), b[i].begin(), b[i].end()));
  CHECK(back.normalization.mean == model.normalization.mean);

  const std::string bytes = SerializeModel(model);
  CHECK(bytes.substr(0, 4) == "FTDN");
  CHECK(bytes.substr(4, 4) == std::string("\x01\x00\x00\x00", 4));
}

TEST_CASE("model file errors") {
  TempDir dir("model-errors");
  const NetworkSpec spec = ToySpec();
  const std::string bytes =
      SerializeModel({spec.input_dim, NetworkParams::Zeros(spec), {}});
  auto code_of = [](const std::string &b) {
    try {
      DeserializeModel(b);
    } catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::kShapeError;
  };
  CHECK(code_of(bytes.substr(0, bytes.size() - 3)) == ErrorCode::kFormatError);
  CHECK(code_of("FTDX" + bytes.substr(4)) == ErrorCode::kFormatError);
  std::string bad_version = bytes;
  bad_version[4] = 2;
  CHECK(code_of(bad_version) == ErrorCode::kFormatError);
  CHECK(code_of(bytes + "junk") == ErrorCode::kFormatError);
  try {
    ReadModel((dir.path / "missing").string());
    FAIL("expected IoError");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}

TEST_CASE("feature and label text round trip") {
  TempDir dir("text-io");
  const ToyTask task = MakeSeparableToyTask(3, 7, 4, 2.0, 3, 16);
  const std::string fp = (dir.path / "feats.txt").string();
  const std::string lp = (dir.path / "labels.txt").string();
  WriteFeatureText(fp, task.features);
  WriteLabelText(lp, task.labels);
  const auto f = ReadFeatureText(fp);
  const auto l = ReadLabelText(lp);
  REQUIRE(f.size() == 3);
  for (size_t u = 0; u < 3; ++u) CHECK(f[u] == task.features[u]);
  CHECK(l == task.labels);

  std::ofstream(dir.path / "bad.txt") << "1 2\n3\n";
  try {
    ReadFeatureText((dir.path / "bad.txt").string());
    FAIL("expected FormatError");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kFormatError);
  }
  std::ofstream(dir.path / "bad-labels.txt") << "1\nx\n";
  CHECK_THROWS_AS(ReadLabelText((dir.path / "bad-labels.txt").string()), Error);
}

}  // namespace
}  // namespace farfield
