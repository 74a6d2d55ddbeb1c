// src/ftdnn/model-io.cc

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

#include "farfield/ftdnn/model-io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "farfield/base/error.h"

namespace farfield {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host byte order");

namespace {

enum : uint32_t { kTagFtdnn = 1, kTagLstmp = 2, kTagAffine = 3, kTagNorm = 4 };

class Writer {
 public:
  void U32(uint32_t v) { Raw(&v, sizeof v); }
  void I32(int32_t v) { Raw(&v, sizeof v); }
  void Doubles(const double *p, size_t n) { Raw(p, n * sizeof(double)); }
  void Matrix(const Eigen::MatrixXd &m) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = m;
    Doubles(r.data(), r.size());
  }
  void Vector(const Eigen::VectorXd &v) { Doubles(v.data(), v.size()); }
  std::string &bytes() { return bytes_; }

 private:
  void Raw(const void *p, size_t n) {
    bytes_.append(static_cast<const char *>(p), n);
  }
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(const std::string &bytes) : bytes_(bytes) {}

  uint32_t U32() {
    uint32_t v;
    Raw(&v, sizeof v);
    return v;
  }
  int32_t I32() {
    int32_t v;
    Raw(&v, sizeof v);
    return v;
  }
  Eigen::MatrixXd Matrix(uint32_t rows, uint32_t cols) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r(rows, cols);
    Raw(r.data(), r.size() * sizeof(double));
    return r;
  }
  Eigen::VectorXd Vector(uint32_t n) {
    Eigen::VectorXd v(n);
    Raw(v.data(), n * sizeof(double));
    return v;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Raw(void *p, size_t n) {
    if (bytes_.size() - pos_ < n)
      throw Error(ErrorCode::kFormatError, "model file is truncated");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  const std::string &bytes_;
  size_t pos_ = 0;
};

uint32_t Dim(Eigen::Index n) { return static_cast<uint32_t>(n); }

// Caps shape headers before allocating.
void CheckSize(uint64_t elements) {
  if (elements > (uint64_t{1} << 31))
    throw Error(ErrorCode::kFormatError, "implausible shape in model file");
}

}  // namespace

std::string SerializeModel(const Model &model) {
  Writer w;
  w.bytes() = "FTDN";
  w.U32(kModelFormatVersion);
  w.U32(static_cast<uint32_t>(model.input_dim));
  w.U32(static_cast<uint32_t>(model.params.layers.size()));
  for (const auto &layer : model.params.layers) {
    if (const auto *p = std::get_if<FtdnnLayerParams>(&layer)) {
      w.U32(kTagFtdnn);
      w.U32(Dim(p->factor_n.rows()));
      w.U32(Dim(p->factor_n.cols()));
      w.U32(Dim(p->factor_m.rows()));
      w.U32(Dim(p->splice_offsets.size()));
      for (int o : p->splice_offsets) w.I32(o);
      w.Matrix(p->factor_n);
      w.Matrix(p->factor_m);
      w.Vector(p->bias);
    } else if (const auto *p = std::get_if<LstmpLayerParams>(&layer)) {
      w.U32(kTagLstmp);
      w.U32(Dim(p->CellDim()));
      w.U32(Dim(p->InputDim()));
      w.U32(Dim(p->RecurrentDim()));
      w.U32(Dim(p->NonrecurrentDim()));
      w.Matrix(p->w_input);
      w.Matrix(p->w_recurrent);
      w.Vector(p->bias);
      w.Matrix(p->recurrent_proj);
      w.Matrix(p->nonrecurrent_proj);
    } else {
      const auto &a = std::get<AffineLayerParams>(layer);
      w.U32(kTagAffine);
      w.U32(Dim(a.OutputDim()));
      w.U32(Dim(a.InputDim()));
      w.Matrix(a.weight);
      w.Vector(a.bias);
    }
  }
  if (!model.normalization.empty()) {
    w.U32(kTagNorm);
    w.U32(Dim(model.normalization.mean.size()));
    w.Vector(model.normalization.mean);
    w.Vector(model.normalization.scale);
  }
  return std::move(w.bytes());
}

Model DeserializeModel(const std::string &bytes) {
  if (bytes.compare(0, 4, "FTDN") != 0)
    throw Error(ErrorCode::kFormatError, "not a model file (bad magic)");
  const std::string body = bytes.substr(4);
  Reader r(body);
  const uint32_t version = r.U32();
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::kFormatError,
                "unsupported model format version " + std::to_string(version));
  Model model;
  model.input_dim = static_cast<int>(r.U32());
  const uint32_t num_layers = r.U32();
  CheckSize(num_layers);
  for (uint32_t i = 0; i < num_layers; ++i) {
    const uint32_t tag = r.U32();
    if (tag == kTagFtdnn) {
      FtdnnLayerParams p;
      const uint32_t b = r.U32(), d = r.U32(), h = r.U32(), k = r.U32();
      CheckSize(uint64_t{b} * d + uint64_t{h} * b + k);
      if (k == 0 || d % k != 0)
        throw Error(ErrorCode::kFormatError, "f-tdnn layer with bad splice header");
      for (uint32_t j = 0; j < k; ++j) p.splice_offsets.push_back(r.I32());
      p.factor_n = r.Matrix(b, d);
      p.factor_m = r.Matrix(h, b);
      p.bias = r.Vector(h);
      model.params.layers.emplace_back(std::move(p));
    } else if (tag == kTagLstmp) {
      LstmpLayerParams p;
      const uint32_t n = r.U32(), in = r.U32(), rec = r.U32(), nrec = r.U32();
      CheckSize(4 * uint64_t{n} * (in + rec + 1) + uint64_t{rec + nrec} * n);
      p.w_input = r.Matrix(4 * n, in);
      p.w_recurrent = r.Matrix(4 * n, rec);
      p.bias = r.Vector(4 * n);
      p.recurrent_proj = r.Matrix(rec, n);
      p.nonrecurrent_proj = r.Matrix(nrec, n);
      model.params.layers.emplace_back(std::move(p));
    } else if (tag == kTagAffine) {
      AffineLayerParams p;
      const uint32_t out = r.U32(), in = r.U32();
      CheckSize(uint64_t{out} * in + out);
      p.weight = r.Matrix(out, in);
      p.bias = r.Vector(out);
      model.params.layers.emplace_back(std::move(p));
    } else {
      throw Error(ErrorCode::kFormatError,
                  "unknown layer tag " + std::to_string(tag));
    }
  }
  if (!r.AtEnd()) {
    if (r.U32() != kTagNorm)
      throw Error(ErrorCode::kFormatError, "unexpected trailing data");
    const uint32_t dim = r.U32();
    CheckSize(dim);
    model.normalization.mean = r.Vector(dim);
    model.normalization.scale = r.Vector(dim);
    if (!r.AtEnd())
      throw Error(ErrorCode::kFormatError, "unexpected trailing data");
  }
  try {
    SpecOf(model).Validate();
  } catch (const Error &e) {
    throw Error(ErrorCode::kFormatError, std::string("inconsistent model: ") + e.what());
  }
  return model;
}

NetworkSpec SpecOf(const Model &model) {
  NetworkSpec spec;
  spec.input_dim = model.input_dim;
  int in = model.input_dim;
  for (const auto &layer : model.params.layers) {
    if (const auto *p = std::get_if<FtdnnLayerParams>(&layer)) {
      if (p->factor_n.cols() != in * static_cast<Eigen::Index>(p->splice_offsets.size()))
        throw Error(ErrorCode::kShapeMismatch, "f-tdnn layer input width mismatch");
      spec.layers.push_back(
          LayerSpec::Ftdnn(p->OutputDim(), p->Bottleneck(), p->splice_offsets));
    } else if (const auto *p = std::get_if<LstmpLayerParams>(&layer)) {
      if (p->InputDim() != in)
        throw Error(ErrorCode::kShapeMismatch, "LSTM layer input width mismatch");
      spec.layers.push_back(
          LayerSpec::Lstmp(p->CellDim(), p->RecurrentDim(), p->NonrecurrentDim()));
    } else {
      const auto &a = std::get<AffineLayerParams>(layer);
      if (a.InputDim() != in)
        throw Error(ErrorCode::kShapeMismatch, "affine layer input width mismatch");
      spec.layers.push_back(LayerSpec::Affine(a.OutputDim()));
    }
    in = spec.layers.back().OutputDim();
  }
  return spec;
}

void WriteModel(const std::string &path, const Model &model) {
  const std::string bytes = SerializeModel(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write error on " + path);
}

Model ReadModel(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return DeserializeModel(buf.str());
}

}  // namespace farfield
