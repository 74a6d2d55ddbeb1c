// src/ftdnn/network.cc

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

#include "farfield/ftdnn/network.h"

#include <algorithm>
#include <cmath>

#include "farfield/base/error.h"
#include "json.hpp"

namespace farfield {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void FillGaussian(Eigen::MatrixXd *m, double stddev, Rng *rng) {
  for (Eigen::Index j = 0; j < m->cols(); ++j)
    for (Eigen::Index i = 0; i < m->rows(); ++i)
      (*m)(i, j) = stddev * rng->Gauss();
}

// Nearest matrix with orthonormal rows (polar factor).
Eigen::MatrixXd OrthonormalRows(const Eigen::MatrixXd &n) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(n, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

std::span<double> Span(Eigen::MatrixXd &m) { return {m.data(), size_t(m.size())}; }
std::span<double> Span(Eigen::VectorXd &v) { return {v.data(), size_t(v.size())}; }

int ScaleDim(int dim, int divisor) {
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(dim) / divisor)));
}

struct LayerCache {
  Sequence input;
  FtdnnCache ftdnn;
  LstmpCache lstmp;
};

Sequence ForwardLayer(const LayerParams &layer, const Sequence &x,
                      LayerCache *cache) {
  return std::visit(
      Overloaded{
          [&](const FtdnnLayerParams &p) {
            return FtdnnForward(p, x, cache ? &cache->ftdnn : nullptr);
          },
          [&](const LstmpLayerParams &p) {
            return LstmpForward(p, x, cache ? &cache->lstmp : nullptr);
          },
          [&](const AffineLayerParams &p) {
            if (cache) cache->input = x;
            return AffineForward(p, x);
          }},
      layer);
}

Sequence BackwardLayer(const LayerParams &layer, const LayerCache &cache,
                       const Sequence &dy, LayerParams *grad) {
  return std::visit(
      Overloaded{
          [&](const FtdnnLayerParams &p) {
            return FtdnnBackward(p, cache.ftdnn, dy,
                                 &std::get<FtdnnLayerParams>(*grad));
          },
          [&](const LstmpLayerParams &p) {
            return LstmpBackward(p, cache.lstmp, dy,
                                 &std::get<LstmpLayerParams>(*grad));
          },
          [&](const AffineLayerParams &p) {
            return AffineBackward(p, cache.input, dy,
                                  &std::get<AffineLayerParams>(*grad));
          }},
      layer);
}

long double SquaredNormExtended(const NetworkParams &params) {
  long double s = 0.0;
  for (auto a : params.Arrays())
    for (double v : a) s += static_cast<long double>(v) * v;
  return s;
}

NetworkParams ZerosLike(const NetworkParams &params) {
  NetworkParams z = params;
  for (auto a : z.Arrays()) std::fill(a.begin(), a.end(), 0.0);
  return z;
}

void CheckBatch(std::span<const Sequence> features,
                std::span<const Labels> labels) {
  if (features.size() != labels.size())
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(features.size()) + " utterances but " +
                    std::to_string(labels.size()) + " label sequences");
}

// Adds the cross-entropy of one utterance; returns dL/dlogits (unscaled).
Sequence SoftmaxCrossEntropy(const Sequence &logits, const Labels &labels,
                             long double *ce_sum, int *correct) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(labels.size()) + " labels for " +
                    std::to_string(logits.rows()) + " output frames");
  Sequence d(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const int y = labels[t];
    if (y < 0 || y >= logits.cols())
      throw Error(ErrorCode::kInvalidConfig,
                  "label " + std::to_string(y) + " outside [0, " +
                      std::to_string(logits.cols()) + ")");
    Eigen::Index best;
    const double peak = logits.row(t).maxCoeff(&best);
    const Eigen::RowVectorXd e = (logits.row(t).array() - peak).exp().matrix();
    const double z = e.sum();
    *ce_sum += std::log(z) + peak - logits(t, y);
    if (best == y) ++*correct;
    d.row(t) = e / z;
    d(t, y) -= 1.0;
  }
  return d;
}

}  // namespace

LayerSpec LayerSpec::Ftdnn(int hidden, int bottleneck, std::vector<int> offsets) {
  LayerSpec s;
  s.kind = LayerKind::kFtdnn;
  s.hidden = hidden;
  s.bottleneck = bottleneck;
  s.offsets = std::move(offsets);
  return s;
}

LayerSpec LayerSpec::Lstmp(int cell, int recurrent, int nonrecurrent) {
  LayerSpec s;
  s.kind = LayerKind::kLstmp;
  s.cell = cell;
  s.recurrent = recurrent;
  s.nonrecurrent = nonrecurrent;
  return s;
}

LayerSpec LayerSpec::Affine(int output) {
  LayerSpec s;
  s.kind = LayerKind::kAffine;
  s.output = output;
  return s;
}

int LayerSpec::OutputDim() const {
  switch (kind) {
    case LayerKind::kFtdnn: return hidden;
    case LayerKind::kLstmp: return recurrent + nonrecurrent;
    case LayerKind::kAffine: return output;
  }
  return 0;
}

int NetworkSpec::OutputDim() const {
  return layers.empty() ? input_dim : layers.back().OutputDim();
}

std::vector<int> NetworkSpec::LayerInputDims() const {
  std::vector<int> dims;
  int d = input_dim;
  for (const auto &l : layers) {
    dims.push_back(d);
    d = l.OutputDim();
  }
  return dims;
}

int NetworkSpec::TotalContext() const {
  int total = 0;
  for (const auto &l : layers)
    if (l.kind == LayerKind::kFtdnn && !l.offsets.empty())
      total += l.offsets.back() - l.offsets.front();
  return total;
}

int NetworkSpec::LeftContext() const {
  int left = 0;
  for (const auto &l : layers)
    if (l.kind == LayerKind::kFtdnn && !l.offsets.empty())
      left -= l.offsets.front();
  return left;
}

void NetworkSpec::Validate() const {
  auto fail = [](size_t i, const std::string &what) {
    throw Error(ErrorCode::kInvalidConfig,
                "layer " + std::to_string(i) + ": " + what);
  };
  if (input_dim <= 0)
    throw Error(ErrorCode::kInvalidConfig, "input_dim must be positive");
  const auto in = LayerInputDims();
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec &l = layers[i];
    switch (l.kind) {
      case LayerKind::kFtdnn: {
        if (l.hidden <= 0 || l.bottleneck <= 0)
          fail(i, "hidden and bottleneck must be positive");
        if (l.offsets.empty()) fail(i, "splice offsets must not be empty");
        for (size_t j = 1; j < l.offsets.size(); ++j)
          if (l.offsets[j] <= l.offsets[j - 1])
            fail(i, "splice offsets must be strictly increasing");
        const int64_t d = int64_t{in[i]} * static_cast<int64_t>(l.offsets.size());
        if (l.bottleneck >= d || l.bottleneck > l.hidden)
          fail(i, "bottleneck " + std::to_string(l.bottleneck) +
                      " needs b < " + std::to_string(d) + " and b <= " +
                      std::to_string(l.hidden));
        break;
      }
      case LayerKind::kLstmp:
        if (l.cell <= 0 || l.recurrent <= 0 || l.nonrecurrent <= 0)
          fail(i, "LSTM dimensions must be positive");
        break;
      case LayerKind::kAffine:
        if (l.output <= 0) fail(i, "affine output must be positive");
        break;
    }
  }
}

NetworkSpec NetworkSpec::FromJson(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("network spec is not valid JSON: ") + e.what());
  }
  auto bad = [](const std::string &what) {
    return Error(ErrorCode::kInvalidConfig, "network spec: " + what);
  };
  auto get_int = [&](const nlohmann::json &obj, const char *key) {
    if (!obj.contains(key) || !obj[key].is_number_integer())
      throw bad(std::string("'") + key + "' must be an integer");
    return obj[key].get<int>();
  };
  if (!doc.is_object()) throw bad("expected an object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "input_dim" && it.key() != "layers")
      throw bad("unknown key '" + it.key() + "'");
  NetworkSpec spec;
  if (doc.contains("input_dim")) spec.input_dim = get_int(doc, "input_dim");
  if (!doc.contains("layers") || !doc["layers"].is_array())
    throw bad("'layers' must be an array");
  for (const auto &item : doc["layers"]) {
    if (!item.is_object() || !item.contains("type") || !item["type"].is_string())
      throw bad("every layer needs a string 'type'");
    const std::string type = item["type"].get<std::string>();
    std::vector<std::string> allowed;
    if (type == "ftdnn") {
      allowed = {"type", "hidden", "bottleneck", "offsets"};
      if (!item.contains("offsets") || !item["offsets"].is_array())
        throw bad("'offsets' must be an array of integers");
      std::vector<int> offsets;
      for (const auto &o : item["offsets"]) {
        if (!o.is_number_integer()) throw bad("offsets must be integers");
        offsets.push_back(o.get<int>());
      }
      spec.layers.push_back(LayerSpec::Ftdnn(get_int(item, "hidden"),
                                             get_int(item, "bottleneck"),
                                             std::move(offsets)));
    } else if (type == "lstmp") {
      allowed = {"type", "cell", "recurrent", "nonrecurrent"};
      spec.layers.push_back(LayerSpec::Lstmp(get_int(item, "cell"),
                                             get_int(item, "recurrent"),
                                             get_int(item, "nonrecurrent")));
    } else if (type == "affine") {
      allowed = {"type", "output"};
      spec.layers.push_back(LayerSpec::Affine(get_int(item, "output")));
    } else {
      throw bad("unknown layer type '" + type + "'");
    }
    for (auto it = item.begin(); it != item.end(); ++it)
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
        throw bad("unknown key '" + it.key() + "' in " + type + " layer");
  }
  spec.Validate();
  return spec;
}

std::string NetworkSpec::ToJson() const {
  nlohmann::json layers_json = nlohmann::json::array();
  for (const auto &l : layers) {
    switch (l.kind) {
      case LayerKind::kFtdnn:
        layers_json.push_back({{"type", "ftdnn"},
                               {"hidden", l.hidden},
                               {"bottleneck", l.bottleneck},
                               {"offsets", l.offsets}});
        break;
      case LayerKind::kLstmp:
        layers_json.push_back({{"type", "lstmp"},
                               {"cell", l.cell},
                               {"recurrent", l.recurrent},
                               {"nonrecurrent", l.nonrecurrent}});
        break;
      case LayerKind::kAffine:
        layers_json.push_back({{"type", "affine"}, {"output", l.output}});
        break;
    }
  }
  return nlohmann::json{{"input_dim", input_dim}, {"layers", layers_json}}.dump();
}

NetworkSpec Preset(const std::string &name, int num_classes, int input_dim) {
  int num_ftdnn = 0, hidden = 0;
  bool lstm = false;
  if (name == "ftdnn15") {
    num_ftdnn = 15;
    hidden = 1536;
  } else if (name == "ftdnn18") {
    num_ftdnn = 18;
    hidden = 1536;
  } else if (name == "ftdnn18_lstm3") {
    num_ftdnn = 18;
    hidden = 1024;
    lstm = true;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown architecture '" + name + "'");
  }
  NetworkSpec spec;
  spec.input_dim = input_dim;
  for (int i = 1; i <= num_ftdnn; ++i) {
    spec.layers.push_back(LayerSpec::Ftdnn(
        hidden, 160, i == 1 ? std::vector<int>{-2, -1, 0, 1, 2}
                            : std::vector<int>{-1, 0, 1}));
    if (lstm && (i == 5 || i == 10 || i == 15))
      spec.layers.push_back(LayerSpec::Lstmp(1024, 512, 512));
  }
  spec.layers.push_back(LayerSpec::Affine(num_classes));
  spec.Validate();
  return spec;
}

NetworkSpec ScaleSpec(const NetworkSpec &spec, int divisor) {
  if (divisor < 1)
    throw Error(ErrorCode::kInvalidConfig, "scale divisor must be >= 1");
  NetworkSpec out = spec;
  int in = spec.input_dim;
  for (auto &l : out.layers) {
    switch (l.kind) {
      case LayerKind::kFtdnn: {
        l.hidden = ScaleDim(l.hidden, divisor);
        const int d = in * static_cast<int>(l.offsets.size());
        l.bottleneck = std::min({ScaleDim(l.bottleneck, divisor), l.hidden, d - 1});
        break;
      }
      case LayerKind::kLstmp:
        l.cell = ScaleDim(l.cell, divisor);
        l.recurrent = ScaleDim(l.recurrent, divisor);
        l.nonrecurrent = ScaleDim(l.nonrecurrent, divisor);
        break;
      case LayerKind::kAffine:
        break;
    }
    in = l.OutputDim();
  }
  out.Validate();
  return out;
}

int64_t ParamCount(const NetworkSpec &spec) {
  int64_t total = 0;
  const auto in = spec.LayerInputDims();
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec &l = spec.layers[i];
    const int64_t x = in[i];
    switch (l.kind) {
      case LayerKind::kFtdnn: {
        const int64_t d = x * static_cast<int64_t>(l.offsets.size());
        total += int64_t{l.bottleneck} * d + int64_t{l.hidden} * l.bottleneck +
                 l.hidden;
        break;
      }
      case LayerKind::kLstmp:
        total += 4 * int64_t{l.cell} * (x + l.recurrent + 1) +
                 int64_t{l.recurrent + l.nonrecurrent} * l.cell;
        break;
      case LayerKind::kAffine:
        total += int64_t{l.output} * x + l.output;
        break;
    }
  }
  return total;
}

NetworkParams NetworkParams::Zeros(const NetworkSpec &spec) {
  spec.Validate();
  NetworkParams params;
  const auto in = spec.LayerInputDims();
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec &l = spec.layers[i];
    switch (l.kind) {
      case LayerKind::kFtdnn: {
        FtdnnLayerParams p;
        const int d = in[i] * static_cast<int>(l.offsets.size());
        p.factor_n = Eigen::MatrixXd::Zero(l.bottleneck, d);
        p.factor_m = Eigen::MatrixXd::Zero(l.hidden, l.bottleneck);
        p.bias = Eigen::VectorXd::Zero(l.hidden);
        p.splice_offsets = l.offsets;
        params.layers.emplace_back(std::move(p));
        break;
      }
      case LayerKind::kLstmp: {
        LstmpLayerParams p;
        p.w_input = Eigen::MatrixXd::Zero(4 * l.cell, in[i]);
        p.w_recurrent = Eigen::MatrixXd::Zero(4 * l.cell, l.recurrent);
        p.bias = Eigen::VectorXd::Zero(4 * l.cell);
        p.recurrent_proj = Eigen::MatrixXd::Zero(l.recurrent, l.cell);
        p.nonrecurrent_proj = Eigen::MatrixXd::Zero(l.nonrecurrent, l.cell);
        params.layers.emplace_back(std::move(p));
        break;
      }
      case LayerKind::kAffine: {
        AffineLayerParams p;
        p.weight = Eigen::MatrixXd::Zero(l.output, in[i]);
        p.bias = Eigen::VectorXd::Zero(l.output);
        params.layers.emplace_back(std::move(p));
        break;
      }
    }
  }
  return params;
}

NetworkParams NetworkParams::Random(const NetworkSpec &spec, Rng *rng) {
  NetworkParams params = Zeros(spec);
  auto fan = [](const Eigen::MatrixXd &m) {
    return 1.0 / std::sqrt(static_cast<double>(m.cols()));
  };
  for (auto &layer : params.layers) {
    std::visit(Overloaded{[&](FtdnnLayerParams &p) {
                            FillGaussian(&p.factor_n, fan(p.factor_n), rng);
                            p.factor_n = OrthonormalRows(p.factor_n);
                            FillGaussian(&p.factor_m, fan(p.factor_m), rng);
                          },
                          [&](LstmpLayerParams &p) {
                            FillGaussian(&p.w_input, fan(p.w_input), rng);
                            FillGaussian(&p.w_recurrent, fan(p.w_recurrent), rng);
                            FillGaussian(&p.recurrent_proj, fan(p.recurrent_proj),
                                         rng);
                            FillGaussian(&p.nonrecurrent_proj,
                                         fan(p.nonrecurrent_proj), rng);
                          },
                          [&](AffineLayerParams &p) {
                            FillGaussian(&p.weight, fan(p.weight), rng);
                          }},
               layer);
  }
  return params;
}

std::vector<std::span<double>> NetworkParams::Arrays() {
  std::vector<std::span<double>> out;
  for (auto &layer : layers)
    std::visit(Overloaded{[&](FtdnnLayerParams &p) {
                            out.push_back(Span(p.factor_n));
                            out.push_back(Span(p.factor_m));
                            out.push_back(Span(p.bias));
                          },
                          [&](LstmpLayerParams &p) {
                            out.push_back(Span(p.w_input));
                            out.push_back(Span(p.w_recurrent));
                            out.push_back(Span(p.bias));
                            out.push_back(Span(p.recurrent_proj));
                            out.push_back(Span(p.nonrecurrent_proj));
                          },
                          [&](AffineLayerParams &p) {
                            out.push_back(Span(p.weight));
                            out.push_back(Span(p.bias));
                          }},
               layer);
  return out;
}

std::vector<std::span<const double>> NetworkParams::Arrays() const {
  auto mutable_arrays = const_cast<NetworkParams *>(this)->Arrays();
  return {mutable_arrays.begin(), mutable_arrays.end()};
}

int64_t NetworkParams::Count() const {
  int64_t n = 0;
  for (auto a : Arrays()) n += static_cast<int64_t>(a.size());
  return n;
}

double NetworkParams::SquaredNorm() const {
  return static_cast<double>(SquaredNormExtended(*this));
}

double NetworkParams::MaxOrthogonalityError() const {
  double worst = 0.0;
  for (const auto &layer : layers)
    if (const auto *p = std::get_if<FtdnnLayerParams>(&layer))
      worst = std::max(worst, OrthogonalityError(p->factor_n));
  return worst;
}

Sequence NetworkForward(const NetworkParams &params, const Sequence &features) {
  Sequence x = features;
  for (const auto &layer : params.layers) x = ForwardLayer(layer, x, nullptr);
  return x;
}

LossAndGradient NetworkBackward(const NetworkParams &params,
                                std::span<const Sequence> features,
                                std::span<const Labels> labels,
                                double l2_coefficient) {
  CheckBatch(features, labels);
  LossAndGradient out;
  out.gradient = ZerosLike(params);
  for (const auto &l : labels) out.frames += static_cast<int>(l.size());
  if (out.frames == 0)
    throw Error(ErrorCode::kShapeMismatch, "no labelled output frames");

  long double ce_sum = 0.0;
  std::vector<LayerCache> caches(params.layers.size());
  for (size_t u = 0; u < features.size(); ++u) {
    Sequence x = features[u];
    for (size_t i = 0; i < params.layers.size(); ++i)
      x = ForwardLayer(params.layers[i], x, &caches[i]);
    Sequence dy = SoftmaxCrossEntropy(x, labels[u], &ce_sum, &out.correct);
    dy /= out.frames;
    for (size_t i = params.layers.size(); i-- > 0;)
      dy = BackwardLayer(params.layers[i], caches[i], dy, &out.gradient.layers[i]);
  }
  out.cross_entropy = ce_sum / out.frames;
  out.loss = out.cross_entropy + 0.5 * l2_coefficient * params.SquaredNorm();
  if (l2_coefficient != 0.0) {
    auto g = out.gradient.Arrays();
    auto p = params.Arrays();
    for (size_t a = 0; a < g.size(); ++a)
      for (size_t k = 0; k < g[a].size(); ++k) g[a][k] += l2_coefficient * p[a][k];
  }
  return out;
}

double NetworkLoss(const NetworkParams &params,
                   std::span<const Sequence> features,
                   std::span<const Labels> labels, double l2_coefficient) {
  CheckBatch(features, labels);
  long double ce_sum = 0.0;
  int frames = 0, correct = 0;
  for (size_t u = 0; u < features.size(); ++u) {
    SoftmaxCrossEntropy(NetworkForward(params, features[u]), labels[u], &ce_sum,
                        &correct);
    frames += static_cast<int>(labels[u].size());
  }
  if (frames == 0)
    throw Error(ErrorCode::kShapeMismatch, "no labelled output frames");
  return static_cast<double>(ce_sum / frames) +
         0.5 * l2_coefficient * params.SquaredNorm();
}

namespace {

using MatrixLd = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Extended-precision copy of a layer. `arrays` follows the order and
// element layout of NetworkParams::Arrays(), vectors stored as n x 1.
struct LayerLd {
  LayerKind kind = LayerKind::kAffine;
  std::vector<MatrixLd> arrays;
  std::vector<int> offsets;
};

LayerLd ToExtended(const LayerParams &layer) {
  LayerLd out;
  std::visit(Overloaded{[&](const FtdnnLayerParams &p) {
                          out.kind = LayerKind::kFtdnn;
                          out.arrays = {p.factor_n.cast<long double>(),
                                        p.factor_m.cast<long double>(),
                                        p.bias.cast<long double>()};
                          out.offsets = p.splice_offsets;
                        },
                        [&](const LstmpLayerParams &p) {
                          out.kind = LayerKind::kLstmp;
                          out.arrays = {p.w_input.cast<long double>(),
                                        p.w_recurrent.cast<long double>(),
                                        p.bias.cast<long double>(),
                                        p.recurrent_proj.cast<long double>(),
                                        p.nonrecurrent_proj.cast<long double>()};
                        },
                        [&](const AffineLayerParams &p) {
                          out.kind = LayerKind::kAffine;
                          out.arrays = {p.weight.cast<long double>(),
                                        p.bias.cast<long double>()};
                        }},
             layer);
  return out;
}

long double SigmoidLd(long double v) { return 1.0L / (1.0L + std::exp(-v)); }

MatrixLd ForwardLd(const LayerLd &layer, const MatrixLd &x,
                   std::vector<bool> *relu_pattern) {
  const auto &w = layer.arrays;
  switch (layer.kind) {
    case LayerKind::kFtdnn: {
      const auto &o = layer.offsets;
      const int lo = o.front(), span = o.back() - o.front();
      if (x.rows() <= span)
        throw Error(ErrorCode::kSignalTooShort, "utterance shorter than context");
      const Eigen::Index frames = x.rows() - span, dim = x.cols();
      MatrixLd spliced(frames, dim * static_cast<Eigen::Index>(o.size()));
      for (size_t j = 0; j < o.size(); ++j)
        spliced.middleCols(j * dim, dim) = x.middleRows(o[j] - lo, frames);
      MatrixLd pre = (spliced * w[0].transpose()) * w[1].transpose();
      pre.rowwise() += w[2].col(0).transpose();
      if (relu_pattern)
        for (Eigen::Index k = 0; k < pre.size(); ++k)
          relu_pattern->push_back(pre.data()[k] > 0.0L);
      return pre.cwiseMax(0.0L);
    }
    case LayerKind::kLstmp: {
      const Eigen::Index n = w[3].cols(), r = w[3].rows(), q = w[4].rows();
      MatrixLd input_part = x * w[0].transpose();
      input_part.rowwise() += w[2].col(0).transpose();
      MatrixLd out(x.rows(), r + q);
      MatrixLd r_prev = MatrixLd::Zero(r, 1), c = MatrixLd::Zero(n, 1),
               m(n, 1);
      for (Eigen::Index t = 0; t < x.rows(); ++t) {
        const MatrixLd a = input_part.row(t).transpose() + w[1] * r_prev;
        for (Eigen::Index j = 0; j < n; ++j) {
          c(j) = SigmoidLd(a(n + j)) * c(j) + SigmoidLd(a(j)) * std::tanh(a(2 * n + j));
          m(j) = SigmoidLd(a(3 * n + j)) * std::tanh(c(j));
        }
        r_prev = w[3] * m;
        out.row(t).head(r) = r_prev.col(0).transpose();
        out.row(t).tail(q) = (w[4] * m).col(0).transpose();
      }
      return out;
    }
    case LayerKind::kAffine: {
      MatrixLd y = x * w[0].transpose();
      y.rowwise() += w[1].col(0).transpose();
      return y;
    }
  }
  return x;
}

// Mean cross-entropy of the network from layer `first` onward, given the
// inputs to that layer. With `relu_pattern`, the sign of every f-tdnn
// preactivation is recorded as well.
long double CrossEntropyFrom(const std::vector<LayerLd> &layers, size_t first,
                             const std::vector<MatrixLd> &inputs,
                             std::span<const Labels> labels,
                             std::vector<bool> *relu_pattern) {
  if (relu_pattern) relu_pattern->clear();
  long double ce_sum = 0.0;
  int64_t frames = 0;
  for (size_t u = 0; u < inputs.size(); ++u) {
    MatrixLd x = inputs[u];
    for (size_t i = first; i < layers.size(); ++i)
      x = ForwardLd(layers[i], x, relu_pattern);
    if (static_cast<Eigen::Index>(labels[u].size()) != x.rows())
      throw Error(ErrorCode::kShapeMismatch, "labels do not match output frames");
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      const long double peak = x.row(t).maxCoeff();
      const long double z = (x.row(t).array() - peak).exp().sum();
      ce_sum += std::log(z) + peak - x(t, labels[u][t]);
    }
    frames += x.rows();
  }
  return ce_sum / frames;
}

}  // namespace

// The objective is re-evaluated in extended precision, which keeps the
// central differences clear of rounding noise; perturbing a parameter of
// layer l reuses the cached inputs to layer l.
GradCheckResult GradCheck(const NetworkParams &params,
                          std::span<const Sequence> features,
                          std::span<const Labels> labels,
                          double l2_coefficient, double h, bool corrupt) {
  LossAndGradient analytic =
      NetworkBackward(params, features, labels, l2_coefficient);
  std::vector<double> grad;
  for (auto a : analytic.gradient.Arrays()) grad.insert(grad.end(), a.begin(), a.end());

  std::vector<LayerLd> layers;
  for (const auto &layer : params.layers) layers.push_back(ToExtended(layer));
  std::vector<std::vector<MatrixLd>> inputs(layers.size() + 1);
  for (const auto &f : features) inputs[0].push_back(f.cast<long double>());
  for (size_t i = 0; i < layers.size(); ++i)
    for (const auto &x : inputs[i]) inputs[i + 1].push_back(ForwardLd(layers[i], x, nullptr));

  const long double sq_base = SquaredNormExtended(params);
  const long double half_l2 = 0.5L * l2_coefficient;
  const long double step = h;
  std::vector<double> fd;
  std::vector<bool> kinked;
  std::vector<bool> base_pattern, pattern;
  for (size_t i = 0; i < layers.size(); ++i) {
    CrossEntropyFrom(layers, i, inputs[i], labels, &base_pattern);
    for (auto &array : layers[i].arrays) {
      for (Eigen::Index k = 0; k < array.size(); ++k) {
        long double &v = array.data()[k];
        const long double saved = v;
        v = saved + step;
        const long double plus =
            CrossEntropyFrom(layers, i, inputs[i], labels, &pattern) +
            half_l2 * (sq_base - saved * saved + v * v);
        bool crossed = pattern != base_pattern;
        v = saved - step;
        const long double minus =
            CrossEntropyFrom(layers, i, inputs[i], labels, &pattern) +
            half_l2 * (sq_base - saved * saved + v * v);
        crossed = crossed || pattern != base_pattern;
        v = saved;
        fd.push_back(static_cast<double>((plus - minus) / (2.0L * step)));
        kinked.push_back(crossed);
      }
    }
  }

  GradCheckResult result;
  result.num_params = static_cast<int64_t>(grad.size());
  if (corrupt) {
    int64_t target = -1;
    for (size_t i = 0; i < grad.size(); ++i)
      if (!kinked[i] && (target < 0 || std::abs(grad[i]) > std::abs(grad[target])))
        target = static_cast<int64_t>(i);
    if (target >= 0) grad[target] *= 1.1;
  }
  for (size_t i = 0; i < grad.size(); ++i) {
    if (kinked[i]) {
      ++result.kinked;
      continue;
    }
    const double rel = std::abs(grad[i] - fd[i]) /
                       std::max({std::abs(grad[i]), std::abs(fd[i]), 1e-12});
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = static_cast<int64_t>(i);
    }
  }
  return result;
}

GradCheckFixture MakeGradCheckFixture(const NetworkSpec &spec, uint64_t seed,
                                      int output_frames) {
  if (output_frames < 1)
    throw Error(ErrorCode::kInvalidConfig, "output_frames must be positive");
  Rng rng(seed);
  GradCheckFixture fx;
  fx.params = NetworkParams::Random(spec, &rng);
  for (auto a : fx.params.Arrays())
    for (double &v : a) v += 0.1 * rng.Gauss();
  Sequence x(spec.TotalContext() + output_frames, spec.input_dim);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = rng.Gauss();
  Labels y(output_frames);
  for (int &label : y) label = static_cast<int>(rng.Index(spec.OutputDim()));
  fx.features.push_back(std::move(x));
  fx.labels.push_back(std::move(y));
  return fx;
}

}  // namespace farfield
