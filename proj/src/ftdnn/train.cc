// src/ftdnn/train.cc

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

#include "farfield/ftdnn/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "farfield/base/error.h"
#include "farfield/base/random.h"
#include "json.hpp"

namespace farfield {

namespace {

constexpr double kEpochEndOrthTarget = 1e-8;
constexpr int kEpochEndMaxSteps = 30;

Labels AlignLabels(const NetworkSpec &spec, const Sequence &features,
                   const Labels &labels) {
  const Eigen::Index out_frames = features.rows() - spec.TotalContext();
  if (static_cast<Eigen::Index>(labels.size()) == out_frames) return labels;
  if (static_cast<Eigen::Index>(labels.size()) == features.rows()) {
    const auto first = labels.begin() + spec.LeftContext();
    return Labels(first, first + out_frames);
  }
  throw Error(ErrorCode::kShapeMismatch,
              std::to_string(labels.size()) + " labels for an utterance of " +
                  std::to_string(features.rows()) + " frames (" +
                  std::to_string(out_frames) + " output frames)");
}

void ApplyConstraint(NetworkParams *params) {
  for (auto &layer : params->layers)
    if (auto *p = std::get_if<FtdnnLayerParams>(&layer))
      p->factor_n = SemiOrthogonalStep(p->factor_n);
}

void ConvergeConstraint(NetworkParams *params) {
  for (auto &layer : params->layers) {
    auto *p = std::get_if<FtdnnLayerParams>(&layer);
    if (!p) continue;
    for (int i = 0; i < kEpochEndMaxSteps &&
                    OrthogonalityError(p->factor_n) > kEpochEndOrthTarget;
         ++i)
      p->factor_n = SemiOrthogonalStep(p->factor_n);
  }
}

std::vector<size_t> Permutation(size_t n, Rng *rng) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng->Index(i)]);
  return order;
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (in.bad()) throw Error(ErrorCode::kIoError, "read error on " + path);
  return lines;
}

bool Blank(const std::string &line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write error on " + path);
}

}  // namespace

Sequence FeatureNormalization::Apply(const Sequence &features) const {
  if (empty()) return features;
  if (features.cols() != mean.size())
    throw Error(ErrorCode::kShapeMismatch,
                "feature dim " + std::to_string(features.cols()) +
                    ", normalization has " + std::to_string(mean.size()));
  return ((features.rowwise() - mean.transpose()).array().rowwise() *
          scale.transpose().array())
      .matrix();
}

FeatureNormalization FeatureNormalization::Estimate(
    const std::vector<Sequence> &features) {
  FeatureNormalization norm;
  if (features.empty()) return norm;
  const Eigen::Index dim = features.front().cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim), sq = Eigen::VectorXd::Zero(dim);
  double count = 0.0;
  for (const auto &f : features) {
    if (f.cols() != dim)
      throw Error(ErrorCode::kShapeMismatch, "utterances differ in feature dim");
    sum += f.colwise().sum().transpose();
    sq += f.array().square().colwise().sum().matrix().transpose();
    count += static_cast<double>(f.rows());
  }
  norm.mean = sum / count;
  norm.scale.resize(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double var = sq(j) / count - norm.mean(j) * norm.mean(j);
    norm.scale(j) = var > 0.0 ? 1.0 / std::sqrt(var) : (std::isnan(var) ? var : 1.0);
  }
  return norm;
}

void TrainConfig::Validate() const {
  auto bad = [](const std::string &what) {
    throw Error(ErrorCode::kInvalidConfig, "training config: " + what);
  };
  if (!(lr_initial > 0.0) || !(lr_final > 0.0))
    bad("learning rates must be positive");
  if (!(l2_coefficient >= 0.0)) bad("l2_coefficient must be >= 0");
  if (epochs < 1) bad("epochs must be >= 1");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (constraint_interval < 1) bad("constraint_interval must be >= 1");
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0))
    bad("heldout_fraction must lie in [0, 1)");
}

double TrainConfig::LearningRate(int epoch) const {
  if (epochs == 1) return lr_initial;
  const double frac = static_cast<double>(epoch) / (epochs - 1);
  return lr_initial * std::pow(lr_final / lr_initial, frac);
}

std::string EpochLogJson(const EpochLog &entry) {
  return nlohmann::json{{"epoch", entry.epoch},
                        {"loss", entry.loss},
                        {"frame_acc", entry.frame_acc},
                        {"max_orth_err", entry.max_orth_err}}
      .dump();
}

double FrameAccuracy(const NetworkParams &params,
                     const FeatureNormalization &normalization,
                     const NetworkSpec &spec,
                     const std::vector<Sequence> &features,
                     const std::vector<Labels> &labels) {
  if (features.size() != labels.size())
    throw Error(ErrorCode::kShapeMismatch, "feature and label counts differ");
  int64_t correct = 0, total = 0;
  for (size_t u = 0; u < features.size(); ++u) {
    const Labels aligned = AlignLabels(spec, features[u], labels[u]);
    const Sequence logits = NetworkForward(params, normalization.Apply(features[u]));
    for (Eigen::Index t = 0; t < logits.rows(); ++t) {
      Eigen::Index best;
      logits.row(t).maxCoeff(&best);
      correct += best == aligned[t];
    }
    total += logits.rows();
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

TrainResult TrainToy(const NetworkSpec &spec,
                     const std::vector<Sequence> &features,
                     const std::vector<Labels> &labels,
                     const TrainConfig &config,
                     const std::function<void(const EpochLog &)> &on_epoch) {
  config.Validate();
  spec.Validate();
  if (spec.OutputDim() < 2)
    throw Error(ErrorCode::kInvalidConfig, "training needs at least 2 classes");
  if (features.empty() || features.size() != labels.size())
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(features.size()) + " feature utterances, " +
                    std::to_string(labels.size()) + " label utterances");
  for (const auto &f : features)
    if (f.cols() != spec.input_dim)
      throw Error(ErrorCode::kShapeMismatch,
                  "feature dim " + std::to_string(f.cols()) + ", network expects " +
                      std::to_string(spec.input_dim));

  Rng rng(config.seed);
  const size_t num_utts = features.size();
  size_t num_heldout = static_cast<size_t>(std::lround(config.heldout_fraction * num_utts));
  if (config.heldout_fraction > 0.0 && num_utts > 1)
    num_heldout = std::clamp<size_t>(num_heldout, 1, num_utts - 1);
  else
    num_heldout = 0;
  const std::vector<size_t> split = Permutation(num_utts, &rng);

  std::vector<Sequence> train_x, held_x, train_raw;
  std::vector<Labels> train_y, held_y;
  for (size_t i = 0; i < num_utts; ++i) {
    const size_t u = split[i];
    Labels aligned = AlignLabels(spec, features[u], labels[u]);
    for (int y : aligned)
      if (y < 0 || y >= spec.OutputDim())
        throw Error(ErrorCode::kInvalidConfig,
                    "label " + std::to_string(y) + " outside [0, " +
                        std::to_string(spec.OutputDim()) + ")");
    if (i < num_utts - num_heldout) {
      train_raw.push_back(features[u]);
      train_y.push_back(std::move(aligned));
    } else {
      held_x.push_back(features[u]);
      held_y.push_back(std::move(aligned));
    }
  }

  TrainResult result;
  result.normalization = FeatureNormalization::Estimate(train_raw);
  for (const auto &f : train_raw) train_x.push_back(result.normalization.Apply(f));
  for (auto &f : held_x) f = result.normalization.Apply(f);
  if (held_x.empty()) {
    held_x = train_x;
    held_y = train_y;
  }

  NetworkParams &params = result.params;
  params = NetworkParams::Random(spec, &rng);
  auto check_finite = [](double loss, int epoch) {
    if (!std::isfinite(loss))
      throw Error(ErrorCode::kTrainingDiverged,
                  "loss became non-finite in epoch " + std::to_string(epoch));
  };

  int64_t updates = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.LearningRate(epoch);
    const double shrink = 1.0 / (1.0 + lr * config.l2_coefficient);
    const std::vector<size_t> order = Permutation(train_x.size(), &rng);
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<Sequence> bx;
      std::vector<Labels> by;
      for (size_t i = start; i < stop; ++i) {
        bx.push_back(train_x[order[i]]);
        by.push_back(train_y[order[i]]);
      }
      const LossAndGradient lg = NetworkBackward(params, bx, by, 0.0);
      check_finite(lg.loss, epoch);
      auto p = params.Arrays();
      const auto g = lg.gradient.Arrays();
      for (size_t a = 0; a < p.size(); ++a)
        for (size_t k = 0; k < p[a].size(); ++k)
          p[a][k] = (p[a][k] - lr * g[a][k]) * shrink;
      if (++updates % config.constraint_interval == 0) ApplyConstraint(&params);
    }
    ConvergeConstraint(&params);

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = NetworkLoss(params, train_x, train_y, config.l2_coefficient);
    check_finite(entry.loss, epoch);
    check_finite(NetworkLoss(params, held_x, held_y, 0.0), epoch);
    entry.frame_acc = FrameAccuracy(params, {}, spec, held_x, held_y);
    entry.max_orth_err = params.MaxOrthogonalityError();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  result.heldout_accuracy = result.log.back().frame_acc;
  return result;
}

ToyTask MakeSeparableToyTask(int num_utterances, int frames, int dim,
                             double separation, int run, uint64_t seed) {
  if (num_utterances < 1 || frames < 1 || dim < 1 || run < 1)
    throw Error(ErrorCode::kInvalidConfig, "toy task sizes must be positive");
  Rng rng(seed);
  ToyTask task;
  for (int u = 0; u < num_utterances; ++u) {
    Sequence x(frames, dim);
    Labels y(frames);
    int cls = static_cast<int>(rng.Index(2));
    for (int t = 0; t < frames; ++t) {
      if (t > 0 && t % run == 0) cls = 1 - cls;
      y[t] = cls;
      const double mu = (cls ? 0.5 : -0.5) * separation;
      for (int j = 0; j < dim; ++j) x(t, j) = mu + rng.Gauss();
    }
    task.features.push_back(std::move(x));
    task.labels.push_back(std::move(y));
  }
  return task;
}

std::vector<Sequence> ReadFeatureText(const std::string &path) {
  std::vector<Sequence> out;
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  auto flush = [&]() {
    if (rows.empty()) return;
    Sequence s(rows.size(), rows.front().size());
    for (size_t t = 0; t < rows.size(); ++t)
      for (size_t j = 0; j < rows[t].size(); ++j) s(t, j) = rows[t][j];
    out.push_back(std::move(s));
    rows.clear();
  };
  for (const std::string &line : ReadLines(path)) {
    ++lineno;
    if (Blank(line)) {
      flush();
      continue;
    }
    std::vector<double> row;
    const char *p = line.c_str();
    while (true) {
      while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
      if (!*p) break;
      char *end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p)
        throw Error(ErrorCode::kFormatError,
                    path + ":" + std::to_string(lineno) + ": not a number");
      row.push_back(v);
      p = end;
    }
    const size_t dim = !rows.empty() ? rows.front().size()
                       : !out.empty() ? static_cast<size_t>(out.front().cols())
                                      : row.size();
    if (row.size() != dim)
      throw Error(ErrorCode::kFormatError,
                  path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(dim) + " values, got " +
                      std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  flush();
  return out;
}

std::vector<Labels> ReadLabelText(const std::string &path) {
  std::vector<Labels> out;
  Labels current;
  int lineno = 0;
  for (const std::string &line : ReadLines(path)) {
    ++lineno;
    if (Blank(line)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    char *end = nullptr;
    const long v = std::strtol(line.c_str(), &end, 10);
    if (end == line.c_str() || !Blank(end) || v < 0 || v > (1L << 30))
      throw Error(ErrorCode::kFormatError,
                  path + ":" + std::to_string(lineno) + ": not a class index");
    current.push_back(static_cast<int>(v));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

void WriteFeatureText(const std::string &path,
                      const std::vector<Sequence> &features) {
  std::string text;
  char buf[32];
  for (size_t u = 0; u < features.size(); ++u) {
    if (u) text += '\n';
    for (Eigen::Index t = 0; t < features[u].rows(); ++t) {
      for (Eigen::Index j = 0; j < features[u].cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", features[u](t, j));
        if (j) text += ' ';
        text += buf;
      }
      text += '\n';
    }
  }
  WriteText(path, text);
}

void WriteLabelText(const std::string &path, const std::vector<Labels> &labels) {
  std::string text;
  for (size_t u = 0; u < labels.size(); ++u) {
    if (u) text += '\n';
    for (int y : labels[u]) text += std::to_string(y) + '\n';
  }
  WriteText(path, text);
}

}  // namespace farfield
