// src/enhancement/gss.cc

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

#include "farfield/enhancement/gss.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "farfield/base/error.h"

namespace farfield {

namespace {

constexpr double kShapeRegularization = 1e-10;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Hermitian-symmetrize, load and rescale to trace C.
void NormalizeShape(Eigen::MatrixXcd *b) {
  const auto c = b->rows();
  Eigen::MatrixXcd h = 0.5 * (*b + b->adjoint());
  h.diagonal().array() += kShapeRegularization;
  const double trace = h.trace().real();
  *b = h * (static_cast<double>(c) / trace);
}

struct BinResult {
  Eigen::MatrixXd posterior;  // T x K
  Eigen::VectorXd weights;
  std::vector<Eigen::MatrixXcd> shapes;
  std::vector<double> log_likelihood;
};

// EM for one frequency bin. `active` is T x K (noise column all true).
BinResult RunBin(const ComplexSpectrogram &spec, int f,
                 const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> &active,
                 int noise_class, int iterations) {
  const int num_frames = spec.NumFrames();
  const int c = spec.NumChannels();
  const int k_total = static_cast<int>(active.cols());
  const double log_norm = std::lgamma(static_cast<double>(c)) - std::log(2.0) -
                          c * std::log(std::numbers::pi);

  // Unit-normalized observations; zero vectors are left out of the model.
  std::vector<int> frames;
  frames.reserve(num_frames);
  for (int t = 0; t < num_frames; ++t)
    if (spec.Vector(t, f).norm() > 0.0) frames.push_back(t);
  const int n = static_cast<int>(frames.size());
  Eigen::MatrixXcd z(c, n);
  for (int i = 0; i < n; ++i) {
    const auto y = spec.Vector(frames[i], f);
    z.col(i) = y / y.norm();
  }

  BinResult out;
  out.posterior = Eigen::MatrixXd::Zero(num_frames, k_total);
  for (int t = 0; t < num_frames; ++t) {
    const double count = active.row(t).count();
    for (int k = 0; k < k_total; ++k)
      if (active(t, k)) out.posterior(t, k) = 1.0 / count;
  }
  out.weights = Eigen::VectorXd::Constant(k_total, 1.0 / k_total);
  out.shapes.assign(k_total, Eigen::MatrixXcd::Identity(c, c));
  out.log_likelihood.assign(iterations, 0.0);
  if (n == 0) return out;

  Eigen::MatrixXd gamma(n, k_total);
  for (int i = 0; i < n; ++i) gamma.row(i) = out.posterior.row(frames[i]);
  // Quadratic forms zᴴ B⁻¹ z under the previous shapes (identity at start).
  Eigen::MatrixXd quad = Eigen::MatrixXd::Ones(n, k_total);
  Eigen::MatrixXd log_p(n, k_total);

  for (int it = 0; it < iterations; ++it) {
    // M-step.
    for (int k = 0; k < k_total; ++k) {
      const double mass = gamma.col(k).sum();
      out.weights(k) = mass / n;
      if (it == 0 && k == noise_class) continue;  // noise starts at identity
      if (mass <= 0.0) continue;
      const Eigen::VectorXd scale = gamma.col(k).cwiseQuotient(quad.col(k));
      Eigen::MatrixXcd acc = (z * scale.asDiagonal()) * z.adjoint();
      out.shapes[k] = acc * (static_cast<double>(c) / mass);
      NormalizeShape(&out.shapes[k]);
    }
    // E-step.
    for (int k = 0; k < k_total; ++k) {
      Eigen::LLT<Eigen::MatrixXcd> llt(out.shapes[k]);
      const Eigen::MatrixXcd l = llt.matrixL();
      double log_det = 0.0;
      for (int i = 0; i < c; ++i) log_det += 2.0 * std::log(l(i, i).real());
      const Eigen::MatrixXcd w = llt.matrixL().solve(z);
      quad.col(k) = w.colwise().squaredNorm().transpose();
      const double log_pi = std::log(out.weights(k));
      for (int i = 0; i < n; ++i)
        log_p(i, k) = active(frames[i], k)
                          ? log_pi + log_norm - log_det -
                                c * std::log(quad(i, k))
                          : kNegInf;
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double peak = log_p.row(i).maxCoeff();
      if (peak == kNegInf) {
        gamma.row(i) = out.posterior.row(frames[i]);
        continue;
      }
      double sum = 0.0;
      for (int k = 0; k < k_total; ++k) {
        gamma(i, k) = log_p(i, k) == kNegInf ? 0.0 : std::exp(log_p(i, k) - peak);
        sum += gamma(i, k);
      }
      gamma.row(i) /= sum;
      total += peak + std::log(sum);
    }
    out.log_likelihood[it] = total;
  }
  for (int i = 0; i < n; ++i) out.posterior.row(frames[i]) = gamma.row(i);
  return out;
}

}  // namespace

TimeFrequencyMask::TimeFrequencyMask(std::vector<std::string> source_ids,
                                     int num_frames, int num_bins)
    : ids_(std::move(source_ids)),
      num_frames_(num_frames),
      num_bins_(num_bins),
      values_(ids_.size(), Eigen::MatrixXd::Zero(num_frames, num_bins)) {}

int TimeFrequencyMask::IndexOf(const std::string &id) const {
  for (size_t k = 0; k < ids_.size(); ++k)
    if (ids_[k] == id) return static_cast<int>(k);
  return -1;
}

double FrameCenterSeconds(const StftConfig &config, int sample_rate_hz,
                          int t) {
  return (static_cast<double>(t) * config.hop() +
          0.5 * config.window_length()) /
         sample_rate_hz;
}

GssResult EstimateMasksGss(const ComplexSpectrogram &spec,
                           const ActivityAnnotation &annotation,
                           const GssConfig &config) {
  if (spec.NumChannels() < 2)
    throw Error(ErrorCode::kNeedsMultichannel,
                "guided source separation needs at least 2 channels");
  if (config.iterations < 1)
    throw Error(ErrorCode::kInvalidConfig, "GSS needs at least one iteration");
  if (!(config.context_s >= 0.0))
    throw Error(ErrorCode::kInvalidConfig, "GSS context must be >= 0");

  std::vector<std::string> ids = annotation.Speakers();
  for (const auto &id : ids)
    if (id == TimeFrequencyMask::kNoiseLabel)
      throw Error(ErrorCode::kInvalidConfig,
                  std::string("speaker id '") + TimeFrequencyMask::kNoiseLabel +
                      "' is reserved");
  const int num_speakers = static_cast<int>(ids.size());
  const int num_frames = spec.NumFrames();
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active(num_frames,
                                                            num_speakers + 1);
  for (int t = 0; t < num_frames; ++t) {
    const double time = FrameCenterSeconds(spec.config(), spec.SampleRate(), t);
    for (int k = 0; k < num_speakers; ++k)
      active(t, k) = annotation.IsActive(ids[k], time, config.context_s);
    active(t, num_speakers) = true;
  }
  for (int k = 0; k < num_speakers; ++k)
    if (!active.col(k).any())
      throw Error(ErrorCode::kEmptyActivity,
                  "speaker '" + ids[k] + "' is not active in any frame");

  ids.push_back(TimeFrequencyMask::kNoiseLabel);
  GssResult result{TimeFrequencyMask(ids, num_frames, spec.NumBins()), {}};
  result.state.log_likelihood.assign(config.iterations, 0.0);
  for (int f = 0; f < spec.NumBins(); ++f) {
    BinResult bin = RunBin(spec, f, active, num_speakers, config.iterations);
    for (int k = 0; k <= num_speakers; ++k)
      result.masks.Source(k).col(f) = bin.posterior.col(k);
    for (int it = 0; it < config.iterations; ++it)
      result.state.log_likelihood[it] += bin.log_likelihood[it];
    result.state.weights.push_back(std::move(bin.weights));
    result.state.shapes.push_back(std::move(bin.shapes));
  }
  return result;
}

}  // namespace farfield
