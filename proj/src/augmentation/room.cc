// src/augmentation/room.cc

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

#include "farfield/augmentation/room.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "farfield/base/error.h"
#include "farfield/base/random.h"
#include "json.hpp"

namespace farfield {

namespace {

constexpr double kWallMargin = 0.1;
constexpr double kMinSide = 2.0, kMaxSide = 12.0;
constexpr uint64_t kDefaultRoomSeed = 20200501;
// Band of Sabine absorption in which an order-17 image-source decay tracks
// the Sabine prediction; outside it truncation (low absorption) or specular
// non-diffuseness (high absorption) dominate.
constexpr double kMinDefaultAbsorption = 0.35, kMaxDefaultAbsorption = 0.5;

bool Inside(const RoomSpec &room, const Eigen::Vector3d &p) {
  for (int i = 0; i < 3; ++i)
    if (!(p[i] >= kWallMargin && p[i] <= room.dimensions_m[i] - kWallMargin))
      return false;
  return true;
}

std::string Format(const Eigen::Vector3d &p) {
  return "(" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ", " +
         std::to_string(p[2]) + ")";
}

Eigen::Vector3d ParseVec3(const nlohmann::json &j, const char *field) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() ||
      !j[1].is_number() || !j[2].is_number())
    throw Error(ErrorCode::kInvalidConfig,
                std::string("room field '") + field +
                    "' must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  if (x == std::floor(x)) return 0.0;
  return std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
}

}  // namespace

void RoomSpec::Validate() const {
  for (int i = 0; i < 3; ++i)
    if (!(dimensions_m[i] >= kMinSide && dimensions_m[i] <= kMaxSide))
      throw Error(ErrorCode::kGeometryError,
                  "room dimensions " + Format(dimensions_m) +
                      " outside [2, 12] m");
  if (!(absorption > 0.0 && absorption <= 1.0))
    throw Error(ErrorCode::kInvalidConfig, "absorption must be in (0, 1]");
  if (max_order < 0)
    throw Error(ErrorCode::kInvalidConfig, "max_order must be >= 0");
  if (sample_rate_hz <= 0 || !(speed_of_sound_mps > 0.0))
    throw Error(ErrorCode::kInvalidConfig,
                "sample rate and speed of sound must be positive");
  if (mic_positions_m.empty())
    throw Error(ErrorCode::kGeometryError, "room has no microphones");
  if (!Inside(*this, source_position_m))
    throw Error(ErrorCode::kGeometryError,
                "source " + Format(source_position_m) + " not inside room");
  for (const auto &m : mic_positions_m)
    if (!Inside(*this, m))
      throw Error(ErrorCode::kGeometryError,
                  "mic " + Format(m) + " not inside room");
}

double RoomSpec::Volume() const {
  return dimensions_m[0] * dimensions_m[1] * dimensions_m[2];
}

double RoomSpec::SurfaceArea() const {
  const auto &d = dimensions_m;
  return 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
}

RoomSpec RoomSpec::FromJson(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("room spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw Error(ErrorCode::kInvalidConfig, "room spec must be a JSON object");
  RoomSpec room;
  room.mic_positions_m.clear();
  bool have_dims = false, have_source = false, have_mics = false;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string &key = it.key();
    const auto &v = it.value();
    auto number = [&]() {
      if (!v.is_number())
        throw Error(ErrorCode::kInvalidConfig,
                    "room field '" + key + "' must be a number");
      return v.get<double>();
    };
    if (key == "dimensions_m") {
      room.dimensions_m = ParseVec3(v, "dimensions_m");
      have_dims = true;
    } else if (key == "absorption") {
      room.absorption = number();
    } else if (key == "source_position_m") {
      room.source_position_m = ParseVec3(v, "source_position_m");
      have_source = true;
    } else if (key == "mic_positions_m") {
      if (!v.is_array())
        throw Error(ErrorCode::kInvalidConfig,
                    "mic_positions_m must be an array");
      for (const auto &m : v)
        room.mic_positions_m.push_back(ParseVec3(m, "mic_positions_m"));
      have_mics = true;
    } else if (key == "max_order") {
      if (!v.is_number_integer())
        throw Error(ErrorCode::kInvalidConfig, "max_order must be an integer");
      room.max_order = v.get<int>();
    } else if (key == "sample_rate_hz") {
      if (!v.is_number_integer())
        throw Error(ErrorCode::kInvalidConfig,
                    "sample_rate_hz must be an integer");
      room.sample_rate_hz = v.get<int>();
    } else if (key == "speed_of_sound_mps") {
      room.speed_of_sound_mps = number();
    } else {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown room spec key '" + key + "'");
    }
  }
  if (!have_dims || !have_source || !have_mics)
    throw Error(ErrorCode::kInvalidConfig,
                "room spec needs dimensions_m, source_position_m and "
                "mic_positions_m");
  return room;
}

std::string RoomSpec::ToJson() const {
  auto vec = [](const Eigen::Vector3d &p) {
    return nlohmann::json::array({p[0], p[1], p[2]});
  };
  nlohmann::json mics = nlohmann::json::array();
  for (const auto &m : mic_positions_m) mics.push_back(vec(m));
  nlohmann::json doc = {{"dimensions_m", vec(dimensions_m)},
                        {"absorption", absorption},
                        {"source_position_m", vec(source_position_m)},
                        {"mic_positions_m", mics},
                        {"max_order", max_order},
                        {"sample_rate_hz", sample_rate_hz},
                        {"speed_of_sound_mps", speed_of_sound_mps}};
  return doc.dump(2);
}

double SabineT60(const RoomSpec &room) {
  const double k = 24.0 * std::numbers::ln10 / room.speed_of_sound_mps;
  return k * room.Volume() / (room.SurfaceArea() * room.absorption);
}

double SabineAbsorption(const Eigen::Vector3d &d, double t60_s,
                        double speed_of_sound_mps) {
  const double k = 24.0 * std::numbers::ln10 / speed_of_sound_mps;
  const double volume = d[0] * d[1] * d[2];
  const double surface = 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
  return k * volume / (surface * t60_s);
}

std::vector<Eigen::Vector3d> LinearArray(const Eigen::Vector3d &center,
                                         int num_mics, double spacing_m) {
  std::vector<Eigen::Vector3d> mics;
  for (int i = 0; i < num_mics; ++i) {
    double offset = (i - 0.5 * (num_mics - 1)) * spacing_m;
    mics.push_back(center + Eigen::Vector3d(offset, 0.0, 0.0));
  }
  return mics;
}

std::vector<double> RoomImpulseResponse::Channel(int mic) const {
  std::vector<double> out(static_cast<size_t>(Length()));
  for (Eigen::Index i = 0; i < Length(); ++i) out[i] = taps(mic, i);
  return out;
}

RoomImpulseResponse RoomImpulseResponse::Identity(int num_mics,
                                                  int sample_rate_hz) {
  RoomImpulseResponse rir;
  rir.taps = Eigen::MatrixXd::Zero(num_mics, 1);
  rir.taps.col(0).setOnes();
  rir.sample_rate_hz = sample_rate_hz;
  rir.direct_path_index.assign(num_mics, 0);
  return rir;
}

RoomImpulseResponse SimulateRir(const RoomSpec &room) {
  room.Validate();
  const double fs = room.sample_rate_hz;
  const double c = room.speed_of_sound_mps;
  const double beta = std::sqrt(1.0 - room.absorption);
  const int half_width = static_cast<int>(std::lround(0.004 * fs));
  const auto &L = room.dimensions_m;
  const auto &s = room.source_position_m;
  const int num_mics = static_cast<int>(room.mic_positions_m.size());
  const int reach = room.max_order / 2 + 1;

  struct Image {
    double delay;  // samples
    double gain;
  };
  std::vector<std::vector<Image>> images(num_mics);
  double max_delay = 0.0;
  for (int mic = 0; mic < num_mics; ++mic) {
    const Eigen::Vector3d &r = room.mic_positions_m[mic];
    for (int mx = -reach; mx <= reach; ++mx)
      for (int my = -reach; my <= reach; ++my)
        for (int mz = -reach; mz <= reach; ++mz)
          for (int q = 0; q <= 1; ++q)
            for (int j = 0; j <= 1; ++j)
              for (int k = 0; k <= 1; ++k) {
                const int order = std::abs(mx - q) + std::abs(mx) +
                                  std::abs(my - j) + std::abs(my) +
                                  std::abs(mz - k) + std::abs(mz);
                if (order > room.max_order) continue;
                Eigen::Vector3d img((1 - 2 * q) * s[0] + 2 * mx * L[0],
                                    (1 - 2 * j) * s[1] + 2 * my * L[1],
                                    (1 - 2 * k) * s[2] + 2 * mz * L[2]);
                const double dist = (img - r).norm();
                const double delay = dist * fs / c;
                images[mic].push_back(
                    {delay, std::pow(beta, order) /
                                (4.0 * std::numbers::pi * dist)});
                max_delay = std::max(max_delay, delay);
              }
  }

  const auto length =
      static_cast<Eigen::Index>(std::ceil(max_delay)) + half_width + 1;
  RoomImpulseResponse rir;
  rir.sample_rate_hz = room.sample_rate_hz;
  rir.taps = Eigen::MatrixXd::Zero(num_mics, length);
  rir.direct_path_index.resize(num_mics);
  for (int mic = 0; mic < num_mics; ++mic) {
    const double direct =
        (room.mic_positions_m[mic] - s).norm() * fs / c;
    rir.direct_path_index[mic] = static_cast<int>(std::lround(direct));
    for (const Image &im : images[mic]) {
      if (im.gain == 0.0) continue;
      const auto center = static_cast<Eigen::Index>(std::lround(im.delay));
      for (Eigen::Index n = std::max<Eigen::Index>(0, center - half_width);
           n <= center + half_width && n < length; ++n) {
        const double x = static_cast<double>(n) - im.delay;
        if (std::abs(x) >= half_width) continue;
        const double window =
            0.5 * (1.0 + std::cos(std::numbers::pi * x / half_width));
        rir.taps(mic, n) += im.gain * window * Sinc(x);
      }
    }
  }
  return rir;
}

double SchroederT60(std::span<const double> rir, int sample_rate_hz,
                    Eigen::Index start) {
  const auto n = static_cast<Eigen::Index>(rir.size());
  if (start >= n) return 0.0;
  std::vector<double> edc(static_cast<size_t>(n - start));
  double acc = 0.0;
  for (Eigen::Index i = n - 1; i >= start; --i) {
    acc += rir[i] * rir[i];
    edc[i - start] = acc;
  }
  if (acc <= 0.0) return 0.0;
  const double total = acc;
  auto fit = [&](double hi_db, double lo_db) -> double {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (size_t i = 0; i < edc.size(); ++i) {
      if (edc[i] <= 0.0) break;
      const double db = 10.0 * std::log10(edc[i] / total);
      if (db > hi_db) continue;
      if (db < lo_db) break;
      const double t = static_cast<double>(i) / sample_rate_hz;
      sx += t, sy += db, sxx += t * t, sxy += t * db;
      ++count;
    }
    if (count < 2) return 0.0;
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return slope < 0.0 ? -60.0 / slope : 0.0;
  };
  const double floor_db = 10.0 * std::log10(edc.back() / total);
  if (floor_db <= -25.0) return fit(-5.0, -25.0);
  return fit(-5.0, -15.0);
}

Eigen::Index OnsetIndex(std::span<const double> rir) {
  double peak = 0.0;
  for (double v : rir) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return -1;
  for (size_t i = 0; i < rir.size(); ++i)
    if (std::abs(rir[i]) >= 0.5 * peak) return static_cast<Eigen::Index>(i);
  return -1;
}

std::vector<RoomSpec> DefaultRooms() {
  Rng rng(kDefaultRoomSeed);
  std::vector<RoomSpec> rooms;
  for (int i = 0; i < 5; ++i) {
    const bool small = i < 2;
    const double lo = small ? 2.0 : 6.0, hi = small ? 6.0 : 12.0;
    RoomSpec room;
    for (;;) {
      for (int d = 0; d < 3; ++d) room.dimensions_m[d] = rng.Uniform(lo, hi);
      const double t60 = rng.Uniform(0.2, 0.6);
      room.absorption = SabineAbsorption(room.dimensions_m, t60);
      if (room.absorption >= kMinDefaultAbsorption &&
          room.absorption <= kMaxDefaultAbsorption)
        break;
    }
    const auto &d = room.dimensions_m;
    room.source_position_m = {0.3 * d[0], 0.65 * d[1], 1.5};
    room.mic_positions_m =
        LinearArray(Eigen::Vector3d(0.6 * d[0], 0.4 * d[1], 1.2));
    rooms.push_back(std::move(room));
  }
  return rooms;
}

}  // namespace farfield
