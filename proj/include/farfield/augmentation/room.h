// include/farfield/augmentation/room.h

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

#ifndef FARFIELD_AUGMENTATION_ROOM_H_
#define FARFIELD_AUGMENTATION_ROOM_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace farfield {

// Parametric shoebox room with one source and a set of omnidirectional mics.
// `absorption` is the uniform energy absorption coefficient of every
// surface, i.e. the quantity the Sabine formula is written in.
struct RoomSpec {
  Eigen::Vector3d dimensions_m{5.0, 4.0, 3.0};
  double absorption = 0.3;
  Eigen::Vector3d source_position_m{1.0, 1.0, 1.5};
  std::vector<Eigen::Vector3d> mic_positions_m;
  int max_order = 17;
  int sample_rate_hz = 16000;
  double speed_of_sound_mps = 343.0;

  // GeometryError for dimensions outside [2, 12] m or a source/mic closer
  // than 0.1 m to a wall; InvalidConfig for the scalar fields.
  void Validate() const;

  double Volume() const;
  double SurfaceArea() const;

  static RoomSpec FromJson(const std::string &text);
  std::string ToJson() const;
};

// Sabine reverberation time for the room's absorption, and its inverse.
double SabineT60(const RoomSpec &room);
double SabineAbsorption(const Eigen::Vector3d &dimensions_m, double t60_s,
                        double speed_of_sound_mps = 343.0);

// Linear array of `num_mics` along x, centred on `center`.
std::vector<Eigen::Vector3d> LinearArray(const Eigen::Vector3d &center,
                                         int num_mics = 4,
                                         double spacing_m = 0.1);

struct RoomImpulseResponse {
  Eigen::MatrixXd taps;  // mics x length
  int sample_rate_hz = 16000;
  std::vector<int> direct_path_index;  // per mic

  int NumMics() const { return static_cast<int>(taps.rows()); }
  Eigen::Index Length() const { return taps.cols(); }
  std::vector<double> Channel(int mic) const;

  // Unit impulse at index 0 for every mic (identity room).
  static RoomImpulseResponse Identity(int num_mics, int sample_rate_hz);
};

// Image-source simulation. Each image with n wall reflections contributes
// sqrt(1 - absorption)^n / (4 pi r) at fractional delay r * fs / c, drawn
// with a Hann-windowed sinc spanning 8 ms. Images with more than max_order
// reflections in total are dropped.
RoomImpulseResponse SimulateRir(const RoomSpec &room);

// Reverberation time from Schroeder backward integration of `rir` starting
// at `start`: a least-squares line through the -5..-25 dB span of the decay
// curve, extrapolated to -60 dB. Falls back to -5..-15 dB when the decay
// does not reach -25 dB. Returns 0 for an empty or all-zero response.
double SchroederT60(std::span<const double> rir, int sample_rate_hz,
                    Eigen::Index start = 0);

// First tap whose magnitude reaches half of the channel's peak. The sinc
// kernel rings before the arrival, so this is the measurable onset.
Eigen::Index OnsetIndex(std::span<const double> rir);

// Five reproducible stand-in rooms: 2 small ([2, 6] m sides) and 3 medium
// ([6, 12] m sides) drawn with seed 20200501, absorption set by Sabine for a
// T60 drawn from [0.2, 0.6] s (draws whose absorption falls outside
// [0.35, 0.5] are redrawn), and a 4-mic linear array.
std::vector<RoomSpec> DefaultRooms();

}  // namespace farfield

#endif  // FARFIELD_AUGMENTATION_ROOM_H_
