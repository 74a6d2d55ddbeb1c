// tests/augmentation-test.cc

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
#include <numbers>

#include "doctest.h"
#include "farfield/augmentation/augment.h"
#include "farfield/augmentation/room.h"
#include "farfield/base/error.h"
#include "farfield/signal/wav-io.h"
#include "json.hpp"
#include "test-util.h"

namespace farfield {
namespace {

namespace fs = std::filesystem;
using testing::NaiveConvolve;
using testing::PeakFrequency;
using testing::RelErr;
using testing::Tone;
using testing::WhiteNoise;

constexpr double kPi = std::numbers::pi;

RoomSpec FreeFieldRoom(double distance_m) {
  RoomSpec room;
  room.dimensions_m = {8.0, 6.0, 3.0};
  room.source_position_m = {2.0, 3.0, 1.5};
  room.mic_positions_m = {{2.0 + distance_m, 3.0, 1.5}};
  room.max_order = 0;
  return room;
}

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &name)
      : path(fs::temp_directory_path() / ("farfield-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void WriteUtterances(const fs::path &dir, int count, double seconds) {
  for (int i = 0; i < count; ++i) {
    Waveform w = WhiteNoise(1, static_cast<Eigen::Index>(seconds * 16000),
                            16000, 100 + i, 0.1);
    WriteWav((dir / ("utt" + std::to_string(i) + ".wav")).string(), w,
             WavSampleFormat::kPcm16);
  }
}

int CountWavs(const fs::path &dir) {
  int n = 0;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.path().extension() == ".wav") ++n;
  return n;
}

double ChannelEnergy(const Eigen::MatrixXd &x, Eigen::Index begin,
                     Eigen::Index end) {
  return x.middleCols(begin, end - begin).squaredNorm();
}

TEST_CASE("direct path only: peak index and amplitude") {
  RoomImpulseResponse rir = SimulateRir(FreeFieldRoom(1.7));
  const auto h = rir.Channel(0);
  Eigen::Index peak = 0;
  for (size_t i = 0; i < h.size(); ++i)
    if (std::abs(h[i]) > std::abs(h[peak])) peak = static_cast<Eigen::Index>(i);
  CHECK(peak == 79);
  CHECK(rir.direct_path_index[0] == 79);
  // The band-limited kernel preserves DC: taps sum to the image amplitude.
  double sum = 0.0;
  for (double v : h) sum += v;
  CHECK(RelErr(sum, 1.0 / (4.0 * kPi * 1.7)) <= 1e-3);
}

TEST_CASE("direct path at an integer delay is a scaled unit impulse") {
  const double d = 343.0 * 80.0 / 16000.0;
  RoomImpulseResponse rir = SimulateRir(FreeFieldRoom(d));
  const auto h = rir.Channel(0);
  REQUIRE(h.size() > 80);
  CHECK(RelErr(h[80], 1.0 / (4.0 * kPi * d)) <= 1e-12);
  for (size_t i = 0; i < h.size(); ++i)
    if (i != 80) CHECK(std::abs(h[i]) < 1e-15);
}

TEST_CASE("sabine-matched absorption reproduces t60 0.3 s") {
  RoomSpec room;
  room.dimensions_m = {6.0, 5.0, 3.0};
  room.absorption = SabineAbsorption(room.dimensions_m, 0.3);
  room.source_position_m = {1.5, 2.0, 1.5};
  room.mic_positions_m = LinearArray({4.0, 3.0, 1.2});
  CHECK(RelErr(SabineT60(room), 0.3) <= 1e-12);
  RoomImpulseResponse rir = SimulateRir(room);
  for (int m = 0; m < rir.NumMics(); ++m) {
    double t60 = SchroederT60(rir.Channel(m), 16000);
    CHECK(t60 > 0.3 * 0.8);
    CHECK(t60 < 0.3 * 1.2);
  }
}

TEST_CASE("mic pair delay difference matches geometry") {
  RoomSpec room;
  room.dimensions_m = {10.0, 8.0, 3.0};
  room.absorption = 0.4;
  room.source_position_m = {1.0, 1.0, 1.5};
  room.mic_positions_m = {{8.0, 6.0, 1.5}, {8.1, 6.0, 1.5}};
  RoomImpulseResponse rir = SimulateRir(room);
  const double fs = 16000.0, c = 343.0;
  const double r0 = (room.mic_positions_m[0] - room.source_position_m).norm();
  const double r1 = (room.mic_positions_m[1] - room.source_position_m).norm();
  const double expected = (r1 - r0) * fs / c;
  const double measured = static_cast<double>(OnsetIndex(rir.Channel(1)) -
                                              OnsetIndex(rir.Channel(0)));
  CHECK(std::abs(measured - expected) <= 1.0);
  CHECK(std::abs((rir.direct_path_index[1] - rir.direct_path_index[0]) -
                 expected) <= 1.0);
}

TEST_CASE("default rooms: onset at the geometric delay") {
  auto rooms = DefaultRooms();
  REQUIRE(rooms.size() == 5);
  for (const auto &room : rooms) {
    RoomImpulseResponse rir = SimulateRir(room);
    for (int m = 0; m < rir.NumMics(); ++m) {
      const double r = (room.mic_positions_m[m] - room.source_position_m).norm();
      const double delay = r * room.sample_rate_hz / room.speed_of_sound_mps;
      CHECK(std::abs(OnsetIndex(rir.Channel(m)) - delay) <= 1.0);
    }
  }
}

TEST_CASE("default rooms: sizes, sabine t60 and simulated decay") {
  auto rooms = DefaultRooms();
  for (size_t i = 0; i < rooms.size(); ++i) {
    const auto &room = rooms[i];
    const double lo = i < 2 ? 2.0 : 6.0, hi = i < 2 ? 6.0 : 12.0;
    for (int k = 0; k < 3; ++k) {
      CHECK(room.dimensions_m[k] >= lo);
      CHECK(room.dimensions_m[k] <= hi);
    }
    CHECK(room.mic_positions_m.size() == 4);
    const double sabine = SabineT60(room);
    CHECK(sabine >= 0.2);
    CHECK(sabine <= 0.6);
    RoomImpulseResponse rir = SimulateRir(room);
    const double t60 = SchroederT60(rir.Channel(0), room.sample_rate_hz);
    CHECK(RelErr(t60, sabine) <= 0.2);
  }
}

TEST_CASE("reverberant tail decays block by block") {
  RoomSpec room = DefaultRooms()[2];
  RoomImpulseResponse rir = SimulateRir(room);
  const auto h = rir.Channel(0);
  const Eigen::Index block = 800;  // 50 ms
  const Eigen::Index start = rir.direct_path_index[0] + block;
  double previous = std::numeric_limits<double>::infinity();
  for (Eigen::Index b = start; b + block <= static_cast<Eigen::Index>(h.size()) &&
                               b < start + 6 * block;
       b += block) {
    double e = 0.0;
    for (Eigen::Index n = b; n < b + block; ++n) e += h[n] * h[n];
    CHECK(e < previous);
    previous = e;
  }
}

TEST_CASE("t60 tracks sabine across the absorption range" * doctest::may_fail()) {
  for (double absorption : {0.2, 0.3, 0.4, 0.5, 0.6}) {
    RoomSpec room;
    room.dimensions_m = {7.0, 5.5, 3.0};
    room.absorption = absorption;
    room.source_position_m = {2.0, 2.0, 1.5};
    room.mic_positions_m = LinearArray({4.5, 3.0, 1.2});
    RoomImpulseResponse rir = SimulateRir(room);
    const double t60 = SchroederT60(rir.Channel(0), 16000);
    INFO("absorption " << absorption);
    CHECK(RelErr(t60, SabineT60(room)) <= 0.2);
  }
}

TEST_CASE("rir geometry errors") {
  RoomSpec room = FreeFieldRoom(1.0);
  room.mic_positions_m[0] = {8.5, 3.0, 1.5};
  CHECK_THROWS_AS(SimulateRir(room), Error);
  try {
    SimulateRir(room);
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kGeometryError);
  }
  room = FreeFieldRoom(1.0);
  room.dimensions_m[0] = 13.0;
  try {
    room.Validate();
    FAIL("expected GeometryError");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kGeometryError);
  }
}

TEST_CASE("room spec json round trip and strictness") {
  RoomSpec room = DefaultRooms()[1];
  RoomSpec back = RoomSpec::FromJson(room.ToJson());
  CHECK((back.dimensions_m - room.dimensions_m).norm() == 0.0);
  CHECK(back.absorption == room.absorption);
  CHECK(back.mic_positions_m.size() == room.mic_positions_m.size());
  auto doc = nlohmann::json::parse(room.ToJson());
  doc["colour"] = "blue";
  CHECK_THROWS_AS(RoomSpec::FromJson(doc.dump()), Error);
}

TEST_CASE("convolution: identity kernel and impulse input") {
  Waveform x = WhiteNoise(1, 1000, 16000, 7);
  Waveform y = ConvolveReverb(x, RoomImpulseResponse::Identity(2, 16000));
  REQUIRE(y.NumChannels() == 2);
  REQUIRE(y.Length() == 1000);
  CHECK((y.samples().row(0) - x.samples().row(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((y.samples().row(1) - x.samples().row(0)).cwiseAbs().maxCoeff() == 0.0);

  RoomImpulseResponse rir = SimulateRir(DefaultRooms()[0]);
  Eigen::MatrixXd impulse = Eigen::MatrixXd::Zero(1, 1);
  impulse(0, 0) = 1.0;
  Waveform z = ConvolveReverb(Waveform(impulse, 16000), rir);
  REQUIRE(z.Length() == rir.Length());
  CHECK((z.samples() - rir.taps).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("convolution matches direct summation") {
  Waveform x = WhiteNoise(1, 16000, 16000, 11, 0.3);
  Waveform h = WhiteNoise(1, 4000, 16000, 12, 0.05);
  RoomImpulseResponse rir;
  rir.taps = h.samples();
  rir.sample_rate_hz = 16000;
  rir.direct_path_index = {0};
  Waveform y = ConvolveReverb(x, rir);
  const auto ref = NaiveConvolve(x.Channel(0), h.Channel(0));
  REQUIRE(y.Length() == static_cast<Eigen::Index>(ref.size()));
  double err = 0.0, scale = 0.0;
  for (size_t n = 0; n < ref.size(); ++n) {
    err = std::max(err, std::abs(y.samples()(0, n) - ref[n]));
    scale = std::max(scale, std::abs(ref[n]));
  }
  CHECK(err / scale < 1e-9);
}

TEST_CASE("convolution is linear") {
  RoomImpulseResponse rir = SimulateRir(DefaultRooms()[3]);
  Waveform x = WhiteNoise(1, 8000, 16000, 21);
  Waveform y = WhiteNoise(1, 8000, 16000, 22);
  const double a = 0.7, b = -1.3;
  Waveform mix(a * x.samples() + b * y.samples(), 16000);
  Eigen::MatrixXd lhs = ConvolveReverb(mix, rir).samples();
  Eigen::MatrixXd rhs = a * ConvolveReverb(x, rir).samples() +
                        b * ConvolveReverb(y, rir).samples();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("convolution errors") {
  Waveform x = WhiteNoise(1, 100, 8000, 1);
  try {
    ConvolveReverb(x, RoomImpulseResponse::Identity(1, 16000));
    FAIL("expected RateMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kRateMismatch);
  }
  Waveform stereo = WhiteNoise(2, 100, 16000, 1);
  try {
    ConvolveReverb(stereo, RoomImpulseResponse::Identity(1, 16000));
    FAIL("expected ChannelMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kChannelMismatch);
  }
}

TEST_CASE("speed perturbation: length, pitch, identity") {
  Waveform x = WhiteNoise(1, 48000, 16000, 3);
  CHECK(SpeedPerturb(x, 0.9).Length() == 53333);
  CHECK(SpeedPerturb(x, 1.1).Length() == std::lround(48000 / 1.1));
  Waveform same = SpeedPerturb(x, 1.0);
  CHECK((same.samples() - x.samples()).cwiseAbs().maxCoeff() == 0.0);

  Waveform tone = Tone(300.0, 1.0, 16000);
  Waveform fast = SpeedPerturb(tone, 1.1);
  CHECK(PeakFrequency(fast.Channel(0), 16000, 200, 500) == 330.0);
  CHECK_THROWS_AS(SpeedPerturb(tone, 2.5), Error);
}

TEST_CASE("speed perturbation preserves energy within 1 dB") {
  Eigen::MatrixXd x(1, 32000);
  for (Eigen::Index n = 0; n < x.cols(); ++n) {
    const double t = n / 16000.0;
    x(0, n) = 0.3 * std::sin(2 * kPi * 220 * t) +
              0.2 * std::sin(2 * kPi * 1250 * t) +
              0.1 * std::sin(2 * kPi * 3100 * t);
  }
  Waveform w(x, 16000);
  for (double factor : {0.9, 0.95, 1.0, 1.05, 1.1}) {
    double ratio = SpeedPerturb(w, factor).Energy() / w.Energy();
    CHECK(std::abs(testing::Db(ratio)) <= 1.0);
  }
}

TEST_CASE("recipe defaults and parsing") {
  AugmentationRecipe recipe = AugmentationRecipe::Default();
  CHECK(recipe.rooms.size() == 5);
  CHECK(recipe.speed_factors == std::vector<double>{0.9, 1.0, 1.1});
  CHECK(recipe.NumCopies() == 15);

  AugmentationRecipe parsed =
      AugmentationRecipe::FromJson(R"({"speed_factors": [1.0]})");
  CHECK(parsed.rooms.size() == 5);
  CHECK(parsed.NumCopies() == 5);
  CHECK_THROWS_AS(AugmentationRecipe::FromJson(R"({"room": []})"), Error);
  CHECK_THROWS_AS(AugmentationRecipe::FromJson(R"({"speed_factors": [3]})"),
                  Error);
}

TEST_CASE("corpus: default recipe yields 15 copies per utterance") {
  TempDir in("aug-in-1"), out("aug-out-1");
  WriteUtterances(in.path, 1, 0.5);
  AugmentManifest m =
      AugmentCorpus(in.path.string(), AugmentationRecipe::Default(),
                    out.path.string());
  CHECK(m.inputs == 1);
  CHECK(m.rows.size() == 15);
  CHECK(CountWavs(out.path) == 15);
  for (const auto &row : m.rows) {
    Waveform w = ReadWav(row.output);
    const auto speed_len = std::lround(8000 / row.factor);
    CHECK(w.Length() > speed_len);
  }
}

TEST_CASE("corpus: product count and manifest rows") {
  TempDir in("aug-in-2"), out("aug-out-2");
  WriteUtterances(in.path, 3, 0.25);
  AugmentationRecipe recipe = AugmentationRecipe::Default();
  recipe.rooms.resize(2);
  AugmentManifest m = AugmentCorpus(in.path.string(), recipe,
                                    out.path.string());
  CHECK(m.rows.size() == 18);
  CHECK(CountWavs(out.path) == 18);
  std::ifstream manifest(out.path / "manifest.jsonl");
  std::string line;
  int rows = 0;
  while (std::getline(manifest, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("source"));
    CHECK(j["room"].is_number_integer());
    CHECK(j["factor"].is_number());
    CHECK(fs::exists(j["output"].get<std::string>()));
    ++rows;
  }
  CHECK(rows == 18);
}

TEST_CASE("corpus: identity room at factor 1 reproduces the input") {
  TempDir in("aug-in-3"), out("aug-out-3");
  WriteUtterances(in.path, 1, 0.5);
  Waveform original = ReadWav((in.path / "utt0.wav").string());
  AugmentManifest m = AugmentCorpusWithRirs(
      in.path.string(), {RoomImpulseResponse::Identity(1, 16000)}, {1.0},
      out.path.string());
  REQUIRE(m.rows.size() == 1);
  WavSampleFormat fmt;
  Waveform copy = ReadWav(m.rows[0].output, &fmt);
  CHECK(fmt == WavSampleFormat::kFloat32);
  REQUIRE(copy.Length() == original.Length());
  CHECK((copy.samples() - original.samples()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("corpus: unreadable input is skipped with a warning") {
  TempDir in("aug-in-4"), out("aug-out-4");
  WriteUtterances(in.path, 2, 0.25);
  std::ofstream(in.path / "broken.wav") << "not a wave file";
  AugmentManifest m = AugmentCorpusWithRirs(
      in.path.string(), {RoomImpulseResponse::Identity(1, 16000)}, {0.9, 1.1},
      out.path.string());
  CHECK(m.inputs == 3);
  CHECK(m.skipped == 1);
  CHECK(m.warnings.size() == 1);
  CHECK(m.rows.size() == 4);
}

TEST_CASE("corpus: unwritable output directory") {
  TempDir in("aug-in-5");
  WriteUtterances(in.path, 1, 0.25);
  const fs::path blocker = in.path / "file";
  std::ofstream(blocker) << "x";
  try {
    AugmentCorpusWithRirs(in.path.string(),
                          {RoomImpulseResponse::Identity(1, 16000)}, {1.0},
                          (blocker / "out").string());
    FAIL("expected IoError");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}

TEST_CASE("scene: noiseless direct path is a delayed, scaled source") {
  const double d = 343.0 * 40.0 / 16000.0;
  RoomSpec room = FreeFieldRoom(d);
  Waveform src = WhiteNoise(1, 4000, 16000, 5);
  Scene scene = SynthScene(room, {{"A", src, room.source_position_m, {}}},
                           std::numeric_limits<double>::infinity(), 1);
  REQUIRE(scene.mixture.Length() == 4000);
  const double gain = 1.0 / (4.0 * kPi * d);
  double err = 0.0;
  for (Eigen::Index n = 0; n < 4000; ++n) {
    const double expected = n >= 40 ? gain * src.samples()(0, n - 40) : 0.0;
    err = std::max(err, std::abs(scene.mixture.samples()(0, n) - expected));
  }
  CHECK(err < 1e-12);
  CHECK(scene.noise.samples().cwiseAbs().maxCoeff() == 0.0);
  CHECK(scene.annotation.Speakers() == std::vector<std::string>{"A"});
}

TEST_CASE("scene: disjoint activity separates the halves") {
  RoomSpec room = DefaultRooms()[0];
  Waveform a = Tone(440.0, 2.0, 16000);
  Waveform b = Tone(1000.0, 2.0, 16000);
  Eigen::Vector3d pa = room.source_position_m;
  Eigen::Vector3d pb{room.dimensions_m[0] - 0.5, room.dimensions_m[1] - 0.5, 1.5};
  Scene scene = SynthScene(room,
                           {{"A", a, pa, {{0.0, 1.0}}}, {"B", b, pb, {{1.0, 2.0}}}},
                           std::numeric_limits<double>::infinity(), 3);
  REQUIRE(scene.mixture.NumChannels() == 4);
  const Eigen::Index half = 16000;
  const auto &mix = scene.mixture.samples();
  const auto &sa = scene.stems[0].samples();
  const auto &sb = scene.stems[1].samples();
  // Stems sum to the mixture.
  CHECK((sa + sb - mix).cwiseAbs().maxCoeff() < 1e-12);
  double a_first = ChannelEnergy(sa, 0, half), b_first = ChannelEnergy(sb, 0, half);
  double a_second = ChannelEnergy(sa, half, 2 * half);
  double b_second = ChannelEnergy(sb, half, 2 * half);
  CHECK(a_first / (a_first + b_first) > 0.99);
  CHECK(b_second / (a_second + b_second) > 0.99);
}

TEST_CASE("scene: noise level follows the requested snr") {
  RoomSpec room = DefaultRooms()[1];
  Waveform src = WhiteNoise(1, 32000, 16000, 9);
  Scene scene = SynthScene(room, {{"A", src, room.source_position_m, {}}}, 0.0,
                           42);
  const Eigen::MatrixXd clean = scene.stems[0].samples();
  const double ratio = clean.squaredNorm() / scene.noise.samples().squaredNorm();
  CHECK(std::abs(testing::Db(ratio)) <= 0.3);
  Scene again = SynthScene(room, {{"A", src, room.source_position_m, {}}}, 0.0,
                           42);
  CHECK((again.mixture.samples() - scene.mixture.samples()).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("scene: source outside the room") {
  RoomSpec room = DefaultRooms()[0];
  Waveform src = WhiteNoise(1, 1000, 16000, 1);
  try {
    SynthScene(room, {{"A", src, {-1.0, 1.0, 1.0}, {}}}, 10.0, 1);
    FAIL("expected GeometryError");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kGeometryError);
  }
}

}  // namespace
}  // namespace farfield
