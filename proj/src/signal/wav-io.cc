// src/signal/wav-io.cc

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

#include "farfield/signal/wav-io.h"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "farfield/base/error.h"

namespace farfield {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t LoadU32(const unsigned char *p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
uint16_t LoadU16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

void StoreU32(std::vector<unsigned char> *buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf->push_back((v >> (8 * i)) & 0xFF);
}
void StoreU16(std::vector<unsigned char> *buf, uint16_t v) {
  buf->push_back(v & 0xFF);
  buf->push_back((v >> 8) & 0xFF);
}
void StoreTag(std::vector<unsigned char> *buf, const char *tag) {
  buf->insert(buf->end(), tag, tag + 4);
}

bool ReadExact(std::istream &in, unsigned char *dst, size_t n) {
  in.read(reinterpret_cast<char *>(dst), static_cast<std::streamsize>(n));
  return static_cast<size_t>(in.gcount()) == n;
}

[[noreturn]] void Malformed(const std::string &what) {
  throw Error(ErrorCode::kFormatError, "malformed WAV: " + what);
}

}  // namespace

Waveform ReadWav(std::istream &in, WavSampleFormat *format_out) {
  std::array<unsigned char, 12> riff{};
  if (!ReadExact(in, riff.data(), riff.size())) Malformed("truncated header");
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 ||
      std::memcmp(riff.data() + 8, "WAVE", 4) != 0)
    Malformed("missing RIFF/WAVE tags");

  bool have_fmt = false;
  uint16_t format_tag = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  std::vector<unsigned char> data;
  bool have_data = false;
  while (!have_data) {
    std::array<unsigned char, 8> hdr{};
    if (!ReadExact(in, hdr.data(), hdr.size())) break;
    const uint32_t size = LoadU32(hdr.data() + 4);
    if (std::memcmp(hdr.data(), "fmt ", 4) == 0) {
      if (size < 16) Malformed("fmt chunk too small");
      std::vector<unsigned char> fmt(size);
      if (!ReadExact(in, fmt.data(), size)) Malformed("truncated fmt chunk");
      format_tag = LoadU16(&fmt[0]);
      channels = LoadU16(&fmt[2]);
      sample_rate = LoadU32(&fmt[4]);
      bits = LoadU16(&fmt[14]);
      if (format_tag == kFormatExtensible) {
        if (size < 26) Malformed("short extensible fmt chunk");
        format_tag = LoadU16(&fmt[24]);  // first two bytes of SubFormat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr.data(), "data", 4) == 0) {
      if (!have_fmt) Malformed("data chunk before fmt chunk");
      data.resize(size);
      if (!ReadExact(in, data.data(), size)) Malformed("truncated data chunk");
      have_data = true;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur);
      if (!in) Malformed("truncated chunk");
      continue;
    }
    if (size & 1u) in.seekg(1, std::ios::cur);
  }
  if (!have_fmt || !have_data) Malformed("missing fmt or data chunk");
  if (channels < 1 || channels > 8)
    Malformed("unsupported channel count " + std::to_string(channels));
  if (sample_rate == 0) Malformed("zero sample rate");

  WavSampleFormat format;
  if (format_tag == kFormatPcm && bits == 16) {
    format = WavSampleFormat::kPcm16;
  } else if (format_tag == kFormatFloat && bits == 32) {
    format = WavSampleFormat::kFloat32;
  } else {
    Malformed("unsupported sample format (tag " + std::to_string(format_tag) +
              ", " + std::to_string(bits) + " bits)");
  }
  const size_t bytes_per_sample = bits / 8;
  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t num_frames = data.size() / frame_bytes;
  Eigen::MatrixXd samples(channels, static_cast<Eigen::Index>(num_frames));
  for (size_t i = 0; i < num_frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const unsigned char *p = &data[i * frame_bytes + c * bytes_per_sample];
      double v;
      if (format == WavSampleFormat::kPcm16) {
        v = static_cast<int16_t>(LoadU16(p)) / 32768.0;
      } else {
        v = std::bit_cast<float>(LoadU32(p));
      }
      samples(c, static_cast<Eigen::Index>(i)) = v;
    }
  }
  if (format_out) *format_out = format;
  return Waveform(std::move(samples), static_cast<int>(sample_rate));
}

Waveform ReadWav(const std::string &path, WavSampleFormat *format_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return ReadWav(in, format_out);
}

void WriteWav(std::ostream &out, const Waveform &wave,
              WavSampleFormat format) {
  if (wave.NumChannels() < 1 || wave.NumChannels() > 8)
    throw Error(ErrorCode::kFormatError, "WAV supports 1 to 8 channels");
  const uint16_t channels = static_cast<uint16_t>(wave.NumChannels());
  const uint16_t bits = format == WavSampleFormat::kPcm16 ? 16 : 32;
  const uint16_t block_align = channels * bits / 8;
  const uint32_t data_bytes =
      static_cast<uint32_t>(wave.Length()) * block_align;

  std::vector<unsigned char> buf;
  buf.reserve(44 + data_bytes);
  StoreTag(&buf, "RIFF");
  StoreU32(&buf, 36 + data_bytes);
  StoreTag(&buf, "WAVE");
  StoreTag(&buf, "fmt ");
  StoreU32(&buf, 16);
  StoreU16(&buf, format == WavSampleFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  StoreU16(&buf, channels);
  StoreU32(&buf, static_cast<uint32_t>(wave.SampleRate()));
  StoreU32(&buf, static_cast<uint32_t>(wave.SampleRate()) * block_align);
  StoreU16(&buf, block_align);
  StoreU16(&buf, bits);
  StoreTag(&buf, "data");
  StoreU32(&buf, data_bytes);
  const auto &x = wave.samples();
  for (Eigen::Index i = 0; i < wave.Length(); ++i) {
    for (int c = 0; c < channels; ++c) {
      if (format == WavSampleFormat::kPcm16) {
        double v = std::round(x(c, i) * 32768.0);
        v = std::min(32767.0, std::max(-32768.0, v));
        StoreU16(&buf, static_cast<uint16_t>(static_cast<int16_t>(v)));
      } else {
        StoreU32(&buf, std::bit_cast<uint32_t>(static_cast<float>(x(c, i))));
      }
    }
  }
  out.write(reinterpret_cast<const char *>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::kIoError, "failed writing WAV data");
}

void WriteWav(const std::string &path, const Waveform &wave,
              WavSampleFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path);
  WriteWav(out, wave, format);
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path);
}

}  // namespace farfield
