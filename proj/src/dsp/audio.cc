// src/dsp/audio.cc

// Copyright 2026   The blspk Authors

// See the LICENSE file at the repository root
//
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

#include "blspk/dsp/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "blspk/error.h"

namespace blspk {

namespace {

std::uint32_t ReadU32(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const std::uint8_t *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<std::uint8_t> *out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back((v >> (8 * i)) & 0xff);
}

void PutU16(std::vector<std::uint8_t> *out, std::uint16_t v) {
  out->push_back(v & 0xff);
  out->push_back((v >> 8) & 0xff);
}

void PutTag(std::vector<std::uint8_t> *out, const char *tag) {
  out->insert(out->end(), tag, tag + 4);
}

}  // namespace

AudioSegment::AudioSegment(std::vector<float> samples)
    : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    float s = samples_[i];
    if (!std::isfinite(s) || s < -1.0f || s > 1.0f) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sample " + std::to_string(i) + " outside [-1, 1]");
    }
  }
}

AudioSegment AudioSegment::Unchecked(std::vector<float> samples) {
  AudioSegment out;
  out.samples_ = std::move(samples);
  return out;
}

AudioSegment AudioSegment::Head(std::size_t n) const {
  return Slice(0, n);
}

AudioSegment AudioSegment::Slice(std::size_t offset, std::size_t n) const {
  AudioSegment out;
  if (offset >= samples_.size()) return out;
  std::size_t end = std::min(samples_.size(), offset + n);
  out.samples_.assign(samples_.begin() + offset, samples_.begin() + end);
  return out;
}

AudioSegment ParseWav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kNotWav, "missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t *chunk = bytes.data() + pos;
    std::uint32_t chunk_size = ReadU32(chunk + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + chunk_size > bytes.size()) {
        throw Error(ErrorCode::kNotWav, "truncated fmt chunk");
      }
      const std::uint8_t *f = bytes.data() + body;
      std::uint16_t format = ReadU16(f);
      std::uint16_t channels = ReadU16(f + 2);
      std::uint32_t rate = ReadU32(f + 4);
      std::uint16_t bits = ReadU16(f + 14);
      if (format != 1) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    "audio format " + std::to_string(format) + " is not PCM");
      }
      if (channels != 1) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    std::to_string(channels) + " channels, expected mono");
      }
      if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    "sample rate " + std::to_string(rate) + " Hz, expected " +
                        std::to_string(kSampleRate));
      }
      if (bits != 16) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    std::to_string(bits) + "-bit samples, expected 16");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::kNotWav, "data before fmt chunk");
      if (body + chunk_size > bytes.size() || chunk_size % 2 != 0) {
        throw Error(ErrorCode::kNotWav, "truncated data chunk");
      }
      std::vector<float> samples(chunk_size / 2);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        auto v = static_cast<std::int16_t>(ReadU16(bytes.data() + body + 2 * i));
        samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return AudioSegment(std::move(samples));
    }
    // Chunks are padded to an even length.
    pos = body + chunk_size + (chunk_size & 1);
  }
  throw Error(ErrorCode::kNotWav, have_fmt ? "no data chunk" : "no fmt chunk");
}

AudioSegment LoadWav(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  if (is.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path.string());
  return ParseWav(bytes);
}

std::vector<std::uint8_t> EncodeWav(const AudioSegment &seg) {
  const auto data_bytes = static_cast<std::uint32_t>(seg.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(&out, "RIFF");
  PutU32(&out, 36 + data_bytes);
  PutTag(&out, "WAVE");
  PutTag(&out, "fmt ");
  PutU32(&out, 16);
  PutU16(&out, 1);
  PutU16(&out, 1);
  PutU32(&out, kSampleRate);
  PutU32(&out, kSampleRate * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  PutTag(&out, "data");
  PutU32(&out, data_bytes);
  for (float s : seg.samples()) {
    long v = std::lround(static_cast<double>(s) * 32768.0);
    v = std::clamp(v, -32768L, 32767L);
    PutU16(&out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

void SaveWav(const AudioSegment &seg, const std::filesystem::path &path) {
  auto bytes = EncodeWav(seg);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  os.write(reinterpret_cast<const char *>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace blspk
