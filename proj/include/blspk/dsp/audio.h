// include/blspk/dsp/audio.h

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

#ifndef BLSPK_DSP_AUDIO_H_
#define BLSPK_DSP_AUDIO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace blspk {

inline constexpr int kSampleRate = 16000;

// Mono 16 kHz waveform with amplitudes in [-1, 1].
class AudioSegment {
 public:
  AudioSegment() = default;

  // Throws kInvalidArgument if any sample is outside [-1, 1] or not finite.
  explicit AudioSegment(std::vector<float> samples);

  // No range check. Filter outputs (pre-emphasis reaches 1 + alpha) are the
  // only intended use.
  static AudioSegment Unchecked(std::vector<float> samples);

  const std::vector<float> &samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration_s() const {
    return static_cast<double>(samples_.size()) / kSampleRate;
  }
  int sample_rate_hz() const { return kSampleRate; }

  // Leading `n` samples (or all of them if shorter).
  AudioSegment Head(std::size_t n) const;
  AudioSegment Slice(std::size_t offset, std::size_t n) const;

  bool operator==(const AudioSegment &) const = default;

 private:
  std::vector<float> samples_;
};

inline std::size_t SecondsToSamples(double seconds) {
  return static_cast<std::size_t>(seconds * kSampleRate + 0.5);
}

// RIFF/WAVE, PCM 16-bit little-endian, mono, 16000 Hz. Anything else is
// rejected with kUnsupportedFormat; malformed containers with kNotWav.
AudioSegment ParseWav(std::span<const std::uint8_t> bytes);
AudioSegment LoadWav(const std::filesystem::path &path);

// Samples are rounded to the nearest 16-bit code and clipped to
// [-32768, 32767].
std::vector<std::uint8_t> EncodeWav(const AudioSegment &seg);
void SaveWav(const AudioSegment &seg, const std::filesystem::path &path);

}  // namespace blspk

#endif  // BLSPK_DSP_AUDIO_H_
