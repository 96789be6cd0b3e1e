// src/eval/synth.cc

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

#include "blspk/eval/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "blspk/error.h"

namespace blspk {

namespace {

// RBJ band-pass biquad with 0 dB peak gain.
class Resonator {
 public:
  Resonator(double center_hz, double bandwidth_hz) {
    const double w0 = 2.0 * std::numbers::pi * center_hz / kSampleRate;
    const double q = center_hz / bandwidth_hz;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0_ = alpha / a0;
    b2_ = -alpha / a0;
    a1_ = -2.0 * std::cos(w0) / a0;
    a2_ = (1.0 - alpha) / a0;
  }

  double Step(double x) {
    const double y = b0_ * x + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double b0_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

double Uniform(std::mt19937_64 &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

SynthVoice DrawVoice(std::mt19937_64 &rng) {
  SynthVoice v;
  v.center_hz = {Uniform(rng, 300, 850), Uniform(rng, 900, 2300),
                 Uniform(rng, 2400, 3800)};
  v.bandwidth_hz = {Uniform(rng, 60, 120), Uniform(rng, 80, 160),
                    Uniform(rng, 120, 250)};
  v.gain = {1.0, Uniform(rng, 0.3, 0.9), Uniform(rng, 0.1, 0.6)};
  v.pitch_hz = Uniform(rng, 90, 220);
  return v;
}

AudioSegment Utterance(const SynthVoice &voice, std::mt19937_64 &rng) {
  const std::size_t n = SecondsToSamples(Uniform(rng, 3.0, 3.5));
  const double pitch = voice.pitch_hz * Uniform(rng, 0.9, 1.1);
  const double peak = Uniform(rng, 0.3, 0.9);
  const double noise_level = Uniform(rng, 0.02, 0.08);
  const double shift = Uniform(rng, 0.97, 1.03);

  std::vector<Resonator> filters;
  for (int k = 0; k < 3; ++k) {
    filters.emplace_back(voice.center_hz[k] * shift, voice.bandwidth_hz[k]);
  }

  // Syllable envelope: voiced stretches separated by pauses, 10 ms ramps.
  std::vector<double> env(n, 0.0);
  const std::size_t ramp = SecondsToSamples(0.010);
  std::size_t pos = SecondsToSamples(Uniform(rng, 0.05, 0.15));
  while (pos < n) {
    const std::size_t len = SecondsToSamples(Uniform(rng, 0.25, 0.6));
    const std::size_t end = std::min(n, pos + len);
    for (std::size_t i = pos; i < end; ++i) {
      const std::size_t from_edge = std::min(i - pos, end - 1 - i);
      env[i] = from_edge >= ramp
                   ? 1.0
                   : 0.5 - 0.5 * std::cos(std::numbers::pi * from_edge / ramp);
    }
    pos = end + SecondsToSamples(Uniform(rng, 0.05, 0.15));
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> y(n);
  double phase = 1.0;
  double peak_abs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vibrato =
        1.0 + 0.02 * std::sin(2.0 * std::numbers::pi * 5.0 * i / kSampleRate);
    phase += pitch * vibrato / kSampleRate;
    double excitation = noise_level * gauss(rng);
    if (phase >= 1.0) {
      phase -= 1.0;
      excitation += 1.0;
    }
    double s = 0;
    for (int k = 0; k < 3; ++k) s += voice.gain[k] * filters[k].Step(excitation);
    y[i] = s * env[i];
    peak_abs = std::max(peak_abs, std::abs(y[i]));
  }

  std::vector<float> samples(n);
  const double scale = peak_abs > 0 ? peak / peak_abs : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Pauses keep a faint noise floor, about 70 dB below the voice.
    const double floor = 1e-4 * gauss(rng);
    samples[i] = static_cast<float>(std::clamp(y[i] * scale + floor, -1.0, 1.0));
  }
  return AudioSegment(std::move(samples));
}

}  // namespace

SynthCorpus MakeSynthCorpus(int n_speakers, int utts_per_speaker,
                            std::uint64_t seed) {
  if (n_speakers < 2) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic corpus needs >= 2 speakers");
  }
  if (utts_per_speaker < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one utterance");
  }
  SynthCorpus out;
  out.seed = seed;
  std::mt19937_64 voice_rng(seed);
  for (int s = 0; s < n_speakers; ++s) out.voices.push_back(DrawVoice(voice_rng));

  for (int s = 0; s < n_speakers; ++s) {
    // Independent stream per speaker: adding utterances to one speaker
    // leaves the others untouched.
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    char name[16];
    std::snprintf(name, sizeof(name), "spk%02d", s);
    SpeakerAudio speaker{name, {}};
    for (int u = 0; u < utts_per_speaker; ++u) {
      speaker.utterances.push_back(Utterance(out.voices[s], rng));
    }
    out.corpus.speakers.push_back(std::move(speaker));
  }
  return out;
}

}  // namespace blspk
