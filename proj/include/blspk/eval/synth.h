// include/blspk/eval/synth.h

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

#ifndef BLSPK_EVAL_SYNTH_H_
#define BLSPK_EVAL_SYNTH_H_

#include <array>
#include <cstdint>

#include "blspk/corpus.h"

namespace blspk {

// Per-speaker voice: three resonances and a base pitch.
struct SynthVoice {
  std::array<double, 3> center_hz{};
  std::array<double, 3> bandwidth_hz{};
  std::array<double, 3> gain{};
  double pitch_hz = 0;
};

struct SynthCorpus {
  Corpus corpus;
  std::vector<SynthVoice> voices;
  std::uint64_t seed = 0;
};

inline constexpr double kMinSynthUtteranceS = 2.5;

// Speaker k is named "spkNN". Every utterance is a pulse train plus noise,
// with per-utterance pitch, gain and small formant jitter, shaped by the
// speaker's three band-pass resonators and cut into syllables separated by
// near-silent pauses. Utterances last 3.0 to 3.5 s. Bit-identical for a
// fixed seed. Throws kInvalidArgument when n_speakers < 2.
SynthCorpus MakeSynthCorpus(int n_speakers, int utts_per_speaker,
                            std::uint64_t seed);

}  // namespace blspk

#endif  // BLSPK_EVAL_SYNTH_H_
