// include/blspk/eval/trials.h

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

#ifndef BLSPK_EVAL_TRIALS_H_
#define BLSPK_EVAL_TRIALS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "blspk/corpus.h"

namespace blspk {

struct Trial {
  bool same = false;
  std::string path_a;
  std::string path_b;

  bool operator==(const Trial &) const = default;
};

using TrialList = std::vector<Trial>;

// One trial per line: "<0|1> <path_a> <path_b>". Blank lines are ignored;
// anything else throws kMalformedLine naming the 1-based line number.
TrialList ParseTrials(std::istream &is);
TrialList LoadTrials(const std::filesystem::path &path);
void WriteTrials(const TrialList &trials, std::ostream &os);

struct TrialCounts {
  std::size_t same = 0;
  std::size_t different = 0;
};
TrialCounts CountTrials(const TrialList &trials);

// Relative path of utterance `index` of `speaker` inside a corpus
// directory written by SaveCorpusDir.
std::string UtteranceKey(const SpeakerAudio &speaker, std::size_t index);

// Exactly n_pairs/2 same-speaker pairs (two distinct utterances of one
// speaker) and n_pairs/2 different-speaker pairs, interleaved, drawn from
// utterances [first_utt, end) of every speaker. n_pairs must be even.
TrialList MakeBalancedTrials(const Corpus &corpus, int n_pairs,
                             std::uint64_t seed, std::size_t first_utt = 0);

}  // namespace blspk

#endif  // BLSPK_EVAL_TRIALS_H_
