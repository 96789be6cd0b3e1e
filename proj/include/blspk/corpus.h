// include/blspk/corpus.h

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

#ifndef BLSPK_CORPUS_H_
#define BLSPK_CORPUS_H_

#include <filesystem>
#include <string>
#include <vector>

#include "blspk/dsp/audio.h"

namespace blspk {

struct SpeakerAudio {
  std::string name;
  std::vector<AudioSegment> utterances;
};

// Labeled utterances; the speaker index is the class label.
struct Corpus {
  std::vector<SpeakerAudio> speakers;

  std::size_t NumUtterances() const;
};

// One subdirectory per speaker holding .wav files. Speakers and files are
// taken in lexicographic order so labels are stable across runs.
Corpus LoadCorpusDir(const std::filesystem::path &dir);

// Mirror of LoadCorpusDir: <dir>/<speaker>/<speaker>_NNN.wav.
void SaveCorpusDir(const Corpus &corpus, const std::filesystem::path &dir);

}  // namespace blspk

#endif  // BLSPK_CORPUS_H_
