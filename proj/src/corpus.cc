// src/corpus.cc

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

#include "blspk/corpus.h"

#include <algorithm>
#include <cstdio>

#include "blspk/error.h"

namespace blspk {

namespace fs = std::filesystem;

std::size_t Corpus::NumUtterances() const {
  std::size_t n = 0;
  for (const auto &s : speakers) n += s.utterances.size();
  return n;
}

Corpus LoadCorpusDir(const fs::path &dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, "not a directory: " + dir.string());
  }
  std::vector<fs::path> speaker_dirs;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) speaker_dirs.push_back(entry.path());
  }
  std::sort(speaker_dirs.begin(), speaker_dirs.end());

  Corpus corpus;
  for (const auto &sd : speaker_dirs) {
    std::vector<fs::path> wavs;
    for (const auto &entry : fs::directory_iterator(sd)) {
      if (entry.is_regular_file() && entry.path().extension() == ".wav") {
        wavs.push_back(entry.path());
      }
    }
    if (wavs.empty()) continue;
    std::sort(wavs.begin(), wavs.end());
    SpeakerAudio speaker{sd.filename().string(), {}};
    for (const auto &w : wavs) speaker.utterances.push_back(LoadWav(w));
    corpus.speakers.push_back(std::move(speaker));
  }
  return corpus;
}

void SaveCorpusDir(const Corpus &corpus, const fs::path &dir) {
  for (const auto &speaker : corpus.speakers) {
    const fs::path sd = dir / speaker.name;
    fs::create_directories(sd);
    for (std::size_t i = 0; i < speaker.utterances.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "_%03zu.wav", i);
      SaveWav(speaker.utterances[i], sd / (speaker.name + name));
    }
  }
}

}  // namespace blspk
