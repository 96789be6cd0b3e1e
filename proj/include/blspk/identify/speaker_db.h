// include/blspk/identify/speaker_db.h

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

#ifndef BLSPK_IDENTIFY_SPEAKER_DB_H_
#define BLSPK_IDENTIFY_SPEAKER_DB_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blspk/embed/embedding.h"

namespace blspk {

struct DbEntry {
  Embedding embedding;
  std::string created_at;  // ISO-8601 UTC

  bool operator==(const DbEntry &) const = default;
};

struct EnrolledSpeaker {
  std::string name;
  std::vector<DbEntry> entries;

  bool operator==(const EnrolledSpeaker &) const = default;
};

inline constexpr std::size_t kMaxSpeakerNameBytes = 128;

// Non-empty, at most kMaxSpeakerNameBytes, no control characters and not
// only spaces.
bool IsValidSpeakerName(const std::string &name);

// Enrolled speakers in enrollment order, each with its entries in the
// order they were added. Names are unique and every speaker has at least
// one entry.
class SpeakerDb {
 public:
  const std::vector<EnrolledSpeaker> &speakers() const { return speakers_; }
  bool empty() const { return speakers_.empty(); }
  std::size_t size() const { return speakers_.size(); }

  const EnrolledSpeaker *Find(const std::string &name) const;

  // Creates the speaker if needed and appends the entry. Returns the
  // speaker's entry count afterwards. Throws kInvalidName for names failing
  // IsValidSpeakerName and kBadEmbedding for vectors that are not unit norm.
  std::size_t Enroll(const std::string &name, const Embedding &e,
                     std::string created_at = {});

  bool operator==(const SpeakerDb &) const = default;

 private:
  std::vector<EnrolledSpeaker> speakers_;
};

std::string NowIso8601();

// Mean similarity between q and each entry. Throws kNoEntries.
double ScoreSpeaker(const Embedding &q, std::span<const Embedding> entries);
double ScoreSpeaker(const Embedding &q, std::span<const DbEntry> entries);

struct SpeakerScore {
  std::string name;
  double score = 0;
};

struct IdentificationResult {
  std::optional<std::string> speaker;  // nullopt: unknown
  std::vector<SpeakerScore> scores;    // one per speaker, db order

  bool known() const { return speaker.has_value(); }
};

// Unknown when every speaker scores below zero; otherwise the highest
// scoring speaker, ties going to the earliest enrolled. Throws kEmptyDb.
IdentificationResult Identify(const Embedding &q, const SpeakerDb &db);

// {"version": 1, "speakers": [{"name", "entries": [{"created_at",
// "embedding": [...]}]}]}
std::string DbToJson(const SpeakerDb &db);
SpeakerDb DbFromJson(const std::string &text);

// Writes to a temporary sibling then renames over `path`.
void SaveDb(const SpeakerDb &db, const std::filesystem::path &path);
SpeakerDb LoadDb(const std::filesystem::path &path);

}  // namespace blspk

#endif  // BLSPK_IDENTIFY_SPEAKER_DB_H_
