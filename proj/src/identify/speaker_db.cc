// src/identify/speaker_db.cc

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

#include "blspk/identify/speaker_db.h"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "blspk/error.h"
#include "json.hpp"

namespace blspk {

using nlohmann::json;

const EnrolledSpeaker *SpeakerDb::Find(const std::string &name) const {
  for (const auto &s : speakers_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

bool IsValidSpeakerName(const std::string &name) {
  if (name.empty() || name.size() > kMaxSpeakerNameBytes) return false;
  bool any_visible = false;
  for (unsigned char c : name) {
    if (c < 0x20 || c == 0x7f) return false;
    any_visible |= c != ' ';
  }
  return any_visible;
}

std::size_t SpeakerDb::Enroll(const std::string &name, const Embedding &e,
                              std::string created_at) {
  if (!IsValidSpeakerName(name)) {
    throw Error(ErrorCode::kInvalidName, "invalid speaker name '" + name + "'");
  }
  if (e.dim() == 0 ||
      !(std::abs(L2Norm(e.values()) - 1.0) <= kUnitNormTolerance)) {
    throw Error(ErrorCode::kBadEmbedding, "embedding is not unit norm");
  }
  if (!speakers_.empty() && speakers_.front().entries.front().embedding.dim() !=
                                e.dim()) {
    throw Error(ErrorCode::kBadEmbedding, "embedding size differs from the db");
  }
  if (created_at.empty()) created_at = NowIso8601();
  for (auto &s : speakers_) {
    if (s.name == name) {
      s.entries.push_back({e, std::move(created_at)});
      return s.entries.size();
    }
  }
  speakers_.push_back({name, {{e, std::move(created_at)}}});
  return 1;
}

std::string NowIso8601() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double ScoreSpeaker(const Embedding &q, std::span<const Embedding> entries) {
  if (entries.empty()) throw Error(ErrorCode::kNoEntries, "speaker has no entries");
  double sum = 0;
  for (const auto &e : entries) sum += Similarity(q, e);
  return sum / static_cast<double>(entries.size());
}

double ScoreSpeaker(const Embedding &q, std::span<const DbEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::kNoEntries, "speaker has no entries");
  double sum = 0;
  for (const auto &e : entries) sum += Similarity(q, e.embedding);
  return sum / static_cast<double>(entries.size());
}

IdentificationResult Identify(const Embedding &q, const SpeakerDb &db) {
  if (db.empty()) {
    throw Error(ErrorCode::kEmptyDb, "no enrolled speakers; enroll one first");
  }
  IdentificationResult r;
  std::size_t best = 0;
  for (std::size_t i = 0; i < db.speakers().size(); ++i) {
    const auto &s = db.speakers()[i];
    r.scores.push_back({s.name, ScoreSpeaker(q, s.entries)});
    if (r.scores[i].score > r.scores[best].score) best = i;
  }
  if (!(r.scores[best].score < 0.0)) r.speaker = r.scores[best].name;
  return r;
}

std::string DbToJson(const SpeakerDb &db) {
  json speakers = json::array();
  for (const auto &s : db.speakers()) {
    json entries = json::array();
    for (const auto &e : s.entries) {
      json values = json::array();
      for (float v : e.embedding.values()) values.push_back(static_cast<double>(v));
      entries.push_back({{"created_at", e.created_at}, {"embedding", values}});
    }
    speakers.push_back({{"name", s.name}, {"entries", entries}});
  }
  json doc = {{"version", 1}, {"speakers", speakers}};
  return doc.dump(1) + "\n";
}

SpeakerDb DbFromJson(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  if (!doc.is_object() || !doc.contains("version")) {
    throw Error(ErrorCode::kSchemaVersionMismatch, "missing version field");
  }
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != 1) {
    throw Error(ErrorCode::kSchemaVersionMismatch,
                "unsupported version " + doc["version"].dump());
  }
  SpeakerDb db;
  try {
    for (const auto &s : doc.at("speakers")) {
      const std::string name = s.at("name").get<std::string>();
      const auto &entries = s.at("entries");
      if (entries.empty()) {
        throw Error(ErrorCode::kParseError, "speaker '" + name + "' has no entries");
      }
      if (db.Find(name)) {
        throw Error(ErrorCode::kParseError, "duplicate speaker '" + name + "'");
      }
      for (const auto &e : entries) {
        std::vector<float> values;
        for (const auto &v : e.at("embedding")) {
          values.push_back(static_cast<float>(v.get<double>()));
        }
        db.Enroll(name, Embedding::FromUnitVector(std::move(values)),
                  e.at("created_at").get<std::string>());
      }
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return db;
}

void SaveDb(const SpeakerDb &db, const std::filesystem::path &path) {
  const std::string text = DbToJson(db);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    os << text;
    os.flush();
    if (!os) throw Error(ErrorCode::kIoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError, "rename to " + path.string() + ": " + ec.message());
  }
}

SpeakerDb LoadDb(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return DbFromJson(ss.str());
}

}  // namespace blspk
