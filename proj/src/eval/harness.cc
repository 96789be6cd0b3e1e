// src/eval/harness.cc

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

#include "blspk/eval/harness.h"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "blspk/error.h"
#include "blspk/identify/speaker_db.h"
#include "blspk/net/blstm.h"

namespace blspk {

AudioSource FileAudioSource(const std::filesystem::path &base_dir) {
  return [base_dir](const std::string &path) {
    const std::filesystem::path p(path);
    return LoadWav(p.is_absolute() ? p : base_dir / p);
  };
}

AudioSource CorpusAudioSource(const Corpus &corpus) {
  auto index = std::make_shared<std::unordered_map<std::string, const AudioSegment *>>();
  for (const auto &s : corpus.speakers) {
    for (std::size_t i = 0; i < s.utterances.size(); ++i) {
      (*index)[UtteranceKey(s, i)] = &s.utterances[i];
    }
  }
  return [index](const std::string &path) {
    auto it = index->find(path);
    if (it == index->end()) {
      throw Error(ErrorCode::kIoError, "no utterance " + path + " in corpus");
    }
    return *it->second;
  };
}

VerificationReport RunVerification(const EmbeddingNet &net,
                                   const TrialList &trials,
                                   const AudioSource &source, double crop_len_s) {
  std::unordered_map<std::string, Embedding> cache;
  auto embed = [&](const std::string &path) -> const Embedding & {
    auto it = cache.find(path);
    if (it != cache.end()) return it->second;
    return cache.emplace(path, EmbedAudio(net, source(path), crop_len_s))
        .first->second;
  };

  VerificationReport report;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial &t = trials[i];
    double score;
    try {
      score = Similarity(embed(t.path_a), embed(t.path_b));
    } catch (const Error &e) {
      throw Error(e.code(), "trial " + std::to_string(i) + " (" + t.path_a +
                                ", " + t.path_b + "): " + e.what());
    }
    report.scores.push_back(score);
    report.labels.push_back(t.same ? 1 : 0);
    correct += (score >= 0.0) == t.same;
  }
  report.eer = ComputeEer(report.scores, report.labels);
  report.accuracy_at_zero =
      static_cast<double>(correct) / static_cast<double>(trials.size());
  return report;
}

std::vector<LengthEer> EerVsLength(const EmbeddingNet &net,
                                   const TrialList &trials,
                                   const AudioSource &source,
                                   std::span<const double> lengths) {
  std::vector<LengthEer> rows;
  for (double len : lengths) {
    if (!(len > 0)) {
      throw Error(ErrorCode::kInvalidArgument, "lengths must be positive");
    }
    rows.push_back({len, RunVerification(net, trials, source, len).eer.eer});
  }
  return rows;
}

std::string TruncatedMegabytes(std::size_t bytes) {
  const std::size_t hundredths = bytes / 10000;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%zu.%02zu", hundredths / 100, hundredths % 100);
  return buf;
}

std::vector<MemoryRow> MemoryReport(std::span<const FeatureKind> kinds) {
  std::vector<MemoryRow> rows;
  for (FeatureKind k : kinds) {
    const std::size_t params =
        BlstmParamCount(FeatureDim(k), kHiddenUnits, kNumBlstmLayers);
    const std::size_t bytes = params * sizeof(float);
    rows.push_back({k, params, bytes, TruncatedMegabytes(bytes)});
  }
  return rows;
}

std::vector<std::vector<Embedding>> SegmentEmbeddings(const EmbeddingNet &net,
                                                      const Corpus &corpus,
                                                      double crop_len_s) {
  const std::size_t crop = SecondsToSamples(crop_len_s);
  if (crop < static_cast<std::size_t>(kFrameLength)) {
    throw Error(ErrorCode::kInvalidArgument, "crop shorter than one frame");
  }
  std::vector<std::vector<Embedding>> out(corpus.speakers.size());
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    for (const auto &utt : corpus.speakers[s].utterances) {
      if (utt.size() < static_cast<std::size_t>(kFrameLength)) continue;
      const AudioSegment active = VadFilter(utt);
      for (std::size_t off = 0; off + crop <= active.size(); off += crop) {
        out[s].push_back(EmbedActiveAudio(net, active.Slice(off, crop)));
      }
    }
  }
  return out;
}

HeatmapGrid IdentificationHeatmap(
    const std::vector<std::vector<Embedding>> &segments,
    std::span<const int> speakers_axis, std::span<const int> entries_axis,
    int queries_per_cell, std::uint64_t seed) {
  if (speakers_axis.empty() || entries_axis.empty() || queries_per_cell < 1) {
    throw Error(ErrorCode::kInvalidArgument, "empty heatmap axes or no queries");
  }
  const int max_n = *std::max_element(speakers_axis.begin(), speakers_axis.end());
  const int max_m = *std::max_element(entries_axis.begin(), entries_axis.end());
  if (*std::min_element(speakers_axis.begin(), speakers_axis.end()) < 1 ||
      *std::min_element(entries_axis.begin(), entries_axis.end()) < 1) {
    throw Error(ErrorCode::kInvalidArgument, "axis values must be positive");
  }
  if (static_cast<int>(segments.size()) < max_n) {
    throw Error(ErrorCode::kCorpusTooSmall,
                std::to_string(segments.size()) + " speakers, heatmap needs " +
                    std::to_string(max_n));
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (static_cast<int>(segments[s].size()) < max_m + queries_per_cell) {
      throw Error(ErrorCode::kCorpusTooSmall,
                  "speaker " + std::to_string(s) + " has " +
                      std::to_string(segments[s].size()) + " segments, needs " +
                      std::to_string(max_m + queries_per_cell));
    }
  }

  HeatmapGrid grid;
  grid.speakers_axis.assign(speakers_axis.begin(), speakers_axis.end());
  grid.entries_axis.assign(entries_axis.begin(), entries_axis.end());
  for (std::size_t i = 0; i < speakers_axis.size(); ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < entries_axis.size(); ++j) {
      const int n = speakers_axis[i];
      const int m = entries_axis[j];
      std::seed_seq seq{static_cast<std::uint32_t>(seed),
                        static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i),
                        static_cast<std::uint32_t>(j)};
      std::mt19937_64 rng(seq);

      std::vector<std::size_t> speakers(segments.size());
      std::iota(speakers.begin(), speakers.end(), 0);
      std::shuffle(speakers.begin(), speakers.end(), rng);
      speakers.resize(n);

      SpeakerDb db;
      std::vector<std::vector<std::size_t>> held_out(n);
      for (int k = 0; k < n; ++k) {
        const auto &segs = segments[speakers[k]];
        std::vector<std::size_t> order(segs.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const std::string name = "s" + std::to_string(speakers[k]);
        for (int e = 0; e < m; ++e) {
          db.Enroll(name, segs[order[e]], "1970-01-01T00:00:00Z");
        }
        held_out[k].assign(order.begin() + m, order.end());
      }

      int hits = 0;
      for (int q = 0; q < queries_per_cell; ++q) {
        const int k = q % n;
        const std::size_t seg = held_out[k][q / n];
        const auto result = Identify(segments[speakers[k]][seg], db);
        hits += result.speaker == "s" + std::to_string(speakers[k]);
      }
      row.push_back(static_cast<double>(hits) / queries_per_cell);
    }
    grid.accuracy.push_back(std::move(row));
  }
  return grid;
}

HeatmapGrid IdentificationHeatmap(const EmbeddingNet &net, const Corpus &corpus,
                                  std::span<const int> speakers_axis,
                                  std::span<const int> entries_axis,
                                  int queries_per_cell, std::uint64_t seed,
                                  double crop_len_s) {
  return IdentificationHeatmap(SegmentEmbeddings(net, corpus, crop_len_s),
                               speakers_axis, entries_axis, queries_per_cell,
                               seed);
}

void WriteLengthCsv(std::span<const LengthEer> rows, std::ostream &os) {
  os << "length,eer\n";
  for (const auto &r : rows) {
    os << std::fixed << std::setprecision(2) << r.length_s << ','
       << std::setprecision(6) << r.eer << '\n';
  }
  os << std::defaultfloat;
}

void WriteMemoryCsv(std::span<const MemoryRow> rows, std::ostream &os) {
  os << "kind,params,bytes,mb\n";
  for (const auto &r : rows) {
    os << FeatureKindName(r.kind) << ',' << r.params << ',' << r.bytes << ','
       << r.mb << '\n';
  }
}

void WriteHeatmapCsv(const HeatmapGrid &grid, std::ostream &os) {
  os << "speakers\\entries";
  for (int m : grid.entries_axis) os << ',' << m;
  os << '\n';
  for (std::size_t i = 0; i < grid.speakers_axis.size(); ++i) {
    os << grid.speakers_axis[i];
    for (double a : grid.accuracy[i]) {
      os << ',' << std::fixed << std::setprecision(4) << a;
    }
    os << '\n';
  }
  os << std::defaultfloat;
}

void WriteMemoryTable(std::span<const MemoryRow> rows, std::ostream &os) {
  os << "kind params bytes MB\n";
  for (const auto &r : rows) {
    os << FeatureKindName(r.kind) << ' ' << r.params << ' ' << r.bytes << ' '
       << r.mb << '\n';
  }
}

void WriteHeatmapTable(const HeatmapGrid &grid, std::ostream &os) {
  os << std::setw(10) << "n\\m";
  for (int m : grid.entries_axis) os << std::setw(8) << m;
  os << '\n';
  for (std::size_t i = 0; i < grid.speakers_axis.size(); ++i) {
    os << std::setw(10) << grid.speakers_axis[i];
    for (double a : grid.accuracy[i]) {
      os << std::setw(8) << std::fixed << std::setprecision(3) << a;
    }
    os << '\n';
  }
  os << std::defaultfloat;
}

}  // namespace blspk
