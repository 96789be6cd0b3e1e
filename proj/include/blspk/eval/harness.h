// include/blspk/eval/harness.h

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

#ifndef BLSPK_EVAL_HARNESS_H_
#define BLSPK_EVAL_HARNESS_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "blspk/embed/embedding.h"
#include "blspk/eval/eer.h"
#include "blspk/eval/synth.h"
#include "blspk/eval/trials.h"

namespace blspk {

// Resolves a trial path to audio (a file loader, or a lookup into an
// in-memory corpus).
using AudioSource = std::function<AudioSegment(const std::string &path)>;

AudioSource FileAudioSource(const std::filesystem::path &base_dir);
// Keys are UtteranceKey(speaker, index).
AudioSource CorpusAudioSource(const Corpus &corpus);

struct VerificationReport {
  std::vector<double> scores;
  std::vector<int> labels;
  EerResult eer;
  double accuracy_at_zero = 0;  // fraction decided correctly at threshold 0
};

// Embeds both sides of every trial with EmbedAudio at crop_len_s (each
// distinct path once) and scores them by inner product. Failures are
// rethrown with the failing trial index prepended.
VerificationReport RunVerification(const EmbeddingNet &net,
                                   const TrialList &trials,
                                   const AudioSource &source, double crop_len_s);

struct LengthEer {
  double length_s = 0;
  double eer = 0;
};

std::vector<LengthEer> EerVsLength(const EmbeddingNet &net,
                                   const TrialList &trials,
                                   const AudioSource &source,
                                   std::span<const double> lengths);

struct MemoryRow {
  FeatureKind kind;
  std::size_t params = 0;
  std::size_t bytes = 0;
  std::string mb;  // decimal megabytes truncated to two places
};

// Deployed topology for each kind; the classifier head is not counted.
std::vector<MemoryRow> MemoryReport(std::span<const FeatureKind> kinds);

// "16809984" -> "16.80": bytes / 1e6, truncated (not rounded).
std::string TruncatedMegabytes(std::size_t bytes);

struct HeatmapGrid {
  std::vector<int> speakers_axis;
  std::vector<int> entries_axis;
  std::vector<std::vector<double>> accuracy;  // [speakers][entries]
};

// Disjoint crop_len_s windows of each utterance's voice-active audio,
// embedded without a second VAD pass. Indexed [speaker][segment].
std::vector<std::vector<Embedding>> SegmentEmbeddings(const EmbeddingNet &net,
                                                      const Corpus &corpus,
                                                      double crop_len_s);

// For each cell (n, m): draw n speakers and, per speaker, m enrollment
// segments plus held-out query segments, all without replacement;
// queries_per_cell queries are spread round-robin over the n speakers and
// the cell holds the top-1 accuracy of Identify. Cells use independent
// seeded streams. Throws kCorpusTooSmall if a speaker has fewer than
// max(entries) + queries_per_cell segments or the corpus has fewer than
// max(speakers) speakers.
HeatmapGrid IdentificationHeatmap(
    const std::vector<std::vector<Embedding>> &segments,
    std::span<const int> speakers_axis, std::span<const int> entries_axis,
    int queries_per_cell, std::uint64_t seed);

HeatmapGrid IdentificationHeatmap(const EmbeddingNet &net, const Corpus &corpus,
                                  std::span<const int> speakers_axis,
                                  std::span<const int> entries_axis,
                                  int queries_per_cell, std::uint64_t seed,
                                  double crop_len_s);

// Comma-separated outputs.
void WriteLengthCsv(std::span<const LengthEer> rows, std::ostream &os);
void WriteMemoryCsv(std::span<const MemoryRow> rows, std::ostream &os);
void WriteHeatmapCsv(const HeatmapGrid &grid, std::ostream &os);

// Aligned text tables.
void WriteMemoryTable(std::span<const MemoryRow> rows, std::ostream &os);
void WriteHeatmapTable(const HeatmapGrid &grid, std::ostream &os);

}  // namespace blspk

#endif  // BLSPK_EVAL_HARNESS_H_
