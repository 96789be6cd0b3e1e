// tests/eval_test.cc

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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "blspk/dsp/features.h"
#include "blspk/eval/eer.h"
#include "blspk/eval/harness.h"
#include "blspk/eval/synth.h"
#include "blspk/eval/trials.h"
#include "blspk/net/trainer.h"
#include "oracles.h"
#include "test_util.h"

namespace blspk {
namespace {

using testing::BruteForceEer;

EerResult Eer(const std::vector<double> &same, const std::vector<double> &diff) {
  std::vector<double> scores = same;
  scores.insert(scores.end(), diff.begin(), diff.end());
  std::vector<int> labels(same.size(), 1);
  labels.resize(scores.size(), 0);
  return ComputeEer(scores, labels);
}

TEST(EerTest, HandCases) {
  EXPECT_EQ(Eer({0.9, 0.8}, {0.2, 0.1}).eer, 0.0);
  EXPECT_NEAR(Eer({0.8, 0.2}, {0.7, 0.1}).eer, 0.5, 1e-12);
  // Fully inverted scores cross at the top.
  EXPECT_EQ(Eer({0.1}, {0.9}).eer, 1.0);
  // All scores tied.
  EXPECT_NEAR(Eer({0.3, 0.3}, {0.3}).eer, 0.5, 1e-12);
}

TEST(EerTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 199);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    const bool coarse = trial % 3 == 0;  // many ties
    std::normal_distribution<double> g;
    for (int i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng() % 2);
      const double s = g(rng) + 0.7 * labels[i];
      scores[i] = coarse ? std::round(s * 4) / 4 : s;
    }
    labels[0] = 0;
    labels[1] = 1;
    EXPECT_NEAR(ComputeEer(scores, labels).eer, BruteForceEer(scores, labels), 1e-9)
        << "trial " << trial;
  }
}

TEST(EerTest, NegationSymmetryAndRange) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + trial;
    std::vector<double> s(n), neg(n);
    std::vector<int> l(n), flip(n);
    for (int i = 0; i < n; ++i) {
      l[i] = i % 2;
      s[i] = g(rng) + 0.5 * l[i];
      neg[i] = -s[i];
      flip[i] = 1 - l[i];
    }
    const double eer = ComputeEer(s, l).eer;
    EXPECT_GE(eer, 0.0);
    EXPECT_LE(eer, 1.0);
    EXPECT_NEAR(eer, ComputeEer(neg, flip).eer, 1e-12);
  }
}

TEST(EerTest, Errors) {
  const std::vector<double> s = {0.1, 0.2};
  EXPECT_BLSPK_ERROR(ComputeEer(s, std::vector<int>{1, 1}), ErrorCode::kOneClassOnly);
  EXPECT_BLSPK_ERROR(ComputeEer(s, std::vector<int>{0, 0}), ErrorCode::kOneClassOnly);
  EXPECT_BLSPK_ERROR(ComputeEer(s, std::vector<int>{1}), ErrorCode::kInvalidArgument);
  EXPECT_BLSPK_ERROR(ComputeEer(s, std::vector<int>{1, 2}), ErrorCode::kInvalidArgument);
}

TEST(TrialsTest, ParseAndWrite) {
  std::istringstream in("1 a.wav b.wav\n\n0 x.wav y.wav\r\n");
  const TrialList t = ParseTrials(in);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], (Trial{true, "a.wav", "b.wav"}));
  EXPECT_EQ(t[1], (Trial{false, "x.wav", "y.wav"}));
  std::ostringstream out;
  WriteTrials(t, out);
  EXPECT_EQ(out.str(), "1 a.wav b.wav\n0 x.wav y.wav\n");
  EXPECT_EQ(CountTrials(t).same, 1u);
  EXPECT_EQ(CountTrials(t).different, 1u);
}

TEST(TrialsTest, MalformedLineReportsLineNumber) {
  for (const char *bad : {"2 a b", "1 a", "1 a b c", "x a b"}) {
    std::istringstream in(std::string("1 ok.wav ok2.wav\n") + bad + "\n");
    try {
      ParseTrials(in);
      ADD_FAILURE() << bad;
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedLine);
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
  }
}

TEST(TrialsTest, BalancedGenerator) {
  const Corpus corpus = MakeSynthCorpus(4, 5, 2).corpus;
  for (int pairs : {2, 20, 60}) {
    const TrialList t = MakeBalancedTrials(corpus, pairs, 9, 2);
    ASSERT_EQ(t.size(), static_cast<std::size_t>(pairs));
    EXPECT_EQ(CountTrials(t).same, CountTrials(t).different);
    for (const auto &trial : t) {
      const std::string spk_a = trial.path_a.substr(0, trial.path_a.find('/'));
      const std::string spk_b = trial.path_b.substr(0, trial.path_b.find('/'));
      EXPECT_EQ(trial.same, spk_a == spk_b);
      EXPECT_NE(trial.path_a, trial.path_b);
      // Only utterances at index 2 and later are used.
      const int idx_a = std::stoi(trial.path_a.substr(trial.path_a.size() - 7, 3));
      EXPECT_GE(idx_a, 2);
    }
  }
  EXPECT_EQ(MakeBalancedTrials(corpus, 20, 9), MakeBalancedTrials(corpus, 20, 9));
  EXPECT_BLSPK_ERROR(MakeBalancedTrials(corpus, 3, 1), ErrorCode::kInvalidArgument);
  EXPECT_BLSPK_ERROR(MakeBalancedTrials(corpus, 4, 1, 5), ErrorCode::kCorpusTooSmall);
}

TEST(SynthTest, DeterministicAndLongEnough) {
  const SynthCorpus a = MakeSynthCorpus(3, 4, 77);
  const SynthCorpus b = MakeSynthCorpus(3, 4, 77);
  const SynthCorpus c = MakeSynthCorpus(3, 4, 78);
  ASSERT_EQ(a.corpus.speakers.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    ASSERT_EQ(a.corpus.speakers[s].utterances.size(), 4u);
    for (std::size_t u = 0; u < 4; ++u) {
      const auto &x = a.corpus.speakers[s].utterances[u];
      EXPECT_EQ(x.samples(), b.corpus.speakers[s].utterances[u].samples());
      EXPECT_NE(x.samples(), c.corpus.speakers[s].utterances[u].samples());
      EXPECT_GE(x.duration_s(), kMinSynthUtteranceS);
      for (float v : x.samples()) {
        ASSERT_LE(std::abs(v), 1.0f);
      }
    }
  }
}

TEST(SynthTest, SpeakersAreSpectrallyDistinct) {
  const Corpus corpus = MakeSynthCorpus(6, 5, 11).corpus;
  std::vector<std::vector<Eigen::VectorXd>> means(corpus.speakers.size());
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    for (const auto &utt : corpus.speakers[s].utterances) {
      const FeatureMatrix f = FeatureExtract(utt, FeatureKind::kSpecdB);
      means[s].push_back(f.frames.colwise().mean().transpose().cast<double>());
    }
  }
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (std::size_t s = 0; s < means.size(); ++s) {
    for (std::size_t t = s; t < means.size(); ++t) {
      for (std::size_t i = 0; i < means[s].size(); ++i) {
        for (std::size_t j = 0; j < means[t].size(); ++j) {
          if (s == t && j <= i) continue;
          const double d = (means[s][i] - means[t][j]).norm();
          if (s == t) {
            intra += d;
            ++n_intra;
          } else {
            inter += d;
            ++n_inter;
          }
        }
      }
    }
  }
  EXPECT_GT(inter / n_inter, intra / n_intra);
}

// Speaker k's segments point mostly along axis k.
std::vector<std::vector<Embedding>> ClusteredSegments(int speakers, int per,
                                                      double noise,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  std::vector<std::vector<Embedding>> out(speakers);
  for (int s = 0; s < speakers; ++s) {
    for (int i = 0; i < per; ++i) {
      VectorT<float> v(512);
      for (int k = 0; k < 512; ++k) v[k] = static_cast<float>(noise) * g(rng);
      v[s] += 1.0f;
      out[s].push_back(Embedding::FromRaw(v));
    }
  }
  return out;
}

TEST(HeatmapTest, ShapeRangeAndDeterminism) {
  const auto segs = ClusteredSegments(6, 12, 0.08, 5);
  const std::vector<int> n_axis = {1, 3, 6};
  const std::vector<int> m_axis = {1, 2, 5};
  const HeatmapGrid g = IdentificationHeatmap(segs, n_axis, m_axis, 7, 42);
  ASSERT_EQ(g.accuracy.size(), 3u);
  for (const auto &row : g.accuracy) {
    ASSERT_EQ(row.size(), 3u);
    for (double a : row) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
  EXPECT_EQ(g.speakers_axis, n_axis);
  EXPECT_EQ(g.entries_axis, m_axis);
  const HeatmapGrid again = IdentificationHeatmap(segs, n_axis, m_axis, 7, 42);
  EXPECT_EQ(g.accuracy, again.accuracy);
}

TEST(HeatmapTest, SeparableClustersAreAlwaysIdentified) {
  const auto segs = ClusteredSegments(5, 10, 0.01, 8);
  const std::vector<int> n_axis = {1, 2, 5};
  const std::vector<int> m_axis = {1, 5};
  const HeatmapGrid g = IdentificationHeatmap(segs, n_axis, m_axis, 5, 1);
  for (const auto &row : g.accuracy) {
    for (double a : row) EXPECT_EQ(a, 1.0);
  }
}

TEST(HeatmapTest, SingleSpeakerCellAcceptsZeroScores) {
  // Mutually orthogonal segments: every query scores exactly 0 against the
  // sole enrolled speaker, which the decision rule still accepts.
  std::vector<std::vector<Embedding>> segs(1);
  for (int i = 0; i < 10; ++i) segs[0].push_back(testing::AxisEmbedding(i));
  const std::vector<int> n_axis = {1};
  const std::vector<int> m_axis = {1};
  EXPECT_EQ(IdentificationHeatmap(segs, n_axis, m_axis, 8, 3).accuracy[0][0], 1.0);
}

TEST(HeatmapTest, Errors) {
  const auto segs = ClusteredSegments(3, 6, 0.1, 1);
  const std::vector<int> too_many = {4};
  const std::vector<int> m = {1};
  EXPECT_BLSPK_ERROR(IdentificationHeatmap(segs, too_many, m, 1, 0),
                     ErrorCode::kCorpusTooSmall);
  const std::vector<int> n = {2};
  const std::vector<int> big_m = {5};
  EXPECT_BLSPK_ERROR(IdentificationHeatmap(segs, n, big_m, 2, 0),
                     ErrorCode::kCorpusTooSmall);
  EXPECT_BLSPK_ERROR(IdentificationHeatmap(segs, n, m, 0, 0),
                     ErrorCode::kInvalidArgument);
  const std::vector<int> zero = {0};
  EXPECT_BLSPK_ERROR(IdentificationHeatmap(segs, zero, m, 1, 0),
                     ErrorCode::kInvalidArgument);
}

TEST(MemoryReportTest, ReferenceFigures) {
  const std::vector<FeatureKind> kinds = {
      FeatureKind::kSpecMag, FeatureKind::kSpecdB,     FeatureKind::kSpec,
      FeatureKind::kEmphSpec, FeatureKind::kEmphSpecdB, FeatureKind::kMfcc};
  const auto rows = MemoryReport(kinds);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto &r : rows) {
    EXPECT_EQ(r.bytes, 4 * r.params);
    EXPECT_EQ(r.mb, r.kind == FeatureKind::kMfcc ? "15.03" : "16.80");
  }
  EXPECT_EQ(rows[1].params, 4202496u);
  EXPECT_EQ(rows[5].params, 3758080u);

  EXPECT_EQ(TruncatedMegabytes(16809984), "16.80");
  EXPECT_EQ(TruncatedMegabytes(15032320), "15.03");
  EXPECT_EQ(TruncatedMegabytes(1999999), "1.99");
  EXPECT_EQ(TruncatedMegabytes(0), "0.00");
}

TEST(WritersTest, CsvAndTables) {
  const std::vector<LengthEer> lengths = {{0.5, 0.125}, {2.0, 0.0625}};
  std::ostringstream len;
  WriteLengthCsv(lengths, len);
  EXPECT_EQ(len.str(), "length,eer\n0.50,0.125000\n2.00,0.062500\n");

  const std::vector<FeatureKind> kinds = {FeatureKind::kSpecdB};
  std::ostringstream mem_csv, mem_table;
  WriteMemoryCsv(MemoryReport(kinds), mem_csv);
  WriteMemoryTable(MemoryReport(kinds), mem_table);
  EXPECT_EQ(mem_csv.str(), "kind,params,bytes,mb\nSpecdB,4202496,16809984,16.80\n");
  EXPECT_NE(mem_table.str().find("SpecdB 4202496 16809984 16.80"), std::string::npos);

  HeatmapGrid g;
  g.speakers_axis = {1, 2};
  g.entries_axis = {1, 3};
  g.accuracy = {{1.0, 0.5}, {0.25, 0.0}};
  std::ostringstream hm;
  WriteHeatmapCsv(g, hm);
  EXPECT_EQ(hm.str(), "speakers\\entries,1,3\n1,1.0000,0.5000\n2,0.2500,0.0000\n");
  std::ostringstream table;
  WriteHeatmapTable(g, table);
  EXPECT_NE(table.str().find("0.250"), std::string::npos);
}

TEST(VerificationTest, IdenticalSamePairsScoreOne) {
  const Corpus corpus = MakeSynthCorpus(3, 3, 4).corpus;
  EmbeddingNet net = EmbeddingNet(FeatureKind::kSpecdB, FeatureDim(FeatureKind::kSpecdB), 16, 1);
  std::mt19937_64 rng(1);
  InitializeNet(&net, &rng);
  TrialList trials;
  for (const auto &spk : corpus.speakers) {
    trials.push_back({true, UtteranceKey(spk, 0), UtteranceKey(spk, 0)});
  }
  trials.push_back({false, UtteranceKey(corpus.speakers[0], 1),
                    UtteranceKey(corpus.speakers[1], 1)});
  const auto source = CorpusAudioSource(corpus);
  const VerificationReport r = RunVerification(net, trials, source, 0.5);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.scores[i], 1.0, 1e-6);
  if (r.scores[3] < 1.0 - 1e-6) {
    EXPECT_EQ(r.eer.eer, 0.0);
  }
  const VerificationReport again = RunVerification(net, trials, source, 0.5);
  EXPECT_EQ(r.scores, again.scores);

  const std::vector<double> one = {0.5};
  const auto rows = EerVsLength(net, trials, source, one);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].eer, r.eer.eer);

  trials.push_back({true, "nobody/x.wav", "nobody/y.wav"});
  try {
    RunVerification(net, trials, source, 0.5);
    ADD_FAILURE();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
    EXPECT_NE(std::string(e.what()).find("trial 4"), std::string::npos);
  }
}

// End-to-end toy run: a small network trained on utterances 0..5 of five
// synthetic voices, evaluated on pairs drawn from utterances 6..9.
TEST(ToyRunTest, TrainedNetBeatsChanceAndLongerCropsDoNotHurt) {
  const Corpus corpus = MakeSynthCorpus(5, 10, 12).corpus;
  Corpus train;
  for (const auto &s : corpus.speakers) {
    train.speakers.push_back({s.name, {s.utterances.begin(), s.utterances.begin() + 6}});
  }
  TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 8;
  cfg.hidden = 32;
  cfg.num_layers = 1;
  cfg.segment_len_s = 0.5;
  cfg.examples_per_epoch = 40;
  cfg.epochs = 30;
  cfg.validation_size = 0;
  cfg.rng_seed = 4;
  const EmbeddingNet net = Train(train, cfg).model.net;

  const TrialList trials = MakeBalancedTrials(corpus, 200, 3, 6);
  const auto source = CorpusAudioSource(corpus);
  const VerificationReport r = RunVerification(net, trials, source, 0.5);
  EXPECT_LT(r.eer.eer, 0.5);

  const std::vector<double> lengths = {0.25, 2.0};
  const auto rows = EerVsLength(net, trials, source, lengths);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LE(rows[1].eer, rows[0].eer + 0.05)
      << "0.25 s: " << rows[0].eer << " 2.0 s: " << rows[1].eer;
}

}  // namespace
}  // namespace blspk
