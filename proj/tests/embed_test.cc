// tests/embed_test.cc

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

#include <cmath>
#include <random>

#include "blspk/dsp/features.h"
#include "blspk/embed/embedding.h"
#include "blspk/eval/synth.h"
#include "test_util.h"

namespace blspk {
namespace {

using testing::AxisEmbedding;
using testing::RandomEmbedding;

const EmbeddingNet &RandomDeployedNet() {
  static const EmbeddingNet net = [] {
    EmbeddingNet n = EmbeddingNet::ForFeature(FeatureKind::kSpecdB);
    std::mt19937_64 rng(99);
    InitializeNet(&n, &rng);
    return n;
  }();
  return net;
}

Embedding WithSimilarity(double s, int other_axis) {
  std::vector<float> v(512, 0.0f);
  v[0] = static_cast<float>(s);
  v[other_axis] = static_cast<float>(std::sqrt(1 - s * s));
  return Embedding::FromRaw(Eigen::Map<VectorT<float>>(v.data(), 512));
}

TEST(EmbedAudioTest, UnitNormAtEveryCrop) {
  const AudioSegment utt = MakeSynthCorpus(2, 1, 3).corpus.speakers[0].utterances[0];
  for (double crop : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    const Embedding e = EmbedAudio(RandomDeployedNet(), utt, crop);
    EXPECT_EQ(e.dim(), 512u);
    EXPECT_NEAR(L2Norm(e.values()), 1.0, 1e-5) << crop;
    EXPECT_NEAR(e.source_len_s(), crop, 1e-9);
  }
}

TEST(EmbedAudioTest, Deterministic) {
  const AudioSegment utt = MakeSynthCorpus(2, 1, 4).corpus.speakers[1].utterances[0];
  EXPECT_EQ(EmbedAudio(RandomDeployedNet(), utt, 0.5),
            EmbedAudio(RandomDeployedNet(), utt, 0.5));
}

TEST(EmbedAudioTest, UsesLeadingCropOfActiveAudio) {
  const AudioSegment utt = MakeSynthCorpus(2, 1, 5).corpus.speakers[0].utterances[0];
  const AudioSegment active = VadFilter(utt);
  const Embedding direct =
      EmbedActiveAudio(RandomDeployedNet(), active.Head(SecondsToSamples(0.5)));
  EXPECT_EQ(EmbedAudio(RandomDeployedNet(), utt, 0.5), direct);
}

TEST(EmbedAudioTest, Errors) {
  const EmbeddingNet &net = RandomDeployedNet();
  EXPECT_BLSPK_ERROR(EmbedAudio(net, testing::SineSegment(300, 0.02), 0.5),
                     ErrorCode::kTooShort);
  EXPECT_BLSPK_ERROR(EmbedAudio(net, testing::SineSegment(300, 0.4), 0.5),
                     ErrorCode::kTooShort);
  EXPECT_BLSPK_ERROR(
      EmbedAudio(net, AudioSegment(std::vector<float>(16000, 0.0f)), 0.5),
      ErrorCode::kAllSilent);
  EXPECT_BLSPK_ERROR(EmbedAudio(net, testing::SineSegment(300, 1.0), 0.1),
                     ErrorCode::kInvalidArgument);
  EXPECT_BLSPK_ERROR(EmbedAudio(net, testing::SineSegment(300, 1.0), 5.0),
                     ErrorCode::kInvalidArgument);
  // A zero network has a zero raw embedding.
  const EmbeddingNet zero = EmbeddingNet::ForFeature(FeatureKind::kSpecdB);
  EXPECT_BLSPK_ERROR(EmbedAudio(zero, testing::SineSegment(300, 1.0), 0.5),
                     ErrorCode::kZeroEmbedding);
}

TEST(EmbeddingTest, Construction) {
  VectorT<float> raw(3);
  raw << 3, 0, 4;
  const Embedding e = Embedding::FromRaw(raw, 1.5);
  EXPECT_FLOAT_EQ(e.values()[0], 0.6f);
  EXPECT_FLOAT_EQ(e.values()[2], 0.8f);
  EXPECT_EQ(e.source_len_s(), 1.5);
  EXPECT_BLSPK_ERROR(Embedding::FromRaw(VectorT<float>::Zero(4)),
                     ErrorCode::kZeroEmbedding);
  EXPECT_BLSPK_ERROR(Embedding::FromUnitVector({0.5f, 0.5f}),
                     ErrorCode::kBadEmbedding);
  EXPECT_BLSPK_ERROR(Embedding::FromUnitVector({}), ErrorCode::kBadEmbedding);
  EXPECT_NO_THROW(Embedding::FromUnitVector({0.6f, 0.8f}));
}

TEST(EmbeddingTest, ScaleInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> g;
  std::uniform_real_distribution<float> scale(1e-3f, 1e3f);
  for (int trial = 0; trial < 50; ++trial) {
    VectorT<float> raw(512);
    for (int i = 0; i < 512; ++i) raw[i] = g(rng);
    const Embedding a = Embedding::FromRaw(raw);
    const Embedding b = Embedding::FromRaw(raw * scale(rng));
    for (std::size_t i = 0; i < 512; ++i) {
      EXPECT_NEAR(a.values()[i], b.values()[i], 1e-6);
    }
    const Embedding other = RandomEmbedding(&rng);
    EXPECT_NEAR(Similarity(a, other), Similarity(b, other), 1e-6);
    EXPECT_EQ(Verify(a, other).verdict, Verify(b, other).verdict);
  }
}

TEST(SimilarityTest, Examples) {
  std::mt19937_64 rng(4);
  const Embedding a = RandomEmbedding(&rng);
  EXPECT_NEAR(Similarity(a, a), 1.0, 1e-6);
  EXPECT_NEAR(Similarity(a, a.Negated()), -1.0, 1e-6);
  EXPECT_NEAR(Similarity(AxisEmbedding(0), AxisEmbedding(1)), 0.0, 1e-6);
  EXPECT_BLSPK_ERROR(Similarity(a, Embedding::FromUnitVector({1.0f})),
                     ErrorCode::kDimensionMismatch);
}

TEST(SimilarityTest, SymmetricAndBounded) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const Embedding a = RandomEmbedding(&rng);
    const Embedding b = trial % 3 ? RandomEmbedding(&rng) : a;
    EXPECT_EQ(Similarity(a, b), Similarity(b, a));
    EXPECT_LE(std::abs(Similarity(a, b)), 1.0);
    const double th = t(rng);
    EXPECT_EQ(Verify(a, b, th).verdict, Verify(b, a, th).verdict);
  }
}

TEST(VerifyTest, ThresholdRule) {
  const Embedding a = AxisEmbedding(0);
  const Verification pos = Verify(a, WithSimilarity(0.3, 1));
  EXPECT_NEAR(pos.score, 0.3, 1e-6);
  EXPECT_EQ(pos.verdict, Verdict::kSame);
  const Verification neg = Verify(a, WithSimilarity(-0.3, 1));
  EXPECT_EQ(neg.verdict, Verdict::kDifferent);
  const Verification zero = Verify(a, AxisEmbedding(7));
  EXPECT_EQ(zero.score, 0.0);
  EXPECT_EQ(zero.verdict, Verdict::kSame);
  EXPECT_EQ(Verify(a, WithSimilarity(0.3, 1), 0.5).verdict, Verdict::kDifferent);
}

}  // namespace
}  // namespace blspk
