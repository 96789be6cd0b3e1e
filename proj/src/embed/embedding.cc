// src/embed/embedding.cc

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

#include "blspk/embed/embedding.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "blspk/dsp/features.h"
#include "blspk/error.h"

namespace blspk {

double L2Norm(const std::vector<float> &v) {
  double sum = 0;
  for (float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

Embedding Embedding::FromRaw(const VectorT<float> &raw, double source_len_s) {
  double sum = 0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    sum += static_cast<double>(raw[i]) * raw[i];
  }
  const double norm = std::sqrt(sum);
  if (!(norm >= 1e-12) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kZeroEmbedding, "raw embedding has zero norm");
  }
  Embedding e;
  e.values_.resize(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    e.values_[i] = static_cast<float>(raw[i] / norm);
  }
  e.source_len_s_ = source_len_s;
  return e;
}

Embedding Embedding::FromUnitVector(std::vector<float> values,
                                    double source_len_s) {
  const double norm = L2Norm(values);
  if (values.empty() || !(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
    throw Error(ErrorCode::kBadEmbedding,
                "embedding norm " + std::to_string(norm) + " is not 1");
  }
  Embedding e;
  e.values_ = std::move(values);
  e.source_len_s_ = source_len_s;
  return e;
}

Embedding Embedding::Negated() const {
  Embedding e = *this;
  for (float &x : e.values_) x = -x;
  return e;
}

Embedding EmbedAudio(const EmbeddingNet &net, const AudioSegment &seg,
                     double crop_len_s) {
  if (!(crop_len_s >= 0.25 && crop_len_s <= 4.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "crop length " + std::to_string(crop_len_s) +
                    " s outside [0.25, 4.0]");
  }
  if (seg.size() < static_cast<std::size_t>(kFrameLength)) {
    throw Error(ErrorCode::kTooShort, "audio shorter than one 32 ms frame");
  }
  const AudioSegment active = VadFilter(seg);
  const std::size_t crop = SecondsToSamples(crop_len_s);
  const std::size_t need = std::max<std::size_t>(crop, kFrameLength);
  if (active.size() < need) {
    throw Error(ErrorCode::kTooShort,
                std::to_string(active.duration_s()) +
                    " s of voice-active audio, need " +
                    std::to_string(static_cast<double>(need) / kSampleRate));
  }
  return EmbedActiveAudio(net, active.Head(crop));
}

Embedding EmbedActiveAudio(const EmbeddingNet &net, const AudioSegment &active) {
  const FeatureMatrix feats = NetInputFeatures(active, net.feature_kind());
  return Embedding::FromRaw(BlstmForward(net, feats), active.duration_s());
}

double Similarity(const Embedding &a, const Embedding &b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding sizes differ");
  }
  double dot = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += static_cast<double>(a.values()[i]) * b.values()[i];
  }
  return std::clamp(dot, -1.0, 1.0);
}

Verification Verify(const Embedding &a, const Embedding &b, double threshold) {
  Verification v;
  v.score = Similarity(a, b);
  v.verdict = v.score >= threshold ? Verdict::kSame : Verdict::kDifferent;
  return v;
}

}  // namespace blspk
