// include/blspk/embed/embedding.h

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

#ifndef BLSPK_EMBED_EMBEDDING_H_
#define BLSPK_EMBED_EMBEDDING_H_

#include <vector>

#include "blspk/dsp/audio.h"
#include "blspk/net/blstm.h"

namespace blspk {

// Unit-norm speaker vector.
class Embedding {
 public:
  Embedding() = default;

  // Normalizes `raw`. Throws kZeroEmbedding if its norm is below 1e-12.
  static Embedding FromRaw(const VectorT<float> &raw, double source_len_s = 0);

  // Accepts an already normalized vector; throws kBadEmbedding unless the
  // norm is 1 within 1e-5.
  static Embedding FromUnitVector(std::vector<float> values,
                                  double source_len_s = 0);

  const std::vector<float> &values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double source_len_s() const { return source_len_s_; }

  Embedding Negated() const;

  bool operator==(const Embedding &o) const { return values_ == o.values_; }

 private:
  std::vector<float> values_;
  double source_len_s_ = 0;
};

inline constexpr double kUnitNormTolerance = 1e-5;

double L2Norm(const std::vector<float> &v);

// VAD, leading crop of crop_len_s, network features, BLSTM, L2
// normalization. Throws kTooShort when less than
// max(crop_len_s, 32 ms) of voice-active audio remains, kAllSilent for
// silent input and kInvalidArgument for crops outside [0.25, 4.0] s.
Embedding EmbedAudio(const EmbeddingNet &net, const AudioSegment &seg,
                     double crop_len_s);

// Features, BLSTM and normalization on audio that is already voice-active
// and cropped (no VAD, no crop).
Embedding EmbedActiveAudio(const EmbeddingNet &net, const AudioSegment &active);

// Inner product, clamped to [-1, 1].
double Similarity(const Embedding &a, const Embedding &b);

enum class Verdict { kSame, kDifferent };

struct Verification {
  Verdict verdict = Verdict::kDifferent;
  double score = 0;
};

// Same iff similarity >= threshold.
Verification Verify(const Embedding &a, const Embedding &b,
                    double threshold = 0.0);

}  // namespace blspk

#endif  // BLSPK_EMBED_EMBEDDING_H_
