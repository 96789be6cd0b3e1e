// include/blspk/eval/eer.h

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

#ifndef BLSPK_EVAL_EER_H_
#define BLSPK_EVAL_EER_H_

#include <span>

namespace blspk {

struct EerResult {
  double eer = 0;        // in [0, 1], never clipped
  double threshold = 0;  // score at which FAR = FRR
};

// labels[i] is 1 for a same-speaker trial and 0 otherwise.
//
// Thresholds sweep every distinct score plus -inf and +inf with
// FAR(t) = P(score >= t | different) and FRR(t) = P(score < t | same).
// The EER is read where FAR - FRR changes sign, interpolating linearly
// between the two bracketing sweep points. Throws kOneClassOnly unless
// both labels occur, kInvalidArgument on size mismatch or other labels.
EerResult ComputeEer(std::span<const double> scores, std::span<const int> labels);

}  // namespace blspk

#endif  // BLSPK_EVAL_EER_H_
