// include/blspk/net/adam.h

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

#ifndef BLSPK_NET_ADAM_H_
#define BLSPK_NET_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

namespace blspk {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moment estimates, one buffer per parameter tensor.
template <typename Scalar>
struct AdamState {
  std::int64_t step = 0;
  std::vector<std::vector<Scalar>> m;
  std::vector<std::vector<Scalar>> v;
};

// One bias-corrected Adam update. The state is sized lazily on the first
// call; afterwards every tensor must keep its size (kShapeMismatch).
template <typename Scalar>
void AdamStep(std::span<const std::span<Scalar>> params,
              std::span<const std::span<const Scalar>> grads,
              AdamState<Scalar> *state, const AdamConfig &cfg);

}  // namespace blspk

#endif  // BLSPK_NET_ADAM_H_
