// src/net/adam.cc

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

#include "blspk/net/adam.h"

#include <cmath>
#include <string>

#include "blspk/error.h"

namespace blspk {

template <typename Scalar>
void AdamStep(std::span<const std::span<Scalar>> params,
              std::span<const std::span<const Scalar>> grads,
              AdamState<Scalar> *state, const AdamConfig &cfg) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(params.size()) + " parameter tensors but " +
                    std::to_string(grads.size()) + " gradients");
  }
  if (state->m.empty()) {
    state->m.resize(params.size());
    state->v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state->m[i].assign(params[i].size(), Scalar(0));
      state->v[i].assign(params[i].size(), Scalar(0));
    }
  }
  if (state->m.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state tensor count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size() ||
        state->m[i].size() != params[i].size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor " + std::to_string(i) + " size differs");
    }
  }

  state->step += 1;
  const double t = static_cast<double>(state->step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  const Scalar b1 = static_cast<Scalar>(cfg.beta1);
  const Scalar b2 = static_cast<Scalar>(cfg.beta2);
  const Scalar step_size = static_cast<Scalar>(cfg.learning_rate / correction1);
  const Scalar inv_sqrt_c2 = static_cast<Scalar>(1.0 / std::sqrt(correction2));
  const Scalar eps = static_cast<Scalar>(cfg.epsilon);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Scalar *p = params[i].data();
    const Scalar *g = grads[i].data();
    Scalar *m = state->m[i].data();
    Scalar *v = state->v[i].data();
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      m[j] = b1 * m[j] + (Scalar(1) - b1) * g[j];
      v[j] = b2 * v[j] + (Scalar(1) - b2) * g[j] * g[j];
      p[j] -= step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
    }
  }
}

template void AdamStep<float>(std::span<const std::span<float>>,
                              std::span<const std::span<const float>>,
                              AdamState<float> *, const AdamConfig &);
template void AdamStep<double>(std::span<const std::span<double>>,
                               std::span<const std::span<const double>>,
                               AdamState<double> *, const AdamConfig &);

}  // namespace blspk
