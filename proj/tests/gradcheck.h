// tests/gradcheck.h

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

#ifndef BLSPK_TESTS_GRADCHECK_H_
#define BLSPK_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "blspk/net/blstm.h"

namespace blspk::testing {

using MatD = MatrixT<double>;

inline BlstmNet<double> RandomNet(int input, int hidden, int layers, std::uint64_t seed,
                           double scale = 0.5) {
  BlstmNet<double> net(FeatureKind::kSpecdB, input, hidden, layers);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto t : net.Tensors()) {
    for (double &v : t) v = u(rng);
  }
  return net;
}

inline MatD RandomFrames(int t, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  MatD m(t, d);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
  }
  return m;
}

struct GradCheckStats {
  std::size_t total = 0;
  std::size_t within_tol = 0;
  double max_rel = 0;
};

// Central differences (step 1e-4) against BPTT for every parameter of a
// random classifier over a 4-frame, 2-dim input with 3 hidden units and
// 2 classes.
inline GradCheckStats CheckGradients(int layers, std::uint64_t seed) {
  Classifier<double> model;
  model.net = RandomNet(2, 3, layers, seed, 0.7);
  model.head = ClassifierHead<double>(2, 6);
  std::mt19937_64 rng(seed + 1000);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int r = 0; r < 2; ++r) {
    model.head.b[r] = u(rng);
    for (int c = 0; c < 6; ++c) model.head.w(r, c) = u(rng);
  }
  const MatD x = RandomFrames(4, 2, seed + 2000);
  const int label = static_cast<int>(seed % 2);

  Classifier<double> grads = model.ZerosLike();
  Backward(model, x, label, &grads);

  auto loss_at = [&](const Classifier<double> &m) {
    return CrossEntropy<double>(ClassifyForward(m.net, m.head, x), label).loss;
  };
  GradCheckStats stats;
  const auto analytic = std::as_const(grads).Tensors();
  const std::size_t n_tensors = analytic.size();
  for (std::size_t ti = 0; ti < n_tensors; ++ti) {
    for (std::size_t k = 0; k < analytic[ti].size(); ++k) {
      const double h = 1e-4;
      Classifier<double> plus = model, minus = model;
      plus.Tensors()[ti][k] += h;
      minus.Tensors()[ti][k] -= h;
      const double num = (loss_at(plus) - loss_at(minus)) / (2 * h);
      const double ana = analytic[ti][k];
      const double scale = std::max(std::abs(num), std::abs(ana));
      const double rel = scale < 1e-8 ? 0.0 : std::abs(num - ana) / scale;
      ++stats.total;
      stats.within_tol += rel <= 1e-4;
      stats.max_rel = std::max(stats.max_rel, rel);
    }
  }
  return stats;
}

}  // namespace blspk::testing

#endif  // BLSPK_TESTS_GRADCHECK_H_
