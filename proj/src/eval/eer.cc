// src/eval/eer.cc

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

#include "blspk/eval/eer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "blspk/error.h"

namespace blspk {

EerResult ComputeEer(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "scores and labels differ in size");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw Error(ErrorCode::kInvalidArgument, "NaN score");
  }
  std::size_t n_same = 0;
  std::size_t n_diff = 0;
  for (int l : labels) {
    if (l == 1) {
      ++n_same;
    } else if (l == 0) {
      ++n_diff;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    }
  }
  if (n_same == 0 || n_diff == 0) {
    throw Error(ErrorCode::kOneClassOnly,
                "EER needs both same-speaker and different-speaker trials");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  struct Point {
    double t, far, frr;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Point> sweep;
  sweep.push_back({-inf, 1.0, 0.0});
  // Walking upward, every score strictly below t has already been passed.
  std::size_t same_below = 0;
  std::size_t diff_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = scores[order[i]];
    sweep.push_back({t, static_cast<double>(n_diff - diff_below) / n_diff,
                     static_cast<double>(same_below) / n_same});
    while (i < order.size() && scores[order[i]] == t) {
      (labels[order[i]] == 1 ? same_below : diff_below) += 1;
      ++i;
    }
  }
  sweep.push_back({inf, 0.0, 1.0});

  for (std::size_t k = 0; k + 1 < sweep.size(); ++k) {
    const Point &a = sweep[k];
    const Point &b = sweep[k + 1];
    const double da = a.far - a.frr;
    const double db = b.far - b.frr;
    if (da == 0.0) return {a.far, a.t};
    if (db == 0.0) return {b.far, b.t};
    if ((da > 0) != (db > 0)) {
      const double alpha = da / (da - db);
      const double eer = a.far + alpha * (b.far - a.far);
      double threshold;
      if (std::isinf(a.t)) {
        threshold = b.t;
      } else if (std::isinf(b.t)) {
        threshold = a.t;
      } else {
        threshold = a.t + alpha * (b.t - a.t);
      }
      return {eer, threshold};
    }
  }
  // FAR - FRR goes from +1 to -1, so a crossing always exists.
  throw Error(ErrorCode::kInvalidArgument, "no FAR/FRR crossing");
}

}  // namespace blspk
