// src/eval/trials.cc

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

#include "blspk/eval/trials.h"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "blspk/error.h"

namespace blspk {

TrialList ParseTrials(std::istream &is) {
  TrialList trials;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string label, a, b, extra;
    if (!(ls >> label >> a >> b) || (ls >> extra) ||
        (label != "0" && label != "1")) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) + ": '" + line + "'");
    }
    trials.push_back({label == "1", a, b});
  }
  return trials;
}

TrialList LoadTrials(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return ParseTrials(is);
}

void WriteTrials(const TrialList &trials, std::ostream &os) {
  for (const auto &t : trials) {
    os << (t.same ? 1 : 0) << ' ' << t.path_a << ' ' << t.path_b << '\n';
  }
}

TrialCounts CountTrials(const TrialList &trials) {
  TrialCounts c;
  for (const auto &t : trials) (t.same ? c.same : c.different) += 1;
  return c;
}

std::string UtteranceKey(const SpeakerAudio &speaker, std::size_t index) {
  char suffix[32];
  std::snprintf(suffix, sizeof(suffix), "_%03zu.wav", index);
  return speaker.name + "/" + speaker.name + suffix;
}

TrialList MakeBalancedTrials(const Corpus &corpus, int n_pairs,
                             std::uint64_t seed, std::size_t first_utt) {
  if (n_pairs < 2 || n_pairs % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "pair count must be even and >= 2");
  }
  std::vector<std::size_t> multi;  // speakers with two or more utterances
  std::vector<std::size_t> any;
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    const std::size_t n = corpus.speakers[s].utterances.size();
    if (n > first_utt) any.push_back(s);
    if (n > first_utt + 1) multi.push_back(s);
  }
  if (multi.empty() || any.size() < 2) {
    throw Error(ErrorCode::kCorpusTooSmall, "not enough utterances for pairs");
  }

  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  std::set<Key> seen;
  constexpr int kMaxAttempts = 1000;

  TrialList trials;
  for (int i = 0; i < n_pairs / 2; ++i) {
    for (int want_same = 1; want_same >= 0; --want_same) {
      Key key;
      for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::size_t sa, sb, ua, ub;
        if (want_same) {
          sa = sb = multi[pick(0, multi.size() - 1)];
          const std::size_t n = corpus.speakers[sa].utterances.size();
          ua = pick(first_utt, n - 1);
          ub = pick(first_utt, n - 2);
          if (ub >= ua) ++ub;
        } else {
          const std::size_t ia = pick(0, any.size() - 1);
          std::size_t ib = pick(0, any.size() - 2);
          if (ib >= ia) ++ib;
          sa = any[ia];
          sb = any[ib];
          ua = pick(first_utt, corpus.speakers[sa].utterances.size() - 1);
          ub = pick(first_utt, corpus.speakers[sb].utterances.size() - 1);
        }
        key = {sa, ua, sb, ub};
        if (seen.insert(key).second) break;
      }
      const auto [sa, ua, sb, ub] = key;
      trials.push_back({want_same == 1, UtteranceKey(corpus.speakers[sa], ua),
                        UtteranceKey(corpus.speakers[sb], ub)});
    }
  }
  return trials;
}

}  // namespace blspk
