// src/dsp/features.cc

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

#include "blspk/dsp/features.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>

#include "blspk/error.h"

namespace blspk {

namespace {

struct FftwDeleter {
  void operator()(void *p) const { fftw_free(p); }
};

// Plans are created once; fftw_execute_dft_r2c on fresh buffers is
// thread-safe.
fftw_plan RealDftPlan() {
  static const fftw_plan plan = [] {
    std::unique_ptr<double, FftwDeleter> in(
        static_cast<double *>(fftw_malloc(sizeof(double) * kFrameLength)));
    std::unique_ptr<fftw_complex, FftwDeleter> out(static_cast<fftw_complex *>(
        fftw_malloc(sizeof(fftw_complex) * kNumBins)));
    return fftw_plan_dft_r2c_1d(kFrameLength, in.get(), out.get(),
                                FFTW_ESTIMATE);
  }();
  return plan;
}

void RequireFrames(const AudioSegment &seg, const char *what) {
  if (seg.size() < static_cast<std::size_t>(kFrameLength)) {
    throw Error(ErrorCode::kTooShort,
                std::string(what) + " needs at least 512 samples, got " +
                    std::to_string(seg.size()));
  }
}

Eigen::MatrixXd ToDecibels(const Eigen::MatrixXd &mag) {
  return mag.unaryExpr(
      [](double m) { return 20.0 * std::log10(m + kLogFloor); });
}

}  // namespace

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kSpecMag: return "SpecMag";
    case FeatureKind::kSpecdB: return "SpecdB";
    case FeatureKind::kSpec: return "Spec";
    case FeatureKind::kEmphSpec: return "EmphSpec";
    case FeatureKind::kEmphSpecdB: return "EmphSpecdB";
    case FeatureKind::kMfcc: return "MFCC";
  }
  return "?";
}

std::optional<FeatureKind> ParseFeatureKind(std::string_view name) {
  for (FeatureKind k : kAllFeatureKinds) {
    if (FeatureKindName(k) == name) return k;
  }
  return std::nullopt;
}

int FeatureDim(FeatureKind kind) {
  return kind == FeatureKind::kMfcc ? kNumMelFilters : kNumBins;
}

WindowType WindowFor(FeatureKind kind) {
  return (kind == FeatureKind::kSpecMag || kind == FeatureKind::kSpecdB)
             ? WindowType::kHann
             : WindowType::kHamming;
}

int NumFrames(std::size_t num_samples) {
  if (num_samples < static_cast<std::size_t>(kFrameLength)) return 0;
  return static_cast<int>((num_samples - kFrameLength) / kFrameHop) + 1;
}

Eigen::VectorXd MakeWindow(WindowType type, int n) {
  const double a0 = type == WindowType::kHann ? 0.5 : 0.54;
  const double a1 = 1.0 - a0;
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = a0 - a1 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  }
  return w;
}

std::vector<int> VadKeptFrames(const AudioSegment &seg, double threshold_db) {
  RequireFrames(seg, "vad_filter");
  const int t = NumFrames(seg.size());
  const auto &x = seg.samples();
  std::vector<double> level_db(t);
  double max_db = -std::numeric_limits<double>::infinity();
  for (int f = 0; f < t; ++f) {
    double energy = 0.0;
    for (int i = 0; i < kFrameLength; ++i) {
      double s = x[f * kFrameHop + i];
      energy += s * s;
    }
    energy /= kFrameLength;
    level_db[f] = energy > 0.0 ? 10.0 * std::log10(energy)
                               : -std::numeric_limits<double>::infinity();
    max_db = std::max(max_db, level_db[f]);
  }
  if (std::isinf(max_db)) {
    throw Error(ErrorCode::kAllSilent, "every frame has zero energy");
  }
  std::vector<int> kept;
  for (int f = 0; f < t; ++f) {
    if (level_db[f] >= max_db - threshold_db) kept.push_back(f);
  }
  return kept;
}

namespace {

// One application of the frame-dropping rule.
AudioSegment VadPass(const AudioSegment &seg, const std::vector<int> &kept) {
  const auto &x = seg.samples();
  const int last_frame = NumFrames(seg.size()) - 1;
  std::vector<float> out;
  out.reserve(kept.size() * kFrameHop + kFrameLength);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const std::size_t start = static_cast<std::size_t>(kept[k]) * kFrameHop;
    std::size_t end = start + kFrameHop;
    if (k + 1 == kept.size()) {
      end = kept[k] == last_frame ? x.size() : start + kFrameLength;
    }
    out.insert(out.end(), x.begin() + start, x.begin() + end);
  }
  return AudioSegment(std::move(out));
}

}  // namespace

AudioSegment VadFilter(const AudioSegment &seg, double threshold_db) {
  // Splicing can create new frames that straddle a junction and fall below
  // the threshold, so the rule is reapplied until every frame survives.
  // Each pass that drops something shortens the signal, and the loudest
  // frame is always kept whole, so this terminates with >= 512 samples.
  AudioSegment current = seg;
  for (;;) {
    const std::vector<int> kept = VadKeptFrames(current, threshold_db);
    if (kept.size() == static_cast<std::size_t>(NumFrames(current.size()))) {
      return current;
    }
    current = VadPass(current, kept);
  }
}

AudioSegment PreEmphasis(const AudioSegment &seg, double alpha) {
  if (seg.empty()) throw Error(ErrorCode::kEmptyInput, "pre_emphasis");
  const auto &x = seg.samples();
  std::vector<float> y(x.size());
  y[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n) {
    y[n] = static_cast<float>(x[n] - alpha * static_cast<double>(x[n - 1]));
  }
  return AudioSegment::Unchecked(std::move(y));
}

Eigen::MatrixXd StftMagnitude(const AudioSegment &seg, const StftConfig &cfg) {
  if (cfg.window_len_samples != kFrameLength || cfg.hop_samples != kFrameHop) {
    throw Error(ErrorCode::kInvalidArgument,
                "only 512-sample windows with 256-sample hop are supported");
  }
  RequireFrames(seg, "stft_magnitude");
  const int t = NumFrames(seg.size());
  const Eigen::VectorXd window = MakeWindow(cfg.window, kFrameLength);
  std::unique_ptr<double, FftwDeleter> in(
      static_cast<double *>(fftw_malloc(sizeof(double) * kFrameLength)));
  std::unique_ptr<fftw_complex, FftwDeleter> out(static_cast<fftw_complex *>(
      fftw_malloc(sizeof(fftw_complex) * kNumBins)));
  const fftw_plan plan = RealDftPlan();
  const auto &x = seg.samples();

  Eigen::MatrixXd mag(t, kNumBins);
  for (int f = 0; f < t; ++f) {
    for (int i = 0; i < kFrameLength; ++i) {
      in.get()[i] = x[f * kFrameHop + i] * window[i];
    }
    fftw_execute_dft_r2c(plan, in.get(), out.get());
    for (int k = 0; k < kNumBins; ++k) {
      mag(f, k) = std::hypot(out.get()[k][0], out.get()[k][1]);
    }
  }
  return mag;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

namespace {

Eigen::VectorXd MelEdges(int n_filters, double fmin_hz, double fmax_hz) {
  const double lo = HzToMel(fmin_hz);
  const double hi = HzToMel(fmax_hz);
  Eigen::VectorXd edges(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) {
    edges[i] = MelToHz(lo + (hi - lo) * i / (n_filters + 1));
  }
  return edges;
}

}  // namespace

Eigen::VectorXd MelCenters(int n_filters, double fmin_hz, double fmax_hz) {
  return MelEdges(n_filters, fmin_hz, fmax_hz).segment(1, n_filters);
}

Eigen::MatrixXd MelFilterbank(int n_filters, int n_bins, double fmin_hz,
                              double fmax_hz) {
  const Eigen::VectorXd edges = MelEdges(n_filters, fmin_hz, fmax_hz);
  const double bin_hz = static_cast<double>(kSampleRate) / (2 * (n_bins - 1));
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_filters, n_bins);
  for (int m = 0; m < n_filters; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      if (f > left && f <= center) {
        fb(m, k) = (f - left) / (center - left);
      } else if (f > center && f < right) {
        fb(m, k) = (right - f) / (right - center);
      }
    }
  }
  return fb;
}

Eigen::MatrixXd DctMatrix(int n) {
  Eigen::MatrixXd d(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
      d(k, i) = scale * std::cos(std::numbers::pi * k * (2 * i + 1) / (2.0 * n));
    }
  }
  return d;
}

FeatureMatrix FeatureExtract(const AudioSegment &seg, FeatureKind kind) {
  RequireFrames(seg, "feature_extract");
  const StftConfig cfg{kFrameLength, kFrameHop, WindowFor(kind)};
  Eigen::MatrixXd values;
  switch (kind) {
    case FeatureKind::kSpecMag:
      values = StftMagnitude(seg, cfg);
      break;
    case FeatureKind::kSpecdB:
      values = ToDecibels(StftMagnitude(seg, cfg));
      break;
    case FeatureKind::kSpec:
      values = StftMagnitude(seg, cfg).array().square().matrix();
      break;
    case FeatureKind::kEmphSpec:
      values = StftMagnitude(PreEmphasis(seg), cfg);
      break;
    case FeatureKind::kEmphSpecdB:
      values = ToDecibels(StftMagnitude(PreEmphasis(seg), cfg));
      break;
    case FeatureKind::kMfcc: {
      static const Eigen::MatrixXd fb_t = MelFilterbank().transpose();
      static const Eigen::MatrixXd dct_t = DctMatrix(kNumMelFilters).transpose();
      Eigen::MatrixXd log_energy =
          (StftMagnitude(seg, cfg) * fb_t).unaryExpr([](double e) {
            return std::log(e + kLogFloor);
          });
      values = log_energy * dct_t;
      break;
    }
  }
  FeatureMatrix out;
  out.kind = kind;
  out.frames = values.cast<float>();
  return out;
}

void NormalizeFeatures(FeatureMatrix *feats) {
  auto &m = feats->frames;
  if (m.size() == 0) return;
  const double mean = m.cast<double>().mean();
  const double var =
      (m.cast<double>().array() - mean).square().sum() / static_cast<double>(m.size());
  const double sd = std::sqrt(var);
  if (sd < 1e-12) {
    m.setZero();
    return;
  }
  m = ((m.cast<double>().array() - mean) / sd).cast<float>().matrix();
}

FeatureMatrix NetInputFeatures(const AudioSegment &seg, FeatureKind kind) {
  FeatureMatrix feats = FeatureExtract(seg, kind);
  NormalizeFeatures(&feats);
  return feats;
}

void WriteFeatureText(const FeatureMatrix &feats, std::ostream &os) {
  os << FeatureKindName(feats.kind) << ' ' << feats.num_frames() << ' '
     << feats.dim() << '\n';
  const auto old_precision = os.precision(9);
  for (int t = 0; t < feats.num_frames(); ++t) {
    for (int d = 0; d < feats.dim(); ++d) {
      if (d) os << ' ';
      os << feats.frames(t, d);
    }
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace blspk
