// include/blspk/dsp/features.h

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

#ifndef BLSPK_DSP_FEATURES_H_
#define BLSPK_DSP_FEATURES_H_

#include <array>
#include <iosfwd>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "blspk/dsp/audio.h"

namespace blspk {

// Wire codes 0..5 are stored in weight files; do not reorder.
enum class FeatureKind : std::uint8_t {
  kSpecMag = 0,
  kSpecdB = 1,
  kSpec = 2,
  kEmphSpec = 3,
  kEmphSpecdB = 4,
  kMfcc = 5,
};

inline constexpr std::array<FeatureKind, 6> kAllFeatureKinds = {
    FeatureKind::kSpecdB,   FeatureKind::kSpec,       FeatureKind::kSpecMag,
    FeatureKind::kEmphSpec, FeatureKind::kEmphSpecdB, FeatureKind::kMfcc};

std::string_view FeatureKindName(FeatureKind kind);
std::optional<FeatureKind> ParseFeatureKind(std::string_view name);

inline constexpr int kFrameLength = 512;  // 32 ms at 16 kHz
inline constexpr int kFrameHop = 256;     // 16 ms at 16 kHz
inline constexpr int kNumBins = kFrameLength / 2 + 1;
inline constexpr int kNumMelFilters = 40;
inline constexpr double kPreEmphasis = 0.97;
inline constexpr double kLogFloor = 1e-10;

int FeatureDim(FeatureKind kind);

enum class WindowType { kHann, kHamming };

WindowType WindowFor(FeatureKind kind);

struct StftConfig {
  int window_len_samples = kFrameLength;
  int hop_samples = kFrameHop;
  WindowType window = WindowType::kHann;
};

using RowMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// T rows (frames) by D columns.
struct FeatureMatrix {
  FeatureKind kind = FeatureKind::kSpecdB;
  RowMatrixF frames;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

// floor((n - 512) / 256) + 1; zero when n < 512.
int NumFrames(std::size_t num_samples);

// Symmetric windows of length n.
Eigen::VectorXd MakeWindow(WindowType type, int n);

// Energy-based voice activity detection over 32 ms / 16 ms frames. Frames
// whose RMS level is more than `threshold_db` below the loudest frame are
// dropped. Each kept frame contributes its first hop; the last kept frame
// contributes its whole window, extended to the end of the signal when it
// is the final frame of the segment. The rule is repeated on its own output
// until no frame is dropped, which makes the filter idempotent.
AudioSegment VadFilter(const AudioSegment &seg, double threshold_db = 20.0);

// Indices of the frames kept by the first pass of VadFilter.
std::vector<int> VadKeptFrames(const AudioSegment &seg,
                               double threshold_db = 20.0);

AudioSegment PreEmphasis(const AudioSegment &seg, double alpha = kPreEmphasis);

// T x 257 magnitudes of a 512-point DFT per windowed frame.
Eigen::MatrixXd StftMagnitude(const AudioSegment &seg, const StftConfig &cfg);

double HzToMel(double hz);
double MelToHz(double mel);

// n_filters x n_bins triangular filters with centers equally spaced on the
// mel scale between fmin and fmax.
Eigen::MatrixXd MelFilterbank(int n_filters = kNumMelFilters,
                              int n_bins = kNumBins, double fmin_hz = 0.0,
                              double fmax_hz = kSampleRate / 2.0);

// Center frequencies (Hz) of the filters built by MelFilterbank.
Eigen::VectorXd MelCenters(int n_filters = kNumMelFilters, double fmin_hz = 0.0,
                           double fmax_hz = kSampleRate / 2.0);

// Orthonormal DCT-II basis, n x n; row k is the k-th cosine.
Eigen::MatrixXd DctMatrix(int n);

FeatureMatrix FeatureExtract(const AudioSegment &seg, FeatureKind kind);

// Standardizes the whole matrix by its scalar mean and standard deviation.
// Column-wise structure (the spectral envelope) is preserved; overall gain
// is removed. Constant matrices map to zero.
void NormalizeFeatures(FeatureMatrix *feats);

// FeatureExtract followed by NormalizeFeatures: what the network consumes
// in both training and deployment.
FeatureMatrix NetInputFeatures(const AudioSegment &seg, FeatureKind kind);

// Header line "kind T D", then one space-separated row per frame.
void WriteFeatureText(const FeatureMatrix &feats, std::ostream &os);

}  // namespace blspk

#endif  // BLSPK_DSP_FEATURES_H_
