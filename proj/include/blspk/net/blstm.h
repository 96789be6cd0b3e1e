// include/blspk/net/blstm.h

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

#ifndef BLSPK_NET_BLSTM_H_
#define BLSPK_NET_BLSTM_H_

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "blspk/dsp/features.h"

namespace blspk {

inline constexpr int kHiddenUnits = 256;
inline constexpr int kNumBlstmLayers = 3;
inline constexpr int kEmbeddingDim = 2 * kHiddenUnits;

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Gate order everywhere (storage rows, weight files): input, forget, cell,
// output. Row block g of `w`, `u` and `b` holds gate g.
template <typename Scalar>
struct LstmDirectionParams {
  MatrixT<Scalar> w;  // 4H x input_dim
  MatrixT<Scalar> u;  // 4H x H
  VectorT<Scalar> b;  // 4H

  int hidden() const { return static_cast<int>(u.cols()); }
  int input_dim() const { return static_cast<int>(w.cols()); }
  std::size_t ParamCount() const { return w.size() + u.size() + b.size(); }
};

template <typename Scalar>
struct BlstmLayer {
  LstmDirectionParams<Scalar> fwd;
  LstmDirectionParams<Scalar> bwd;
};

// Parameter count of one LSTM direction: 4 (input + hidden + 1) hidden.
constexpr std::size_t LstmDirectionParamCount(std::size_t input_dim,
                                              std::size_t hidden) {
  return 4 * (input_dim + hidden + 1) * hidden;
}

// Closed-form count for a stack of bidirectional layers. Layers after the
// first see the concatenated 2*hidden output of the layer below.
constexpr std::size_t BlstmParamCount(std::size_t input_dim, std::size_t hidden,
                                      std::size_t num_layers) {
  std::size_t total = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    total += 2 * LstmDirectionParamCount(l == 0 ? input_dim : 2 * hidden, hidden);
  }
  return total;
}

// Stacked bidirectional LSTM that maps a T x D feature sequence to one
// 2*hidden vector: the last layer's forward state after the final frame
// concatenated with its backward state after the first frame.
template <typename Scalar>
class BlstmNet {
 public:
  BlstmNet() = default;

  // All parameters zero.
  BlstmNet(FeatureKind kind, int input_dim, int hidden, int num_layers);

  // The deployed topology: 3 layers x 256 units over FeatureDim(kind).
  static BlstmNet ForFeature(FeatureKind kind) {
    return BlstmNet(kind, FeatureDim(kind), kHiddenUnits, kNumBlstmLayers);
  }

  FeatureKind feature_kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int hidden() const { return hidden_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  int embedding_dim() const { return 2 * hidden_; }

  const std::vector<BlstmLayer<Scalar>> &layers() const { return layers_; }
  std::vector<BlstmLayer<Scalar>> &layers() { return layers_; }

  std::size_t ParamCount() const;
  std::size_t MemoryBytes() const { return ParamCount() * sizeof(float); }

  // Same shape, all zeros. Used as a gradient accumulator.
  BlstmNet ZerosLike() const {
    return BlstmNet(kind_, input_dim_, hidden_, num_layers());
  }

  // Canonical traversal: per layer, forward w, u, b then backward w, u, b.
  std::vector<std::span<Scalar>> Tensors();
  std::vector<std::span<const Scalar>> Tensors() const;

  template <typename Other>
  BlstmNet<Other> Cast() const;

  bool operator==(const BlstmNet &other) const;

 private:
  FeatureKind kind_ = FeatureKind::kSpecdB;
  int input_dim_ = 0;
  int hidden_ = 0;
  std::vector<BlstmLayer<Scalar>> layers_;
};

// Fully connected softmax classifier used only during training.
template <typename Scalar>
struct ClassifierHead {
  MatrixT<Scalar> w;  // num_classes x embedding_dim
  VectorT<Scalar> b;  // num_classes

  ClassifierHead() = default;
  ClassifierHead(int num_classes, int embedding_dim)
      : w(MatrixT<Scalar>::Zero(num_classes, embedding_dim)),
        b(VectorT<Scalar>::Zero(num_classes)) {}

  int num_classes() const { return static_cast<int>(w.rows()); }
  std::size_t ParamCount() const { return w.size() + b.size(); }
  ClassifierHead ZerosLike() const {
    return ClassifierHead(num_classes(), static_cast<int>(w.cols()));
  }
  bool operator==(const ClassifierHead &o) const {
    return w == o.w && b == o.b;
  }
};

// Network plus head: the unit the optimizer updates.
template <typename Scalar>
struct Classifier {
  BlstmNet<Scalar> net;
  ClassifierHead<Scalar> head;

  Classifier ZerosLike() const { return {net.ZerosLike(), head.ZerosLike()}; }
  std::vector<std::span<Scalar>> Tensors();
  std::vector<std::span<const Scalar>> Tensors() const;
};

using EmbeddingNet = BlstmNet<float>;

// uniform(-k, k) with k = 1/sqrt(hidden); forget-gate biases set to 1.
template <typename Scalar>
void InitializeNet(BlstmNet<Scalar> *net, std::mt19937_64 *rng);

// uniform(-k, k) with k = 1/sqrt(embedding_dim); zero bias.
template <typename Scalar>
void InitializeHead(ClassifierHead<Scalar> *head, std::mt19937_64 *rng);

// Activations saved by the batched forward pass for BPTT.
template <typename Scalar>
struct DirectionCache {
  MatrixT<Scalar> gates;  // 4H x (T*B), post-nonlinearity
  MatrixT<Scalar> c;      // H x (T*B)
  MatrixT<Scalar> h;      // H x (T*B)
};

template <typename Scalar>
struct LayerCache {
  MatrixT<Scalar> input;  // input_dim x (T*B)
  DirectionCache<Scalar> fwd;
  DirectionCache<Scalar> bwd;
};

template <typename Scalar>
struct ForwardCache {
  int steps = 0;
  int batch = 0;
  std::vector<LayerCache<Scalar>> layers;
};

// Batched forward pass. `inputs` is input_dim x (T*B); the columns of
// timestep t are [t*B, (t+1)*B). Returns embedding_dim x B raw embeddings.
// `cache` may be null for inference.
template <typename Scalar>
MatrixT<Scalar> BlstmForwardBatch(const BlstmNet<Scalar> &net,
                                  const MatrixT<Scalar> &inputs, int batch,
                                  ForwardCache<Scalar> *cache);

// Accumulates parameter gradients into `grads` given dLoss/dEmbedding
// (embedding_dim x B) for the pass recorded in `cache`.
template <typename Scalar>
void BlstmBackwardBatch(const BlstmNet<Scalar> &net,
                        const ForwardCache<Scalar> &cache,
                        const MatrixT<Scalar> &d_embedding,
                        BlstmNet<Scalar> *grads);

// Single sequence, frames as rows (T x input_dim).
template <typename Scalar>
VectorT<Scalar> BlstmForward(const BlstmNet<Scalar> &net,
                             const MatrixT<Scalar> &frames);

// Raw (unnormalized) embedding of a feature matrix. Throws
// kDimensionMismatch if the feature kind or width does not match the net.
VectorT<float> BlstmForward(const EmbeddingNet &net, const FeatureMatrix &feats);

template <typename Scalar>
VectorT<Scalar> ClassifyForward(const BlstmNet<Scalar> &net,
                                const ClassifierHead<Scalar> &head,
                                const MatrixT<Scalar> &frames);

VectorT<float> ClassifyForward(const EmbeddingNet &net,
                               const ClassifierHead<float> &head,
                               const FeatureMatrix &feats);

template <typename Scalar>
struct CrossEntropyResult {
  Scalar loss = 0;
  VectorT<Scalar> d_logits;
};

// -log softmax(logits)[label] with max subtraction; gradient is
// softmax - onehot. Throws kLabelOutOfRange.
template <typename Scalar>
CrossEntropyResult<Scalar> CrossEntropy(const VectorT<Scalar> &logits,
                                        int label);

// Mean cross-entropy over a batch of sequences sharing one length, with
// gradients for every parameter accumulated into `grads` (which must be
// zero-initialized by the caller to get plain gradients). Returns the mean
// loss; `correct` (optional) receives the number of argmax hits.
template <typename Scalar>
Scalar ClassifierLossAndGradients(const Classifier<Scalar> &model,
                                  const MatrixT<Scalar> &inputs,
                                  std::span<const int> labels,
                                  Classifier<Scalar> *grads,
                                  int *correct = nullptr);

// Single-example convenience wrapper around ClassifierLossAndGradients.
template <typename Scalar>
Scalar Backward(const Classifier<Scalar> &model, const MatrixT<Scalar> &frames,
                int label, Classifier<Scalar> *grads);

// Packs B sequences of equal length (each T x D, frames as rows) into the
// D x (T*B) time-major layout used by the batched passes.
template <typename Scalar>
MatrixT<Scalar> PackBatch(std::span<const MatrixT<Scalar>> sequences);

}  // namespace blspk

#endif  // BLSPK_NET_BLSTM_H_
