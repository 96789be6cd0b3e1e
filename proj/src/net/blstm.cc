// src/net/blstm.cc

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

#include "blspk/net/blstm.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "blspk/error.h"

namespace blspk {

namespace {

template <typename Scalar>
LstmDirectionParams<Scalar> ZeroDirection(int input_dim, int hidden) {
  LstmDirectionParams<Scalar> p;
  p.w = MatrixT<Scalar>::Zero(4 * hidden, input_dim);
  p.u = MatrixT<Scalar>::Zero(4 * hidden, hidden);
  p.b = VectorT<Scalar>::Zero(4 * hidden);
  return p;
}

template <typename Derived>
auto Sigmoid(const Eigen::ArrayBase<Derived> &x) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1) / (Scalar(1) + (-x).exp());
}

template <typename Scalar>
void AppendDirection(LstmDirectionParams<Scalar> &d,
                     std::vector<std::span<Scalar>> *out) {
  out->emplace_back(d.w.data(), d.w.size());
  out->emplace_back(d.u.data(), d.u.size());
  out->emplace_back(d.b.data(), d.b.size());
}

template <typename Scalar>
void AppendDirection(const LstmDirectionParams<Scalar> &d,
                     std::vector<std::span<const Scalar>> *out) {
  out->emplace_back(d.w.data(), d.w.size());
  out->emplace_back(d.u.data(), d.u.size());
  out->emplace_back(d.b.data(), d.b.size());
}

// One direction of one layer over the whole sequence.
template <typename Scalar>
void DirectionForward(const LstmDirectionParams<Scalar> &p,
                      const MatrixT<Scalar> &x, int steps, int batch,
                      bool reverse, DirectionCache<Scalar> *cache) {
  const int h = p.hidden();
  const MatrixT<Scalar> z_in = (p.w * x).colwise() + p.b;
  cache->gates.resize(4 * h, static_cast<Eigen::Index>(steps) * batch);
  cache->c.resize(h, static_cast<Eigen::Index>(steps) * batch);
  cache->h.resize(h, static_cast<Eigen::Index>(steps) * batch);

  MatrixT<Scalar> h_prev = MatrixT<Scalar>::Zero(h, batch);
  MatrixT<Scalar> c_prev = MatrixT<Scalar>::Zero(h, batch);
  MatrixT<Scalar> z(4 * h, batch);
  for (int s = 0; s < steps; ++s) {
    const int t = reverse ? steps - 1 - s : s;
    const Eigen::Index col = static_cast<Eigen::Index>(t) * batch;
    z.noalias() = z_in.middleCols(col, batch);
    z.noalias() += p.u * h_prev;

    auto gates = cache->gates.middleCols(col, batch);
    gates.topRows(2 * h) = Sigmoid(z.topRows(2 * h).array()).matrix();
    gates.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
    gates.bottomRows(h) = Sigmoid(z.bottomRows(h).array()).matrix();

    auto c = cache->c.middleCols(col, batch);
    c = (gates.middleRows(h, h).array() * c_prev.array() +
         gates.topRows(h).array() * gates.middleRows(2 * h, h).array())
            .matrix();
    auto hs = cache->h.middleCols(col, batch);
    hs = (gates.bottomRows(h).array() * c.array().tanh()).matrix();
    h_prev = hs;
    c_prev = c;
  }
}

// BPTT for one direction. `d_h` is H x (T*B) gradient arriving at each
// output state from above. Accumulates into `g` and returns dLoss/dInput.
template <typename Scalar>
MatrixT<Scalar> DirectionBackward(const LstmDirectionParams<Scalar> &p,
                                  const MatrixT<Scalar> &x,
                                  const DirectionCache<Scalar> &cache,
                                  const MatrixT<Scalar> &d_h, int steps,
                                  int batch, bool reverse,
                                  LstmDirectionParams<Scalar> *g) {
  const int h = p.hidden();
  MatrixT<Scalar> d_z(4 * h, static_cast<Eigen::Index>(steps) * batch);
  MatrixT<Scalar> dh_next = MatrixT<Scalar>::Zero(h, batch);
  MatrixT<Scalar> dc_next = MatrixT<Scalar>::Zero(h, batch);
  const MatrixT<Scalar> zeros = MatrixT<Scalar>::Zero(h, batch);
  MatrixT<Scalar> dh(h, batch);
  MatrixT<Scalar> dc(h, batch);

  // Walk the processing order backwards: s = steps-1 is the last state the
  // forward pass produced.
  for (int s = steps - 1; s >= 0; --s) {
    const int t = reverse ? steps - 1 - s : s;
    const Eigen::Index col = static_cast<Eigen::Index>(t) * batch;
    const bool first = s == 0;
    const Eigen::Index prev_col =
        first ? 0
              : static_cast<Eigen::Index>(reverse ? t + 1 : t - 1) * batch;

    const auto gates = cache.gates.middleCols(col, batch);
    const auto ig = gates.topRows(h).array();
    const auto fg = gates.middleRows(h, h).array();
    const auto cg = gates.middleRows(2 * h, h).array();
    const auto og = gates.bottomRows(h).array();
    const MatrixT<Scalar> c_prev =
        first ? zeros : MatrixT<Scalar>(cache.c.middleCols(prev_col, batch));
    const MatrixT<Scalar> h_prev =
        first ? zeros : MatrixT<Scalar>(cache.h.middleCols(prev_col, batch));

    const auto tanh_c = cache.c.middleCols(col, batch).array().tanh();
    dh = d_h.middleCols(col, batch) + dh_next;
    dc = (dh.array() * og * (Scalar(1) - tanh_c.square()) + dc_next.array())
             .matrix();

    auto dz = d_z.middleCols(col, batch);
    dz.topRows(h) = (dc.array() * cg * ig * (Scalar(1) - ig)).matrix();
    dz.middleRows(h, h) = (dc.array() * c_prev.array() * fg * (Scalar(1) - fg)).matrix();
    dz.middleRows(2 * h, h) = (dc.array() * ig * (Scalar(1) - cg.square())).matrix();
    dz.bottomRows(h) = (dh.array() * tanh_c * og * (Scalar(1) - og)).matrix();

    if (!first) g->u.noalias() += dz * h_prev.transpose();
    dh_next.noalias() = p.u.transpose() * dz;
    dc_next = (dc.array() * fg).matrix();
  }

  g->w.noalias() += d_z * x.transpose();
  g->b += d_z.rowwise().sum();
  return p.w.transpose() * d_z;
}

template <typename Scalar>
void CheckInput(const BlstmNet<Scalar> &net, Eigen::Index rows) {
  if (rows != net.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input dimension " + std::to_string(rows) + ", net expects " +
                    std::to_string(net.input_dim()));
  }
}

}  // namespace

template <typename Scalar>
BlstmNet<Scalar>::BlstmNet(FeatureKind kind, int input_dim, int hidden,
                           int num_layers)
    : kind_(kind), input_dim_(input_dim), hidden_(hidden) {
  if (input_dim < 1 || hidden < 1 || num_layers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "net dimensions must be positive");
  }
  layers_.reserve(num_layers);
  for (int l = 0; l < num_layers; ++l) {
    const int in = l == 0 ? input_dim : 2 * hidden;
    layers_.push_back(
        {ZeroDirection<Scalar>(in, hidden), ZeroDirection<Scalar>(in, hidden)});
  }
}

template <typename Scalar>
std::size_t BlstmNet<Scalar>::ParamCount() const {
  std::size_t n = 0;
  for (const auto &layer : layers_) {
    n += layer.fwd.ParamCount() + layer.bwd.ParamCount();
  }
  return n;
}

template <typename Scalar>
std::vector<std::span<Scalar>> BlstmNet<Scalar>::Tensors() {
  std::vector<std::span<Scalar>> out;
  for (auto &layer : layers_) {
    AppendDirection(layer.fwd, &out);
    AppendDirection(layer.bwd, &out);
  }
  return out;
}

template <typename Scalar>
std::vector<std::span<const Scalar>> BlstmNet<Scalar>::Tensors() const {
  std::vector<std::span<const Scalar>> out;
  for (const auto &layer : layers_) {
    AppendDirection(layer.fwd, &out);
    AppendDirection(layer.bwd, &out);
  }
  return out;
}

template <typename Scalar>
template <typename Other>
BlstmNet<Other> BlstmNet<Scalar>::Cast() const {
  BlstmNet<Other> out(kind_, input_dim_, hidden_, num_layers());
  for (int l = 0; l < num_layers(); ++l) {
    auto &dst = out.layers()[l];
    const auto &src = layers_[l];
    dst.fwd.w = src.fwd.w.template cast<Other>();
    dst.fwd.u = src.fwd.u.template cast<Other>();
    dst.fwd.b = src.fwd.b.template cast<Other>();
    dst.bwd.w = src.bwd.w.template cast<Other>();
    dst.bwd.u = src.bwd.u.template cast<Other>();
    dst.bwd.b = src.bwd.b.template cast<Other>();
  }
  return out;
}

template <typename Scalar>
bool BlstmNet<Scalar>::operator==(const BlstmNet &other) const {
  if (kind_ != other.kind_ || input_dim_ != other.input_dim_ ||
      hidden_ != other.hidden_ || num_layers() != other.num_layers()) {
    return false;
  }
  for (int l = 0; l < num_layers(); ++l) {
    const auto &a = layers_[l];
    const auto &b = other.layers_[l];
    if (a.fwd.w != b.fwd.w || a.fwd.u != b.fwd.u || a.fwd.b != b.fwd.b ||
        a.bwd.w != b.bwd.w || a.bwd.u != b.bwd.u || a.bwd.b != b.bwd.b) {
      return false;
    }
  }
  return true;
}

template <typename Scalar>
std::vector<std::span<Scalar>> Classifier<Scalar>::Tensors() {
  auto out = net.Tensors();
  out.emplace_back(head.w.data(), head.w.size());
  out.emplace_back(head.b.data(), head.b.size());
  return out;
}

template <typename Scalar>
std::vector<std::span<const Scalar>> Classifier<Scalar>::Tensors() const {
  auto out = net.Tensors();
  out.emplace_back(head.w.data(), head.w.size());
  out.emplace_back(head.b.data(), head.b.size());
  return out;
}

template <typename Scalar>
void InitializeNet(BlstmNet<Scalar> *net, std::mt19937_64 *rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(net->hidden()));
  std::uniform_real_distribution<double> dist(-k, k);
  const int h = net->hidden();
  for (auto &layer : net->layers()) {
    for (auto *d : {&layer.fwd, &layer.bwd}) {
      for (auto *m : {&d->w, &d->u}) {
        for (Eigen::Index i = 0; i < m->size(); ++i) {
          m->data()[i] = static_cast<Scalar>(dist(*rng));
        }
      }
      for (Eigen::Index i = 0; i < d->b.size(); ++i) {
        d->b[i] = static_cast<Scalar>(dist(*rng));
      }
      d->b.segment(h, h).setOnes();
    }
  }
}

template <typename Scalar>
void InitializeHead(ClassifierHead<Scalar> *head, std::mt19937_64 *rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(head->w.cols()));
  std::uniform_real_distribution<double> dist(-k, k);
  for (Eigen::Index i = 0; i < head->w.size(); ++i) {
    head->w.data()[i] = static_cast<Scalar>(dist(*rng));
  }
  head->b.setZero();
}

template <typename Scalar>
MatrixT<Scalar> BlstmForwardBatch(const BlstmNet<Scalar> &net,
                                  const MatrixT<Scalar> &inputs, int batch,
                                  ForwardCache<Scalar> *cache) {
  CheckInput(net, inputs.rows());
  if (batch < 1 || inputs.cols() == 0 || inputs.cols() % batch != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input columns must be a positive multiple of the batch size");
  }
  const int steps = static_cast<int>(inputs.cols() / batch);
  const int h = net.hidden();

  ForwardCache<Scalar> local;
  ForwardCache<Scalar> &fc = cache ? *cache : local;
  fc.steps = steps;
  fc.batch = batch;
  fc.layers.resize(net.num_layers());

  for (int l = 0; l < net.num_layers(); ++l) {
    LayerCache<Scalar> &lc = fc.layers[l];
    if (l == 0) {
      lc.input = inputs;
    } else {
      const LayerCache<Scalar> &below = fc.layers[l - 1];
      lc.input.resize(2 * h, below.fwd.h.cols());
      lc.input.topRows(h) = below.fwd.h;
      lc.input.bottomRows(h) = below.bwd.h;
      if (!cache) {
        // Inference keeps only the layer in flight.
        fc.layers[l - 1] = LayerCache<Scalar>();
      }
    }
    DirectionForward(net.layers()[l].fwd, lc.input, steps, batch, false, &lc.fwd);
    DirectionForward(net.layers()[l].bwd, lc.input, steps, batch, true, &lc.bwd);
  }

  const LayerCache<Scalar> &top = fc.layers.back();
  MatrixT<Scalar> emb(2 * h, batch);
  emb.topRows(h) =
      top.fwd.h.middleCols(static_cast<Eigen::Index>(steps - 1) * batch, batch);
  emb.bottomRows(h) = top.bwd.h.middleCols(0, batch);
  return emb;
}

template <typename Scalar>
void BlstmBackwardBatch(const BlstmNet<Scalar> &net,
                        const ForwardCache<Scalar> &cache,
                        const MatrixT<Scalar> &d_embedding,
                        BlstmNet<Scalar> *grads) {
  const int h = net.hidden();
  const int steps = cache.steps;
  const int batch = cache.batch;
  const Eigen::Index cols = static_cast<Eigen::Index>(steps) * batch;

  MatrixT<Scalar> d_fwd = MatrixT<Scalar>::Zero(h, cols);
  MatrixT<Scalar> d_bwd = MatrixT<Scalar>::Zero(h, cols);
  d_fwd.middleCols(cols - batch, batch) = d_embedding.topRows(h);
  d_bwd.middleCols(0, batch) = d_embedding.bottomRows(h);

  for (int l = net.num_layers() - 1; l >= 0; --l) {
    const auto &params = net.layers()[l];
    const auto &lc = cache.layers[l];
    auto &g = grads->layers()[l];
    MatrixT<Scalar> d_in = DirectionBackward(params.fwd, lc.input, lc.fwd, d_fwd,
                                             steps, batch, false, &g.fwd);
    d_in += DirectionBackward(params.bwd, lc.input, lc.bwd, d_bwd, steps, batch,
                              true, &g.bwd);
    if (l > 0) {
      d_fwd = d_in.topRows(h);
      d_bwd = d_in.bottomRows(h);
    }
  }
}

template <typename Scalar>
VectorT<Scalar> BlstmForward(const BlstmNet<Scalar> &net,
                             const MatrixT<Scalar> &frames) {
  if (frames.rows() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "need at least one frame");
  }
  CheckInput(net, frames.cols());
  return BlstmForwardBatch<Scalar>(net, frames.transpose(), 1, nullptr).col(0);
}

VectorT<float> BlstmForward(const EmbeddingNet &net, const FeatureMatrix &feats) {
  if (feats.kind != net.feature_kind()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string("features are ") +
                    std::string(FeatureKindName(feats.kind)) + ", net expects " +
                    std::string(FeatureKindName(net.feature_kind())));
  }
  return BlstmForward<float>(net, MatrixT<float>(feats.frames));
}

template <typename Scalar>
VectorT<Scalar> ClassifyForward(const BlstmNet<Scalar> &net,
                                const ClassifierHead<Scalar> &head,
                                const MatrixT<Scalar> &frames) {
  if (head.w.cols() != net.embedding_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "head width != embedding size");
  }
  return head.w * BlstmForward(net, frames) + head.b;
}

VectorT<float> ClassifyForward(const EmbeddingNet &net,
                               const ClassifierHead<float> &head,
                               const FeatureMatrix &feats) {
  if (head.w.cols() != net.embedding_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "head width != embedding size");
  }
  return head.w * BlstmForward(net, feats) + head.b;
}

template <typename Scalar>
CrossEntropyResult<Scalar> CrossEntropy(const VectorT<Scalar> &logits,
                                        int label) {
  if (label < 0 || label >= logits.size()) {
    throw Error(ErrorCode::kLabelOutOfRange,
                "label " + std::to_string(label) + " with " +
                    std::to_string(logits.size()) + " classes");
  }
  const Scalar max = logits.maxCoeff();
  const VectorT<Scalar> shifted = logits.array() - max;
  const VectorT<Scalar> e = shifted.array().exp();
  const Scalar sum = e.sum();
  CrossEntropyResult<Scalar> r;
  r.loss = std::log(sum) - shifted[label];
  r.d_logits = e / sum;
  r.d_logits[label] -= Scalar(1);
  return r;
}

template <typename Scalar>
Scalar ClassifierLossAndGradients(const Classifier<Scalar> &model,
                                  const MatrixT<Scalar> &inputs,
                                  std::span<const int> labels,
                                  Classifier<Scalar> *grads, int *correct) {
  const int batch = static_cast<int>(labels.size());
  ForwardCache<Scalar> cache;
  const MatrixT<Scalar> emb =
      BlstmForwardBatch(model.net, inputs, batch, &cache);
  const MatrixT<Scalar> logits =
      (model.head.w * emb).colwise() + model.head.b;

  MatrixT<Scalar> d_logits(logits.rows(), batch);
  Scalar loss = 0;
  int hits = 0;
  for (int i = 0; i < batch; ++i) {
    auto ce = CrossEntropy<Scalar>(logits.col(i), labels[i]);
    loss += ce.loss;
    d_logits.col(i) = ce.d_logits / static_cast<Scalar>(batch);
    Eigen::Index arg;
    logits.col(i).maxCoeff(&arg);
    hits += arg == labels[i];
  }
  if (correct) *correct = hits;

  grads->head.w.noalias() += d_logits * emb.transpose();
  grads->head.b += d_logits.rowwise().sum();
  const MatrixT<Scalar> d_emb = model.head.w.transpose() * d_logits;
  BlstmBackwardBatch(model.net, cache, d_emb, &grads->net);
  return loss / static_cast<Scalar>(batch);
}

template <typename Scalar>
Scalar Backward(const Classifier<Scalar> &model, const MatrixT<Scalar> &frames,
                int label, Classifier<Scalar> *grads) {
  CheckInput(model.net, frames.cols());
  const int labels[1] = {label};
  return ClassifierLossAndGradients<Scalar>(model, frames.transpose(), labels,
                                            grads);
}

template <typename Scalar>
MatrixT<Scalar> PackBatch(std::span<const MatrixT<Scalar>> sequences) {
  if (sequences.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "empty batch");
  }
  const Eigen::Index steps = sequences[0].rows();
  const Eigen::Index dim = sequences[0].cols();
  const Eigen::Index batch = static_cast<Eigen::Index>(sequences.size());
  MatrixT<Scalar> out(dim, steps * batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto &seq = sequences[b];
    if (seq.rows() != steps || seq.cols() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "batch sequences must share length and width");
    }
    for (Eigen::Index t = 0; t < steps; ++t) {
      out.col(t * batch + b) = seq.row(t).transpose();
    }
  }
  return out;
}

#define BLSPK_INSTANTIATE(S)                                                  \
  template class BlstmNet<S>;                                                 \
  template struct Classifier<S>;                                              \
  template void InitializeNet<S>(BlstmNet<S> *, std::mt19937_64 *);           \
  template void InitializeHead<S>(ClassifierHead<S> *, std::mt19937_64 *);    \
  template MatrixT<S> BlstmForwardBatch<S>(const BlstmNet<S> &,               \
                                           const MatrixT<S> &, int,           \
                                           ForwardCache<S> *);                \
  template void BlstmBackwardBatch<S>(const BlstmNet<S> &,                    \
                                      const ForwardCache<S> &,                \
                                      const MatrixT<S> &, BlstmNet<S> *);     \
  template VectorT<S> BlstmForward<S>(const BlstmNet<S> &, const MatrixT<S> &); \
  template VectorT<S> ClassifyForward<S>(const BlstmNet<S> &,                 \
                                         const ClassifierHead<S> &,           \
                                         const MatrixT<S> &);                 \
  template CrossEntropyResult<S> CrossEntropy<S>(const VectorT<S> &, int);    \
  template S ClassifierLossAndGradients<S>(const Classifier<S> &,             \
                                           const MatrixT<S> &,                \
                                           std::span<const int>,              \
                                           Classifier<S> *, int *);           \
  template S Backward<S>(const Classifier<S> &, const MatrixT<S> &, int,      \
                         Classifier<S> *);                                    \
  template MatrixT<S> PackBatch<S>(std::span<const MatrixT<S>>);

BLSPK_INSTANTIATE(float)
BLSPK_INSTANTIATE(double)

#undef BLSPK_INSTANTIATE

template BlstmNet<double> BlstmNet<float>::Cast<double>() const;
template BlstmNet<float> BlstmNet<double>::Cast<float>() const;
template BlstmNet<float> BlstmNet<float>::Cast<float>() const;
template BlstmNet<double> BlstmNet<double>::Cast<double>() const;

}  // namespace blspk
