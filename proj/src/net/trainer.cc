// src/net/trainer.cc

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

#include "blspk/net/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "blspk/error.h"

namespace blspk {

namespace {

struct PreparedSpeaker {
  std::vector<AudioSegment> train;
  std::vector<AudioSegment> validation;
};

AudioSegment RandomCrop(const AudioSegment &utt, std::size_t n,
                        std::mt19937_64 *rng) {
  std::uniform_int_distribution<std::size_t> pick(0, utt.size() - n);
  return utt.Slice(pick(*rng), n);
}

MatrixT<float> CropFeatures(const AudioSegment &crop, FeatureKind kind) {
  return NetInputFeatures(crop, kind).frames;
}

std::vector<PreparedSpeaker> Prepare(const Corpus &corpus, std::size_t crop,
                                     bool hold_out) {
  std::vector<PreparedSpeaker> out;
  for (const auto &speaker : corpus.speakers) {
    std::vector<AudioSegment> usable;
    for (const auto &utt : speaker.utterances) {
      if (utt.size() < static_cast<std::size_t>(kFrameLength)) continue;
      AudioSegment active;
      try {
        active = VadFilter(utt);
      } catch (const Error &e) {
        if (e.code() == ErrorCode::kAllSilent) continue;
        throw;
      }
      if (active.size() >= crop) usable.push_back(std::move(active));
    }
    if (usable.empty()) {
      throw Error(ErrorCode::kSegmentTooShort,
                  "speaker '" + speaker.name +
                      "' has no utterance longer than the crop after VAD");
    }
    PreparedSpeaker p;
    if (hold_out && usable.size() >= 2) {
      p.validation.push_back(std::move(usable.back()));
      usable.pop_back();
    }
    p.train = std::move(usable);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

double ClassificationAccuracy(const Classifier<float> &model,
                              const CropSet &set, int batch_size) {
  if (set.crops.empty()) return std::numeric_limits<double>::quiet_NaN();
  const FeatureKind kind = model.net.feature_kind();
  std::size_t hits = 0;
  for (std::size_t start = 0; start < set.crops.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(set.crops.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<MatrixT<float>> seqs;
    for (std::size_t i = start; i < end; ++i) {
      seqs.push_back(CropFeatures(set.crops[i], kind));
    }
    const int b = static_cast<int>(seqs.size());
    const MatrixT<float> emb =
        BlstmForwardBatch<float>(model.net, PackBatch<float>(seqs), b, nullptr);
    const MatrixT<float> logits = (model.head.w * emb).colwise() + model.head.b;
    for (int i = 0; i < b; ++i) {
      Eigen::Index arg;
      logits.col(i).maxCoeff(&arg);
      hits += arg == set.labels[start + i];
    }
  }
  return static_cast<double>(hits) / static_cast<double>(set.crops.size());
}

TrainResult Train(const Corpus &corpus, const TrainConfig &cfg,
                  const std::function<void(const EpochLog &)> &on_epoch) {
  if (corpus.speakers.size() < 2) {
    throw Error(ErrorCode::kCorpusTooSmall, "training needs at least 2 speakers");
  }
  if (cfg.segment_len_s < 0.25 || cfg.segment_len_s > 2.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "segment length must lie in [0.25, 2.0] s");
  }
  if (cfg.batch_size < 1 || cfg.epochs < 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch size and epochs");
  }
  const std::size_t crop = SecondsToSamples(cfg.segment_len_s);
  const int num_classes = static_cast<int>(corpus.speakers.size());
  const std::vector<PreparedSpeaker> speakers =
      Prepare(corpus, crop, cfg.validation_size > 0);

  std::mt19937_64 rng(cfg.rng_seed);
  TrainResult result;
  Classifier<float> &model = result.model;
  model.net = BlstmNet<float>(cfg.feature_kind, FeatureDim(cfg.feature_kind),
                              cfg.hidden, cfg.num_layers);
  model.head = ClassifierHead<float>(num_classes, model.net.embedding_dim());
  InitializeNet(&model.net, &rng);
  InitializeHead(&model.head, &rng);

  // The validation draw is fixed for the whole run so epochs compare.
  CropSet validation;
  {
    std::mt19937_64 vrng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<int> with_val;
    for (int s = 0; s < num_classes; ++s) {
      if (!speakers[s].validation.empty()) with_val.push_back(s);
    }
    for (int i = 0; !with_val.empty() && i < cfg.validation_size; ++i) {
      const int s = with_val[i % with_val.size()];
      const auto &utts = speakers[s].validation;
      std::uniform_int_distribution<std::size_t> pick(0, utts.size() - 1);
      validation.crops.push_back(RandomCrop(utts[pick(vrng)], crop, &vrng));
      validation.labels.push_back(s);
    }
  }

  std::size_t train_utts = 0;
  for (const auto &s : speakers) train_utts += s.train.size();
  const int per_epoch = cfg.examples_per_epoch > 0
                            ? cfg.examples_per_epoch
                            : static_cast<int>(train_utts);

  const AdamConfig adam = cfg.Adam();
  AdamState<float> adam_state;
  Classifier<float> grads = model.ZerosLike();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    CropSet examples;
    for (int i = 0; i < per_epoch; ++i) {
      const int s = i % num_classes;
      const auto &utts = speakers[s].train;
      std::uniform_int_distribution<std::size_t> pick(0, utts.size() - 1);
      examples.crops.push_back(RandomCrop(utts[pick(rng)], crop, &rng));
      examples.labels.push_back(s);
    }
    std::vector<std::size_t> order(examples.crops.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0;
    int hits = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<MatrixT<float>> seqs;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        seqs.push_back(CropFeatures(examples.crops[order[i]], cfg.feature_kind));
        labels.push_back(examples.labels[order[i]]);
      }
      for (auto t : grads.Tensors()) std::fill(t.begin(), t.end(), 0.0f);
      int batch_hits = 0;
      const float loss = ClassifierLossAndGradients<float>(
          model, PackBatch<float>(seqs), labels, &grads, &batch_hits);
      const auto params = model.Tensors();
      const auto grad_views = std::as_const(grads).Tensors();
      AdamStep<float>(params, grad_views, &adam_state, adam);

      result.step_losses.push_back(loss);
      loss_sum += static_cast<double>(loss) * static_cast<double>(labels.size());
      hits += batch_hits;
    }

    EpochLog log;
    log.epoch = epoch;
    log.steps = adam_state.step;
    log.mean_loss = loss_sum / static_cast<double>(order.size());
    log.train_accuracy =
        static_cast<double>(hits) / static_cast<double>(order.size());
    log.validation_accuracy =
        ClassificationAccuracy(model, validation, cfg.batch_size);
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return result;
}

}  // namespace blspk
