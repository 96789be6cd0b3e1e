// include/blspk/net/trainer.h

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

#ifndef BLSPK_NET_TRAINER_H_
#define BLSPK_NET_TRAINER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "blspk/corpus.h"
#include "blspk/dsp/features.h"
#include "blspk/net/adam.h"
#include "blspk/net/blstm.h"

namespace blspk {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 100;
  int epochs = 30;
  double segment_len_s = 0.5;  // crop length, within [0.25, 2.0]
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t rng_seed = 0;

  FeatureKind feature_kind = FeatureKind::kSpecdB;
  int hidden = kHiddenUnits;
  int num_layers = kNumBlstmLayers;

  // Crops drawn per epoch; 0 means one per training utterance.
  int examples_per_epoch = 0;
  // Crops in the per-epoch validation draw; 0 disables validation and the
  // held-out split.
  int validation_size = 8000;

  AdamConfig Adam() const {
    return {learning_rate, adam_beta1, adam_beta2, adam_eps};
  }
};

struct EpochLog {
  int epoch = 0;
  std::int64_t steps = 0;  // cumulative optimizer steps
  double mean_loss = 0;
  double train_accuracy = 0;
  double validation_accuracy = 0;  // NaN when validation is disabled
};

struct TrainResult {
  Classifier<float> model;
  std::vector<EpochLog> epochs;
  std::vector<double> step_losses;
};

// Fixed-length crops of voice-active audio with class labels.
struct CropSet {
  std::vector<AudioSegment> crops;
  std::vector<int> labels;
};

// Trains the classification network. Every epoch draws
// examples_per_epoch random crops (speakers in round-robin, random
// utterance, random offset), shuffles them and runs Adam over minibatches,
// then scores a fixed validation draw taken from the last utterance of
// each speaker. Bit-reproducible for a fixed rng_seed.
//
// Throws kCorpusTooSmall with fewer than two speakers and
// kSegmentTooShort when a speaker has no utterance longer than the crop
// after VAD.
TrainResult Train(const Corpus &corpus, const TrainConfig &cfg,
                  const std::function<void(const EpochLog &)> &on_epoch = {});

// Classification accuracy of `model` on labeled crops.
double ClassificationAccuracy(const Classifier<float> &model,
                              const CropSet &set, int batch_size);

}  // namespace blspk

#endif  // BLSPK_NET_TRAINER_H_
