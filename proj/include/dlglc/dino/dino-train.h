// include/dlglc/dino/dino-train.h

// Copyright 2026  dlglc authors

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

#ifndef DLGLC_DINO_DINO_TRAIN_H_
#define DLGLC_DINO_DINO_TRAIN_H_

#include <functional>
#include <span>
#include <vector>

#include "dlglc/cluster/pseudo-labels.h"
#include "dlglc/dino/dino-loss.h"
#include "dlglc/synthworld/world.h"

namespace dlglc {

struct Stage1EpochStats {
  int epoch = 0;
  double loss_ce = 0.0;  // means over crop sets
  double loss_cons = 0.0;
  double loss_total = 0.0;
  double lr = 0.0;          // at the last step of the epoch
  double ema_lambda = 0.0;  // likewise
  bool cluster_aware = false;
  int ca_clusters = 0;
};

struct Stage1Options {
  // 0 = full pass over the utterances.
  int max_batches_per_epoch = 0;
  std::function<void(const Stage1EpochStats &, const ModelState &)> on_epoch;
  // Sampled crop sets, plus the current cluster of every utterance (empty
  // before cluster-aware sampling starts).
  std::function<void(std::span<const CropSet>, std::span<const int>)> on_batch;
};

struct Stage1Result {
  ModelState state;
  std::vector<Stage1EpochStats> epochs;
};

// Loss of one batch of crop sets: student rows bound as given (leaves or
// constants), teacher evaluated as constants.
struct DinoBatch {
  DinoTapeLoss loss;
  Matrix teacher_logits;  // 2 rows per crop set, before centering
};
DinoBatch BuildDinoBatchLoss(ad::Tape &tape, std::span<const ad::Var> student_bound,
                             const ModelState &state, std::span<const CropSet> crops,
                             const DinoHyper &h);

double Stage1LearningRate(const DinoHyper &h, std::int64_t step, std::int64_t total_steps);
double Stage1EmaLambda(const DinoHyper &h, std::int64_t step, std::int64_t total_steps);

Stage1Result TrainStage1(const WorldView &view, Modality modality,
                         const EncoderConfig &cfg, const DinoHyper &h, Rng &rng,
                         const Stage1Options &opts = {});

// Pre-head embedding of every utterance base, indexed by utterance id.
std::vector<Tensor> EmbedUtterances(std::span<const Param> params,
                                    const EncoderConfig &cfg, const WorldView &view,
                                    Modality modality);

// Embedder over utterance bases for pseudo-labelling; keeps a reference to
// params.
Embedder MakeEmbedder(std::span<const Param> params, const EncoderConfig &cfg,
                      Modality modality);

}  // namespace dlglc

#endif  // DLGLC_DINO_DINO_TRAIN_H_
