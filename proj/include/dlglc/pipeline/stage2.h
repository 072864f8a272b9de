// include/dlglc/pipeline/stage2.h

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

#ifndef DLGLC_PIPELINE_STAGE2_H_
#define DLGLC_PIPELINE_STAGE2_H_

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dlglc/dino/encoder.h"
#include "dlglc/lossgate/dlg-lc.h"
#include "dlglc/pipeline/run-config.h"
#include "dlglc/synthworld/world.h"

namespace dlglc {

// Encoder layers followed by the AAM class matrix [num_classes x embed_dim].
struct Stage2Model {
  Modality modality = Modality::kAudio;
  EncoderConfig cfg;
  Params params;
  int num_classes = 0;

  std::span<const Param> encoder() const {
    return std::span<const Param>(params).first(params.size() - 1);
  }
};

Stage2Model InitStage2Model(Modality modality, const EncoderConfig &cfg, int num_classes,
                            Rng &rng);

struct GateEpochStats {
  Modality modality = Modality::kAudio;
  double tau1 = 0.0;  // in force during the epoch
  int reliable = 0, corrected = 0, skipped = 0, hard_label = 0;
  // Label accuracy of the reliable subset and of every sample; present only
  // when label correctness was supplied.
  std::optional<double> selected_precision;
  std::optional<double> full_precision;
  // Threshold refresh at the end of the epoch (dlg modes).
  std::optional<RefreshStatus> refresh;
  std::optional<Gmm2> gmm;
  double next_tau1 = 0.0;

  double selection_rate() const {
    const int n = reliable + corrected + skipped + hard_label;
    return n ? static_cast<double>(reliable) / n : 0.0;
  }
};

struct Stage2EpochStats {
  int epoch = 0;
  double loss = 0.0;  // mean batch loss
  double lr = 0.0;
  std::vector<GateEpochStats> gates;  // one per model
};

struct Stage2Options {
  // Evaluation only: whether each utterance's training label is right.
  std::span<const bool> label_correct;
  // Audits of the finished epoch, one list per model.
  std::function<void(const Stage2EpochStats &, const std::vector<std::vector<SampleAudit>> &)>
      on_epoch;
};

struct Stage2Result {
  std::vector<Stage2Model> models;
  std::vector<Stage2EpochStats> epochs;
};

// Trains one encoder (audio only) or two (audio and visual) on the given
// labels with the configured selection mode. `init` replaces the fresh
// initialization when non-empty.
Stage2Result TrainStage2(const WorldView &view, const RunConfig &cfg,
                         std::span<const int> labels, int num_classes, Rng &rng,
                         const Stage2Options &opts = {},
                         std::vector<Stage2Model> init = {});

// Embedding of every utterance base, indexed by utterance id.
std::vector<Tensor> EmbedStage2(const Stage2Model &model, const WorldView &view);

}  // namespace dlglc

#endif  // DLGLC_PIPELINE_STAGE2_H_
