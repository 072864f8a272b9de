// include/dlglc/dino/dino-loss.h

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

#ifndef DLGLC_DINO_DINO_LOSS_H_
#define DLGLC_DINO_DINO_LOSS_H_

#include <cstdint>
#include <span>

#include "dlglc/dino/encoder.h"
#include "dlglc/numkit/autodiff.h"
#include "dlglc/numkit/tensor.h"
#include "dlglc/numkit/vector-ops.h"

namespace dlglc {

// Chance that a batch of N draws (with replacement) from S equally likely
// speakers contains at least one repeat.
double RepeatProbability(int num_speakers, int batch_size);

struct DinoHyper {
  double teacher_temp = 0.04;
  double student_temp = 0.1;
  double consistency_weight = 1.0;
  double center_momentum = 0.9;
  bool include_self_pairs = false;
  // total_steps = 0 stretches a schedule over the whole run.
  ScheduleSpec ema_schedule{0.996, 1.0, 0};
  ScheduleSpec lr_schedule{0.05, 1e-4, 0};
  double warmup_fraction = 0.13;
  int epochs = 30;
  int batch_size = 32;
  int ca_warmup_epochs = 18;
  int ca_cluster_every = 3;
  int ca_num_clusters = 30;
};

void ValidateDinoHyper(const DinoHyper &h);

void to_json(nlohmann::json &j, const DinoHyper &h);
void from_json(const nlohmann::json &j, DinoHyper &h);

struct ModelState {
  EncoderConfig cfg;
  Params student;
  Params teacher;
  Tensor center;
  std::int64_t step = 0;
};

// Student initialized from rng, teacher a copy, zero center.
ModelState InitModelState(const EncoderConfig &cfg, Rng &rng);

// softmax((logits - center) / teacher_temp).
Tensor TeacherProbs(const Tensor &head_logits, const Tensor &center,
                    double teacher_temp);

// m * center + (1 - m) * mean(batch).
Tensor UpdateCenter(const Tensor &center, std::span<const Tensor> batch_logits,
                    double momentum);

// Cross-entropy from each long-view teacher distribution to the student's
// temperature-softmax of every view; views are ordered long 0, long 1,
// short 0..3 for the student.
double DinoCeLoss(std::span<const Tensor> teacher_probs,
                  std::span<const Tensor> student_logits, double student_temp,
                  bool include_self_pairs = false);

// sum over long e and every other view e' of 1 - cos(e, e').
double ConsistencyLoss(std::span<const Tensor> embeddings);

double TotalDinoLoss(double ce, double cons, double alpha);

// teacher <- lambda * teacher + (1 - lambda) * student.
void EmaUpdate(ModelState &state, double lambda);

// Batched form of the per-crop-set loss, averaged over crop sets. Student rows
// are ordered crop-set major (row 6b + v), teacher rows likewise (2b + t).
struct DinoTapeLoss {
  ad::Var ce;
  ad::Var cons;
  ad::Var total;
};
DinoTapeLoss DinoLossOnTape(ad::Tape &tape, ad::Var student_logits,
                            ad::Var student_embeddings,
                            const Matrix &teacher_probs, const DinoHyper &h);

}  // namespace dlglc

#endif  // DLGLC_DINO_DINO_LOSS_H_
