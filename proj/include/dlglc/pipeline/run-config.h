// include/dlglc/pipeline/run-config.h

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

#ifndef DLGLC_PIPELINE_RUN_CONFIG_H_
#define DLGLC_PIPELINE_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dlglc/cluster/kmeans.h"
#include "dlglc/dino/dino-loss.h"
#include "dlglc/eval/metrics.h"
#include "dlglc/lossgate/aam.h"
#include "dlglc/lossgate/dlg-lc.h"
#include "dlglc/lossgate/gate.h"
#include "dlglc/synthworld/world.h"

namespace dlglc {

enum class ModalityMode { kAudioOnly, kAudioVisual };
std::string_view ModalityModeName(ModalityMode m);
ModalityMode ParseModalityMode(std::string_view s);

struct Stage2Hyper {
  int epochs = 60;
  int batch_size = 50;
  ScheduleSpec lr_schedule{0.1, 1e-4, 0};
  double warmup_fraction = 0.1;
  double weight_decay = 5e-3;
};

struct EvalConfig {
  int n_target = 20000;
  int n_nontarget = 20000;
  DcfConfig dcf;
};

struct RunConfig {
  WorldConfig world;
  EncoderConfig encoder_audio;
  EncoderConfig encoder_visual{.input_dim = 24};
  DinoHyper dino;
  Stage2Hyper stage2;
  GateState gate;  // tau2 and sharpness; tau1 starts open
  AamConfig aam;
  EvalConfig eval;
  KmeansOptions kmeans{100, 100};
  int num_iterations = 3;
  int num_clusters = 20;
  ModalityMode modality_mode = ModalityMode::kAudioOnly;
  SelectionMode selection_mode = SelectionMode::kDlgLc;
  // Log-loss threshold for selection mode fixed.
  double fixed_tau1 = 0.0;
  double label_noise_rate = 0.0;
  bool warm_start = false;
  std::uint64_t seed = 1;
};

// Checks every nested invariant; encoder input widths must match the world.
void ValidateRunConfig(const RunConfig &cfg);

// Sectioned key = value text. Missing keys keep their defaults; unknown
// sections or keys, and unparsable values, throw InvalidConfig.
RunConfig ParseRunConfig(const std::string &text);
RunConfig LoadRunConfig(const std::filesystem::path &path);
// Every key, in a fixed order; parses back to an equal config.
std::string RunConfigToText(const RunConfig &cfg);
// FNV-1a of the canonical text, 16 hex digits.
std::string ConfigHash(const RunConfig &cfg);

// Seed applied to both the run and the world.
void ApplySeed(RunConfig &cfg, std::uint64_t seed);

}  // namespace dlglc

#endif  // DLGLC_PIPELINE_RUN_CONFIG_H_
