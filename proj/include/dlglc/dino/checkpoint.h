// include/dlglc/dino/checkpoint.h

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

#ifndef DLGLC_DINO_CHECKPOINT_H_
#define DLGLC_DINO_CHECKPOINT_H_

#include <filesystem>

#include "json.hpp"
#include "dlglc/dino/dino-loss.h"

namespace dlglc {

inline constexpr int kCheckpointVersion = 1;

struct Stage1Checkpoint {
  ModelState state;
  DinoHyper hyper;
};

// {version, kind, cfg, hyper, step, student, teacher, center}
nlohmann::json Stage1CheckpointToJson(const ModelState &state, const DinoHyper &hyper);
Stage1Checkpoint Stage1CheckpointFromJson(const nlohmann::json &j);

void SaveStage1Checkpoint(const std::filesystem::path &path, const ModelState &state,
                          const DinoHyper &hyper);
// Throws MissingInput if the file does not exist, Format if it does not parse.
Stage1Checkpoint LoadStage1Checkpoint(const std::filesystem::path &path);


}  // namespace dlglc

#endif  // DLGLC_DINO_CHECKPOINT_H_
