// include/dlglc/synthworld/world-io.h

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

#ifndef DLGLC_SYNTHWORLD_WORLD_IO_H_
#define DLGLC_SYNTHWORLD_WORLD_IO_H_

#include <filesystem>

#include "json.hpp"
#include "dlglc/synthworld/world.h"

namespace dlglc {

inline constexpr int kWorldFileVersion = 1;

nlohmann::json WorldConfigToJson(const WorldConfig &config);
WorldConfig WorldConfigFromJson(const nlohmann::json &j);

// World file: {version, config, identities, modality_map, utterances, trials}.
// The truth map never goes into this file.
void SaveWorld(const std::filesystem::path &path, const World &world,
               const TrialList &trials);

struct LoadedWorld {
  World world;  // world.truth is empty
  TrialList trials;
};
LoadedWorld LoadWorld(const std::filesystem::path &path);

// Truth sidecar: {version, identity_of}.
void SaveTruth(const std::filesystem::path &path, const TruthMap &truth);
TruthMap LoadTruth(const std::filesystem::path &path);

}  // namespace dlglc

#endif  // DLGLC_SYNTHWORLD_WORLD_IO_H_
