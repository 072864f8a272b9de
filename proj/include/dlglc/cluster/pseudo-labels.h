// include/dlglc/cluster/pseudo-labels.h

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

#ifndef DLGLC_CLUSTER_PSEUDO_LABELS_H_
#define DLGLC_CLUSTER_PSEUDO_LABELS_H_

#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "dlglc/cluster/kmeans.h"
#include "dlglc/synthworld/world.h"

namespace dlglc {

enum class LabelModality { kAudio, kVisual, kJoint };

std::string_view LabelModalityName(LabelModality m);
LabelModality ParseLabelModality(std::string_view name);

// Cluster id for every training utterance, indexed by utterance id.
struct PseudoLabelStore {
  std::vector<int> labels;
  int num_clusters = 0;
  int iteration = 0;
  LabelModality modality = LabelModality::kAudio;
};

// Throws InvalidLabel if a label is outside [0, num_clusters).
void ValidateStore(const PseudoLabelStore &store, std::size_t num_utterances);

// Each modality is l2-normalized on its own, then the two are concatenated.
Tensor JointEmbed(const Tensor &audio, const Tensor &visual);

// Maps an utterance to an embedding with a trained encoder.
using Embedder = std::function<Tensor(const Utterance &)>;

// Embeds every utterance base with the encoder(s) for `modality` (visual may
// be empty for audio-only), l2-normalizes, and runs k-means.
PseudoLabelStore AssignPseudoLabels(const WorldView &view, LabelModality modality,
                                    const Embedder &audio, const Embedder &visual,
                                    int k, int iteration, Rng &rng,
                                    const KmeansOptions &opts = {});

// The clustering input for one utterance (normalized single-modality or joint).
Tensor ClusteringFeature(const Utterance &u, LabelModality modality,
                         const Embedder &audio, const Embedder &visual);

inline constexpr int kLabelFileVersion = 1;
// {version, iteration, modality, num_clusters, labels: [[utterance, cluster], ...]}
nlohmann::json StoreToJson(const PseudoLabelStore &store);
PseudoLabelStore StoreFromJson(const nlohmann::json &j);
void SaveStore(const std::filesystem::path &path, const PseudoLabelStore &store);
PseudoLabelStore LoadStore(const std::filesystem::path &path);

}  // namespace dlglc

#endif  // DLGLC_CLUSTER_PSEUDO_LABELS_H_
