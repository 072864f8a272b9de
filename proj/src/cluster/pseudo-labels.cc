// src/cluster/pseudo-labels.cc

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

#include "dlglc/cluster/pseudo-labels.h"

#include <string>

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/json-file.h"
#include "dlglc/numkit/vector-ops.h"

namespace dlglc {

using nlohmann::json;

std::string_view LabelModalityName(LabelModality m) {
  switch (m) {
    case LabelModality::kAudio: return "audio";
    case LabelModality::kVisual: return "visual";
    case LabelModality::kJoint: return "joint";
  }
  return "audio";
}

LabelModality ParseLabelModality(std::string_view name) {
  if (name == "audio") return LabelModality::kAudio;
  if (name == "visual") return LabelModality::kVisual;
  if (name == "joint") return LabelModality::kJoint;
  Fail(Errc::kFormat, "unknown modality '" + std::string(name) + "'");
}

void ValidateStore(const PseudoLabelStore &store, std::size_t num_utterances) {
  if (store.labels.size() != num_utterances)
    Fail(Errc::kLengthMismatch, "label store does not cover every utterance");
  for (int l : store.labels)
    if (l < 0 || l >= store.num_clusters)
      Fail(Errc::kInvalidLabel, "cluster id outside [0, num_clusters)");
}

Tensor JointEmbed(const Tensor &audio, const Tensor &visual) {
  Tensor a = L2Normalize(audio);
  Tensor v = L2Normalize(visual);
  std::vector<double> joint(a.data());
  joint.insert(joint.end(), v.data().begin(), v.data().end());
  return Tensor::Vector(std::move(joint));
}

Tensor ClusteringFeature(const Utterance &u, LabelModality modality,
                         const Embedder &audio, const Embedder &visual) {
  switch (modality) {
    case LabelModality::kAudio: return L2Normalize(audio(u));
    case LabelModality::kVisual: return L2Normalize(visual(u));
    case LabelModality::kJoint: return JointEmbed(audio(u), visual(u));
  }
  Fail(Errc::kInvalidConfig, "unknown modality");
}

PseudoLabelStore AssignPseudoLabels(const WorldView &view, LabelModality modality,
                                    const Embedder &audio, const Embedder &visual,
                                    int k, int iteration, Rng &rng,
                                    const KmeansOptions &opts) {
  bool needs_audio = modality != LabelModality::kVisual;
  bool needs_visual = modality != LabelModality::kAudio;
  if ((needs_audio && !audio) || (needs_visual && !visual))
    Fail(Errc::kMissingInput, "no encoder for the requested modality");
  std::vector<Tensor> features;
  features.reserve(view.size());
  for (const Utterance &u : view.utterances())
    features.push_back(ClusteringFeature(u, modality, audio, visual));
  KmeansResult km = Kmeans(features, k, rng, opts);
  PseudoLabelStore store;
  store.labels = std::move(km.assignments);
  store.num_clusters = k;
  store.iteration = iteration;
  store.modality = modality;
  return store;
}

json StoreToJson(const PseudoLabelStore &store) {
  json labels = json::array();
  for (std::size_t i = 0; i < store.labels.size(); ++i)
    labels.push_back({static_cast<int>(i), store.labels[i]});
  return json{{"version", kLabelFileVersion},
              {"iteration", store.iteration},
              {"modality", LabelModalityName(store.modality)},
              {"num_clusters", store.num_clusters},
              {"labels", std::move(labels)}};
}

PseudoLabelStore StoreFromJson(const json &j) {
  PseudoLabelStore s;
  try {
    if (j.at("version").get<int>() != kLabelFileVersion)
      Fail(Errc::kFormat, "unsupported label file version");
    s.iteration = j.at("iteration").get<int>();
    s.modality = ParseLabelModality(j.at("modality").get<std::string>());
    s.num_clusters = j.at("num_clusters").get<int>();
    for (const json &pair : j.at("labels")) {
      if (pair.at(0).get<std::size_t>() != s.labels.size())
        Fail(Errc::kFormat, "labels must be ordered by utterance id");
      s.labels.push_back(pair.at(1).get<int>());
    }
  } catch (const json::exception &e) {
    Fail(Errc::kFormat, std::string("bad label store: ") + e.what());
  }
  ValidateStore(s, s.labels.size());
  return s;
}

void SaveStore(const std::filesystem::path &path, const PseudoLabelStore &store) {
  WriteJsonFile(path, StoreToJson(store));
}

PseudoLabelStore LoadStore(const std::filesystem::path &path) {
  return StoreFromJson(ReadJsonFile(path));
}

}  // namespace dlglc
