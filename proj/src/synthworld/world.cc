// src/synthworld/world.cc

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

#include "dlglc/synthworld/world.h"

#include <cmath>
#include <string>

#include "dlglc/numkit/error.h"

namespace dlglc {

namespace {

Tensor NormalVector(int dim, double stddev, Rng &rng) {
  Tensor t({static_cast<std::size_t>(dim)});
  for (double &v : t.values()) v = stddev * rng.Normal();
  return t;
}

void AddNoise(Tensor *t, double stddev, Rng &rng) {
  if (stddev == 0.0) return;
  for (double &v : t->values()) v += stddev * rng.Normal();
}

Tensor NoisyView(const Tensor &base, double content_std, double augment_std,
                 Rng &rng) {
  Tensor v = base;
  AddNoise(&v, content_std, rng);
  AddNoise(&v, augment_std, rng);
  return v;
}

}  // namespace

void ValidateWorldConfig(const WorldConfig &c) {
  auto bad = [](const std::string &what) { Fail(Errc::kInvalidConfig, what); };
  if (c.num_identities < 1) bad("num_identities must be positive");
  if (c.utterances_per_identity < 1) bad("utterances_per_identity must be positive");
  if (c.obs_dim_audio < 1 || c.obs_dim_visual < 1) bad("observation dims must be positive");
  if (c.channel_noise_std < 0 || c.content_noise_std_long < 0 ||
      c.content_noise_std_short < 0 || c.augment_noise_std < 0)
    bad("noise std must be >= 0");
  if (c.content_noise_std_short < c.content_noise_std_long)
    bad("short-crop noise must be >= long-crop noise");
  if (!(c.modality_correlation >= 0.0 && c.modality_correlation <= 1.0))
    bad("modality_correlation must lie in [0, 1]");
}

CropNoise CropNoiseFrom(const WorldConfig &c) {
  return CropNoise{c.content_noise_std_long, c.content_noise_std_short,
                   c.augment_noise_std};
}

WorldView World::View() const {
  return WorldView(utterances, CropNoiseFrom(config), config.obs_dim_audio,
                   config.obs_dim_visual);
}

World GenerateWorld(const WorldConfig &config) {
  ValidateWorldConfig(config);
  Rng root(config.seed);
  Rng centroid_rng = root.Split(1);
  Rng map_rng = root.Split(2);
  Rng utterance_rng = root.Split(3);
  Rng order_rng = root.Split(4);

  const int da = config.obs_dim_audio;
  const int dv = config.obs_dim_visual;
  const double rho = config.modality_correlation;

  World world;
  world.config = config;

  // Entries N(0, 1/da) keep the mapped latent at unit per-coordinate scale.
  world.modality_map = Tensor({static_cast<std::size_t>(dv), static_cast<std::size_t>(da)});
  for (double &v : world.modality_map.values())
    v = map_rng.Normal() / std::sqrt(static_cast<double>(da));

  // Standard-normal centroids: expected inter-centroid distance is
  // sqrt(2 * dim), well above the per-coordinate noise scales.
  const auto map = world.modality_map.AsMatrix();
  for (int i = 0; i < config.num_identities; ++i) {
    Identity id;
    id.audio_centroid = NormalVector(da, 1.0, centroid_rng);
    Tensor independent = NormalVector(dv, 1.0, centroid_rng);
    Eigen::VectorXd shared = map * id.audio_centroid.AsRow().transpose();
    id.visual_centroid = Tensor({static_cast<std::size_t>(dv)});
    for (int k = 0; k < dv; ++k)
      id.visual_centroid[k] =
          rho * shared(k) + std::sqrt(1.0 - rho * rho) * independent[k];
    world.identities.push_back(std::move(id));
  }

  // Utterance ids are a random permutation so that id order says nothing
  // about identity.
  const int total = config.num_identities * config.utterances_per_identity;
  std::vector<std::size_t> order = order_rng.Permutation(total);
  auto utterances = std::make_shared<std::vector<Utterance>>(total);
  TruthMap truth;
  truth.identity_of.assign(total, -1);
  for (int slot = 0; slot < total; ++slot) {
    int identity = slot / config.utterances_per_identity;
    int id = static_cast<int>(order[slot]);
    truth.identity_of[id] = identity;
  }
  for (int id = 0; id < total; ++id) {
    const Identity &ident = world.identities[truth.identity_of[id]];
    Utterance &u = (*utterances)[id];
    u.id = id;
    u.audio_base = ident.audio_centroid;
    AddNoise(&u.audio_base, config.channel_noise_std, utterance_rng);
    u.visual_base = ident.visual_centroid;
    AddNoise(&u.visual_base, config.channel_noise_std, utterance_rng);
  }
  world.utterances = std::move(utterances);
  world.truth = std::move(truth);
  return world;
}

CropSet SampleCrops(const Utterance &u, Modality m, const CropNoise &noise,
                    Rng &rng) {
  const Utterance *members[] = {&u};
  return SampleCropsClusterAware(members, m, noise, rng);
}

CropSet SampleCropsClusterAware(std::span<const Utterance *const> members,
                                Modality m, const CropNoise &noise, Rng &rng) {
  if (members.empty()) Fail(Errc::kEmptyCluster, "cluster has no members");
  CropSet set;
  for (int v = 0; v < 6; ++v) {
    // A single-member cluster consumes no index draws, so it reproduces
    // SampleCrops exactly.
    const Utterance &src =
        members.size() == 1 ? *members[0] : *members[rng.Index(members.size())];
    set.source_utterance_ids[v] = src.id;
    if (v < 2)
      set.long_views[v] = NoisyView(src.base(m), noise.content_long, noise.augment, rng);
    else
      set.short_views[v - 2] =
          NoisyView(src.base(m), noise.content_short, noise.augment, rng);
  }
  return set;
}

CropPair SampleCleanAugmentedPair(const Utterance &u, Modality m,
                                  const CropNoise &noise, Rng &rng) {
  CropPair pair;
  pair.clean = NoisyView(u.base(m), noise.content_long, 0.0, rng);
  pair.augmented = NoisyView(u.base(m), noise.content_long, noise.augment, rng);
  return pair;
}

CorruptedLabels CorruptLabels(std::span<const int> labels, double rate,
                              int num_classes, Rng &rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) Fail(Errc::kInvalidRate, "rate must lie in [0, 1]");
  for (int l : labels)
    if (l < 0 || l >= num_classes) Fail(Errc::kInvalidLabel, "label out of range");
  CorruptedLabels out;
  out.labels.assign(labels.begin(), labels.end());
  out.corrupted.assign(labels.size(), false);
  const std::size_t n = labels.size();
  const std::size_t count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  if (count == 0) return out;
  if (num_classes < 2) Fail(Errc::kInvalidRate, "cannot flip labels with one class");
  // Partial Fisher-Yates picks `count` distinct positions.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + rng.Index(n - i);
    std::swap(idx[i], idx[j]);
    std::size_t pos = idx[i];
    int shift = 1 + static_cast<int>(rng.Index(static_cast<std::size_t>(num_classes - 1)));
    out.labels[pos] = (labels[pos] + shift) % num_classes;
    out.corrupted[pos] = true;
  }
  return out;
}

TrialList MakeTrials(const World &world, int n_target, int n_nontarget,
                     Rng &rng) {
  if (!world.truth) Fail(Errc::kMissingInput, "trial construction needs the truth map");
  const TruthMap &truth = *world.truth;
  std::vector<std::vector<int>> by_identity(world.identities.size());
  for (std::size_t u = 0; u < truth.size(); ++u)
    by_identity.at(truth.identity_of[u]).push_back(static_cast<int>(u));
  std::vector<int> eligible;
  for (std::size_t i = 0; i < by_identity.size(); ++i)
    if (by_identity[i].size() >= 2) eligible.push_back(static_cast<int>(i));
  if (eligible.size() < 2)
    Fail(Errc::kInsufficientIdentities,
         "need two identities with at least two utterances each");

  TrialList list;
  for (int t = 0; t < n_target; ++t) {
    const auto &members = by_identity[eligible[rng.Index(eligible.size())]];
    std::size_t a = rng.Index(members.size());
    std::size_t b = rng.Index(members.size() - 1);
    if (b >= a) ++b;
    list.trials.push_back({members[a], members[b], true});
  }
  for (int t = 0; t < n_nontarget; ++t) {
    std::size_t ia = rng.Index(eligible.size());
    std::size_t ib = rng.Index(eligible.size() - 1);
    if (ib >= ia) ++ib;
    const auto &ma = by_identity[eligible[ia]];
    const auto &mb = by_identity[eligible[ib]];
    list.trials.push_back({ma[rng.Index(ma.size())], mb[rng.Index(mb.size())], false});
  }
  return list;
}

}  // namespace dlglc
