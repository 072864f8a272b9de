// include/dlglc/synthworld/world.h

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

#ifndef DLGLC_SYNTHWORLD_WORLD_H_
#define DLGLC_SYNTHWORLD_WORLD_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dlglc/numkit/rng.h"
#include "dlglc/numkit/tensor.h"

namespace dlglc {

enum class Modality { kAudio, kVisual };

struct WorldConfig {
  int num_identities = 20;
  int utterances_per_identity = 50;
  int obs_dim_audio = 32;
  int obs_dim_visual = 24;
  double channel_noise_std = 1.0;
  double content_noise_std_long = 0.5;
  double content_noise_std_short = 0.8;
  double augment_noise_std = 0.5;
  double modality_correlation = 0.8;
  std::uint64_t seed = 1;
};

// Throws InvalidConfig when a field is out of range.
void ValidateWorldConfig(const WorldConfig &config);

struct Identity {
  Tensor audio_centroid;
  Tensor visual_centroid;
};

struct Utterance {
  int id = 0;
  Tensor audio_base;
  Tensor visual_base;

  const Tensor &base(Modality m) const {
    return m == Modality::kAudio ? audio_base : visual_base;
  }
};

// Hidden ground truth: identity of each utterance, indexed by utterance id.
struct TruthMap {
  std::vector<int> identity_of;

  int operator[](int utterance_id) const { return identity_of.at(utterance_id); }
  std::size_t size() const { return identity_of.size(); }
};

struct CropNoise {
  double content_long = 0.0;
  double content_short = 0.0;
  double augment = 0.0;
};

CropNoise CropNoiseFrom(const WorldConfig &config);

// The only world surface the training path sees: utterances and noise
// levels, with no identity information.
class WorldView {
 public:
  WorldView(std::shared_ptr<const std::vector<Utterance>> utterances,
            CropNoise noise, int obs_dim_audio, int obs_dim_visual)
      : utterances_(std::move(utterances)), noise_(noise),
        obs_dim_audio_(obs_dim_audio), obs_dim_visual_(obs_dim_visual) {}

  std::span<const Utterance> utterances() const { return *utterances_; }
  std::size_t size() const { return utterances_->size(); }
  const Utterance &utterance(std::size_t i) const { return (*utterances_)[i]; }
  const CropNoise &noise() const { return noise_; }
  int obs_dim(Modality m) const {
    return m == Modality::kAudio ? obs_dim_audio_ : obs_dim_visual_;
  }

 private:
  std::shared_ptr<const std::vector<Utterance>> utterances_;
  CropNoise noise_;
  int obs_dim_audio_;
  int obs_dim_visual_;
};

struct World {
  WorldConfig config;
  std::vector<Identity> identities;
  // Fixed linear map from the audio latent space to the visual one.
  Tensor modality_map;
  std::shared_ptr<const std::vector<Utterance>> utterances;
  // Absent when the world was loaded without its truth sidecar.
  std::optional<TruthMap> truth;

  WorldView View() const;
  std::size_t num_utterances() const { return utterances->size(); }
};

World GenerateWorld(const WorldConfig &config);

// Two long and four short views of one source, plus the utterance each view
// was drawn from.
struct CropSet {
  std::array<Tensor, 2> long_views;
  std::array<Tensor, 4> short_views;
  std::array<int, 6> source_utterance_ids{};

  // Views in student order: long 0, long 1, short 0..3.
  const Tensor &view(int i) const {
    return i < 2 ? long_views[i] : short_views[i - 2];
  }
};

CropSet SampleCrops(const Utterance &u, Modality m, const CropNoise &noise,
                    Rng &rng);
// Every view comes from an independently drawn member (with replacement).
CropSet SampleCropsClusterAware(std::span<const Utterance *const> members,
                                Modality m, const CropNoise &noise, Rng &rng);

// One clean long crop and one augmented long crop of the same utterance.
struct CropPair {
  Tensor clean;
  Tensor augmented;
};
CropPair SampleCleanAugmentedPair(const Utterance &u, Modality m,
                                  const CropNoise &noise, Rng &rng);

struct CorruptedLabels {
  std::vector<int> labels;
  // True where the label was replaced. Evaluation use only.
  std::vector<bool> corrupted;
};

CorruptedLabels CorruptLabels(std::span<const int> labels, double rate,
                              int num_classes, Rng &rng);

struct Trial {
  int utterance_a = 0;
  int utterance_b = 0;
  bool is_target = false;
};

struct TrialList {
  std::vector<Trial> trials;
};

TrialList MakeTrials(const World &world, int n_target, int n_nontarget,
                     Rng &rng);

}  // namespace dlglc

#endif  // DLGLC_SYNTHWORLD_WORLD_H_
