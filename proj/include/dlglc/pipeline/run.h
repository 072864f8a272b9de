// include/dlglc/pipeline/run.h

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

#ifndef DLGLC_PIPELINE_RUN_H_
#define DLGLC_PIPELINE_RUN_H_

#include <filesystem>
#include <optional>
#include <vector>

#include "dlglc/cluster/pseudo-labels.h"
#include "dlglc/pipeline/report.h"
#include "dlglc/pipeline/run-config.h"
#include "dlglc/pipeline/stage2.h"
#include "dlglc/synthworld/world.h"

namespace dlglc {

inline constexpr int kStage2CheckpointVersion = 1;

// Everything a run reads. world.truth is the truth sidecar: when absent, only
// the evaluation rows that need it are dropped.
struct RunContext {
  RunConfig cfg;
  World world;
  TrialList trials;
  // Empty: nothing is written.
  std::filesystem::path out;
};

// A generated world keeps its truth and draws trials from it.
RunContext ContextFromConfig(const RunConfig &cfg, const std::filesystem::path &out);
// Loaded world: truth only from the sidecar, when given.
RunContext ContextFromFiles(const RunConfig &cfg, const std::filesystem::path &world_path,
                            const std::optional<std::filesystem::path> &truth_path,
                            const std::filesystem::path &out);

// An embedding model for one modality: a Stage I teacher or a Stage II
// encoder. Only the encoder layers are used for embedding.
struct TrainedEncoder {
  Modality modality = Modality::kAudio;
  EncoderConfig cfg;
  Params params;
};

struct Evaluation {
  double eer = 0.0, min_dcf = 0.0;
  std::optional<double> eer_visual, min_dcf_visual;
  // Pseudo-labels from this model's embeddings, for the next iteration.
  PseudoLabelStore labels;
  std::optional<double> nmi, purity;
};

struct StageOutcome {
  std::vector<TrainedEncoder> encoders;  // audio, then visual
  std::vector<Stage2Model> stage2;       // empty for Stage I
  Evaluation eval;
};

// Stage I for every modality in use, then evaluation (iteration 0).
StageOutcome RunStage1(const RunContext &ctx, RunReport &report);

// Iteration k >= 1 from the previous outcome: corrupt the previous labels,
// train, evaluate.
StageOutcome RunIteration(const RunContext &ctx, int iteration, const StageOutcome &prev,
                          RunReport &report);

// Stage I then every iteration; writes report.jsonl when ctx.out is set.
RunReport RunFull(const RunContext &ctx);

// Evaluation of a model set on the context's trials and truth.
Evaluation Evaluate(const RunContext &ctx, std::span<const TrainedEncoder> encoders, int iteration);

// Checkpoint and label files of a run directory.
std::filesystem::path Stage1CheckpointPath(const std::filesystem::path &out, Modality m);
std::filesystem::path Stage2CheckpointPath(const std::filesystem::path &out, int iteration, Modality m);
std::filesystem::path LabelsPath(const std::filesystem::path &out, int iteration);

// {version, kind, iteration, modality, cfg, num_classes, params}
void SaveStage2Checkpoint(const std::filesystem::path &path, const Stage2Model &model, int iteration);
Stage2Model LoadStage2Checkpoint(const std::filesystem::path &path);

// Reloads the outcome of iteration k (0 = Stage I) from a run directory.
// Throws MissingInput when a file is absent.
StageOutcome LoadOutcome(const RunContext &ctx, int iteration);

// Loads a single checkpoint file of either stage as an encoder.
TrainedEncoder LoadEncoder(const std::filesystem::path &path);

}  // namespace dlglc

#endif  // DLGLC_PIPELINE_RUN_H_
