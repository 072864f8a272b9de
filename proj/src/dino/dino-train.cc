// src/dino/dino-train.cc

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

#include "dlglc/dino/dino-train.h"

#include <algorithm>
#include <cmath>

#include "dlglc/cluster/kmeans.h"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/sgd.h"

namespace dlglc {

namespace {

// Rng stream tags.
constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kEpochStream = 12;

Matrix StackViews(std::span<const CropSet> crops, bool long_only) {
  const int per = long_only ? 2 : 6;
  const Eigen::Index d = static_cast<Eigen::Index>(crops[0].long_views[0].size());
  Matrix x(static_cast<Eigen::Index>(crops.size()) * per, d);
  for (std::size_t b = 0; b < crops.size(); ++b)
    for (int v = 0; v < per; ++v) x.row(static_cast<Eigen::Index>(b) * per + v) = crops[b].view(v).AsRow();
  return x;
}

Matrix UtteranceMatrix(const WorldView &view, Modality modality) {
  const Eigen::Index d = view.obs_dim(modality);
  Matrix x(static_cast<Eigen::Index>(view.size()), d);
  for (std::size_t i = 0; i < view.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = view.utterance(i).base(modality).AsRow();
  return x;
}

// Members of every teacher-embedding cluster, indexed by utterance.
std::vector<std::vector<const Utterance *>> ClusterMembers(const ModelState &state,
                                                           const WorldView &view,
                                                           Modality modality, int k,
                                                           Rng &rng, int *used_k,
                                                           std::vector<int> *cluster_of) {
  Matrix emb = EmbedRows(state.teacher, UtteranceMatrix(view, modality), state.cfg);
  std::vector<Tensor> pts;
  pts.reserve(view.size());
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    RowVector r = emb.row(i);
    double n = r.norm();
    pts.push_back(Tensor::FromRow(n > 0 ? RowVector(r / n) : r));
  }
  k = std::min<int>(k, static_cast<int>(view.size()));
  KmeansResult km = Kmeans(pts, k, rng);
  *used_k = k;
  *cluster_of = km.assignments;
  std::vector<std::vector<const Utterance *>> clusters(k);
  for (std::size_t i = 0; i < view.size(); ++i) clusters[km.assignments[i]].push_back(&view.utterance(i));
  std::vector<std::vector<const Utterance *>> members(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) members[i] = clusters[km.assignments[i]];
  return members;
}

std::int64_t ResolveSteps(const ScheduleSpec &s, std::int64_t run_steps) {
  return s.total_steps > 0 ? s.total_steps : run_steps;
}

}  // namespace

double Stage1LearningRate(const DinoHyper &h, std::int64_t step, std::int64_t total_steps) {
  const std::int64_t total = std::max<std::int64_t>(1, ResolveSteps(h.lr_schedule, total_steps));
  step = std::clamp<std::int64_t>(step, 0, total - 1);
  const auto warmup = static_cast<std::int64_t>(std::floor(h.warmup_fraction * total));
  if (step < warmup) return h.lr_schedule.start * static_cast<double>(step + 1) / warmup;
  ScheduleSpec decay{h.lr_schedule.start, h.lr_schedule.end,
                     std::max<std::int64_t>(1, total - 1 - warmup)};
  return CosineSchedule(std::min(step - warmup, decay.total_steps), decay);
}

double Stage1EmaLambda(const DinoHyper &h, std::int64_t step, std::int64_t total_steps) {
  ScheduleSpec s = h.ema_schedule;
  s.total_steps = std::max<std::int64_t>(1, ResolveSteps(s, total_steps) - 1);
  return CosineSchedule(std::clamp<std::int64_t>(step, 0, s.total_steps), s);
}

DinoBatch BuildDinoBatchLoss(ad::Tape &tape, std::span<const ad::Var> student_bound,
                             const ModelState &state, std::span<const CropSet> crops,
                             const DinoHyper &h) {
  if (crops.empty()) Fail(Errc::kEmptyBatch, "dino batch has no crop sets");
  Matrix teacher_logits = HeadLogitsRows(state.teacher, StackViews(crops, true), state.cfg);
  Matrix centered = teacher_logits.rowwise() - state.center.AsRow();
  Matrix probs;
  kernels::SoftmaxRows(centered, h.teacher_temp, &probs);

  TapeOutputs s = ForwardOnTape(tape, student_bound, tape.Constant(StackViews(crops, false)),
                                state.cfg, true);
  DinoBatch out{DinoLossOnTape(tape, s.logits, s.embedding, probs, h), std::move(teacher_logits)};
  return out;
}

Stage1Result TrainStage1(const WorldView &view, Modality modality,
                         const EncoderConfig &cfg, const DinoHyper &h, Rng &rng,
                         const Stage1Options &opts) {
  ValidateEncoderConfig(cfg);
  ValidateDinoHyper(h);
  if (cfg.input_dim != view.obs_dim(modality))
    Fail(Errc::kShapeMismatch, "encoder input_dim does not match the modality");
  if (view.size() == 0) Fail(Errc::kEmptyInput, "world has no utterances");

  Rng init_rng = rng.Split(kInitStream);
  Stage1Result result{InitModelState(cfg, init_rng), {}};
  ModelState &state = result.state;

  const auto n = static_cast<std::int64_t>(view.size());
  std::int64_t batches = (n + h.batch_size - 1) / h.batch_size;
  if (opts.max_batches_per_epoch > 0) batches = std::min<std::int64_t>(batches, opts.max_batches_per_epoch);
  const std::int64_t total_steps = batches * h.epochs;

  Sgd sgd;
  std::vector<std::vector<const Utterance *>> members;
  std::vector<int> cluster_of;
  int ca_clusters = 0;
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    Rng erng = rng.Split(kEpochStream).Split(static_cast<std::uint64_t>(epoch));
    Rng cluster_rng = erng.Split(1), order_rng = erng.Split(2), crop_rng = erng.Split(3);
    const bool ca = epoch >= h.ca_warmup_epochs;
    if (ca && (epoch - h.ca_warmup_epochs) % h.ca_cluster_every == 0)
      members = ClusterMembers(state, view, modality, h.ca_num_clusters, cluster_rng, &ca_clusters,
                               &cluster_of);

    std::vector<std::size_t> order = order_rng.Permutation(view.size());
    Stage1EpochStats stats;
    stats.epoch = epoch;
    stats.cluster_aware = ca;
    stats.ca_clusters = ca ? ca_clusters : 0;
    double sets_seen = 0;
    for (std::int64_t b = 0; b < batches; ++b) {
      std::vector<CropSet> crops;
      for (std::int64_t i = b * h.batch_size; i < std::min(n, (b + 1) * h.batch_size); ++i) {
        const Utterance &u = view.utterance(order[i]);
        if (ca)
          crops.push_back(SampleCropsClusterAware(members[u.id], modality, view.noise(), crop_rng));
        else
          crops.push_back(SampleCrops(u, modality, view.noise(), crop_rng));
      }
      if (opts.on_batch) opts.on_batch(crops, ca ? std::span<const int>(cluster_of) : std::span<const int>());
      for (Param &p : state.student) p.ZeroGrad();
      ad::Tape tape;
      auto bound = BindParams(tape, state.student);
      DinoBatch batch = BuildDinoBatchLoss(tape, bound, state, crops, h);
      tape.Backward(batch.loss.total);

      const double m = static_cast<double>(crops.size());
      stats.loss_ce += tape.scalar(batch.loss.ce) * m;
      stats.loss_cons += tape.scalar(batch.loss.cons) * m;
      stats.loss_total += tape.scalar(batch.loss.total) * m;
      sets_seen += m;

      stats.lr = Stage1LearningRate(h, state.step, total_steps);
      stats.ema_lambda = Stage1EmaLambda(h, state.step, total_steps);
      // The weight-norm gains (last tensor) stay at their initial value.
      sgd.Step(std::span<Param>(state.student).first(state.student.size() - 1), stats.lr);
      EmaUpdate(state, stats.ema_lambda);
      RowVector mean = batch.teacher_logits.colwise().mean();
      state.center = Tensor::FromRow(h.center_momentum * state.center.AsRow() +
                                     (1.0 - h.center_momentum) * mean);
      ++state.step;
    }
    if (sets_seen > 0) {
      stats.loss_ce /= sets_seen;
      stats.loss_cons /= sets_seen;
      stats.loss_total /= sets_seen;
    }
    result.epochs.push_back(stats);
    if (opts.on_epoch) opts.on_epoch(stats, state);
  }
  return result;
}

std::vector<Tensor> EmbedUtterances(std::span<const Param> params,
                                    const EncoderConfig &cfg, const WorldView &view,
                                    Modality modality) {
  Matrix emb = EmbedRows(params, UtteranceMatrix(view, modality), cfg);
  std::vector<Tensor> out;
  out.reserve(view.size());
  for (Eigen::Index i = 0; i < emb.rows(); ++i) out.push_back(Tensor::FromRow(emb.row(i)));
  return out;
}

Embedder MakeEmbedder(std::span<const Param> params, const EncoderConfig &cfg,
                      Modality modality) {
  return [params, cfg, modality](const Utterance &u) {
    return Tensor::FromRow(EmbedRows(params, u.base(modality).AsRow(), cfg).row(0));
  };
}

}  // namespace dlglc
