// src/pipeline/stage2.cc

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

#include "dlglc/pipeline/stage2.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dlglc/dino/dino-train.h"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/sgd.h"

namespace dlglc {

namespace {

constexpr std::uint64_t kInitStream = 21;
constexpr std::uint64_t kEpochStream = 22;

double Stage2LearningRate(const Stage2Hyper &h, std::int64_t step, std::int64_t total) {
  DinoHyper d;
  d.lr_schedule = h.lr_schedule;
  d.warmup_fraction = h.warmup_fraction;
  return Stage1LearningRate(d, step, total);
}

void Count(GateEpochStats &g, Branch b) {
  switch (b) {
    case Branch::kReliable: ++g.reliable; break;
    case Branch::kCorrected: ++g.corrected; break;
    case Branch::kSkipped: ++g.skipped; break;
    case Branch::kHardLabel: ++g.hard_label; break;
  }
}

void Precision(GateEpochStats &g, std::span<const SampleAudit> audit, std::span<const bool> correct) {
  if (correct.empty() || audit.empty()) return;
  int sel = 0, sel_ok = 0, ok = 0;
  for (const SampleAudit &a : audit) {
    const bool c = correct[static_cast<std::size_t>(a.sample_id)];
    ok += c;
    if (a.branch == Branch::kReliable) {
      ++sel;
      sel_ok += c;
    }
  }
  g.full_precision = static_cast<double>(ok) / static_cast<double>(audit.size());
  if (sel) g.selected_precision = static_cast<double>(sel_ok) / sel;
}

}  // namespace

Stage2Model InitStage2Model(Modality modality, const EncoderConfig &cfg, int num_classes,
                            Rng &rng) {
  if (num_classes < 1) Fail(Errc::kInvalidConfig, "stage 2 needs at least one class");
  Stage2Model m{modality, cfg, InitParams(cfg, false, rng), num_classes};
  Tensor w({static_cast<std::size_t>(num_classes), static_cast<std::size_t>(cfg.embed_dim)});
  for (double &v : w.values()) v = rng.Normal();
  m.params.emplace_back(std::move(w));
  return m;
}

std::vector<Tensor> EmbedStage2(const Stage2Model &model, const WorldView &view) {
  return EmbedUtterances(model.encoder(), model.cfg, view, model.modality);
}

Stage2Result TrainStage2(const WorldView &view, const RunConfig &cfg,
                         std::span<const int> labels, int num_classes, Rng &rng,
                         const Stage2Options &opts, std::vector<Stage2Model> init) {
  ValidateRunConfig(cfg);
  const std::size_t n = view.size();
  if (n == 0) Fail(Errc::kEmptyInput, "world has no utterances");
  if (labels.size() != n) Fail(Errc::kShapeMismatch, "one label per utterance required");
  for (int y : labels)
    if (y < 0 || y >= num_classes) Fail(Errc::kInvalidLabel, "training label out of range");
  if (!opts.label_correct.empty() && opts.label_correct.size() != n)
    Fail(Errc::kShapeMismatch, "one correctness flag per utterance required");

  const bool av = cfg.modality_mode == ModalityMode::kAudioVisual;
  Stage2Result result;
  if (init.empty()) {
    Rng init_rng = rng.Split(kInitStream);
    result.models.push_back(InitStage2Model(Modality::kAudio, cfg.encoder_audio, num_classes, init_rng));
    if (av)
      result.models.push_back(InitStage2Model(Modality::kVisual, cfg.encoder_visual, num_classes, init_rng));
  } else {
    if (init.size() != (av ? 2u : 1u)) Fail(Errc::kShapeMismatch, "warm start model count mismatch");
    result.models = std::move(init);
  }
  const std::size_t nm = result.models.size();

  const SelectionMode mode = cfg.selection_mode;
  const bool refresh = mode == SelectionMode::kDlg || mode == SelectionMode::kDlgLc;
  const bool lc = mode == SelectionMode::kDlgLc;
  std::vector<GateState> gates(nm, cfg.gate);
  for (GateState &g : gates) {
    g.loss_record.clear();
    g.tau1 = mode == SelectionMode::kFixed ? cfg.fixed_tau1 : std::numeric_limits<double>::infinity();
  }

  const Stage2Hyper &h = cfg.stage2;
  const auto bs = static_cast<std::size_t>(h.batch_size);
  const std::int64_t batches = static_cast<std::int64_t>((n + bs - 1) / bs);
  const std::int64_t total_steps = batches * h.epochs;
  std::vector<Sgd> sgd(nm, Sgd(SgdOptions{0.9, h.weight_decay}));
  std::int64_t step = 0;

  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    Rng erng = rng.Split(kEpochStream).Split(static_cast<std::uint64_t>(epoch));
    Rng order_rng = erng.Split(1), pair_rng = erng.Split(2), refresh_rng = erng.Split(3);
    std::vector<std::size_t> order = order_rng.Permutation(n);
    Stage2EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t m = 0; m < nm; ++m) {
      GateEpochStats g;
      g.modality = result.models[m].modality;
      g.tau1 = gates[m].tau1;
      stats.gates.push_back(g);
    }
    std::vector<std::vector<SampleAudit>> audits(nm);

    for (std::int64_t b = 0; b < batches; ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * bs, hi = std::min(n, lo + bs);
      const auto rows = static_cast<Eigen::Index>(hi - lo);
      std::vector<int> ids, ys;
      std::vector<Matrix> clean(nm), aug(nm);
      for (std::size_t m = 0; m < nm; ++m) {
        const int d = view.obs_dim(result.models[m].modality);
        clean[m].resize(rows, d);
        aug[m].resize(rows, d);
      }
      for (std::size_t i = lo; i < hi; ++i) {
        const Utterance &u = view.utterance(order[i]);
        ids.push_back(u.id);
        ys.push_back(labels[static_cast<std::size_t>(u.id)]);
        for (std::size_t m = 0; m < nm; ++m) {
          CropPair p = SampleCleanAugmentedPair(u, result.models[m].modality, view.noise(), pair_rng);
          clean[m].row(static_cast<Eigen::Index>(i - lo)) = p.clean.AsRow();
          aug[m].row(static_cast<Eigen::Index>(i - lo)) = p.augmented.AsRow();
        }
      }

      ad::Tape tape;
      std::vector<Matrix> clean_emb(nm);
      std::vector<DlgBatch> db(nm);
      for (std::size_t m = 0; m < nm; ++m) {
        Stage2Model &model = result.models[m];
        for (Param &p : model.params) p.ZeroGrad();
        clean_emb[m] = EmbedRows(model.encoder(), clean[m], model.cfg);
        auto bound = BindParams(tape, model.params);
        TapeOutputs o = ForwardOnTape(tape, bound, tape.Constant(aug[m]), model.cfg, false);
        db[m] = DlgBatch{&clean_emb[m], o.embedding, bound.back()};
      }
      ad::Var total;
      if (nm == 1) {
        DlgStepResult r = DlgLcStep(tape, db[0], ys, ids, epoch, gates[0], cfg.aam, lc);
        total = r.total;
        audits[0].insert(audits[0].end(), r.audit.begin(), r.audit.end());
      } else {
        MmStepResult r = MmDlgLcStep(tape, db[0], db[1], ys, ids, epoch, gates[0], gates[1], cfg.aam, lc);
        total = r.total;
        audits[0].insert(audits[0].end(), r.audio.begin(), r.audio.end());
        audits[1].insert(audits[1].end(), r.visual.begin(), r.visual.end());
      }
      tape.Backward(total);
      const double loss = tape.scalar(total);
      if (!std::isfinite(loss)) Fail(Errc::kNonFiniteLoss, "stage 2 loss is not finite");
      stats.loss += loss;
      stats.lr = Stage2LearningRate(h, step, total_steps);
      for (std::size_t m = 0; m < nm; ++m) sgd[m].Step(result.models[m].params, stats.lr);
      ++step;
    }
    stats.loss /= static_cast<double>(std::max<std::int64_t>(1, batches));

    for (std::size_t m = 0; m < nm; ++m) {
      GateEpochStats &g = stats.gates[m];
      for (const SampleAudit &a : audits[m]) Count(g, a.branch);
      Precision(g, audits[m], opts.label_correct);
      if (refresh) {
        Rng r = refresh_rng.Split(m);
        RefreshResult rr = RefreshThreshold(gates[m], r);
        g.refresh = rr.status;
        g.gmm = rr.gmm;
        gates[m] = rr.gate;
      } else {
        gates[m].loss_record.clear();
      }
      g.next_tau1 = gates[m].tau1;
    }
    result.epochs.push_back(stats);
    if (opts.on_epoch) opts.on_epoch(stats, audits);
  }
  return result;
}

}  // namespace dlglc
