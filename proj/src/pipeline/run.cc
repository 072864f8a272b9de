// src/pipeline/run.cc

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

#include "dlglc/pipeline/run.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "dlglc/dino/checkpoint.h"
#include "dlglc/dino/dino-train.h"
#include "dlglc/eval/metrics.h"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/json-file.h"
#include "dlglc/synthworld/world-io.h"

namespace dlglc {

using nlohmann::json;

namespace {

constexpr std::uint64_t kStage1Stream = 1;
constexpr std::uint64_t kClusterStream = 100;
constexpr std::uint64_t kCorruptStream = 200;
constexpr std::uint64_t kStage2Stream = 300;
constexpr std::uint64_t kTrialStream = 400;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string ModalityName(Modality m) { return m == Modality::kAudio ? "audio" : "visual"; }

std::vector<Modality> Modalities(const RunConfig &cfg) {
  if (cfg.modality_mode == ModalityMode::kAudioVisual) return {Modality::kAudio, Modality::kVisual};
  return {Modality::kAudio};
}

const EncoderConfig &EncoderFor(const RunConfig &cfg, Modality m) {
  return m == Modality::kAudio ? cfg.encoder_audio : cfg.encoder_visual;
}

// JSON cannot hold infinities.
json Num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

template <class T>
json Opt(const std::optional<T> &v) {
  return v ? json(Num(*v)) : json();
}

std::span<const Param> EncoderLayers(const TrainedEncoder &e) {
  return std::span<const Param>(e.params).first(NumParamTensors(e.cfg, false));
}

void Persist(const RunContext &ctx, const RunReport &report) {
  if (!ctx.out.empty()) WriteReport(ctx.out / "report.jsonl", report);
}

json EvalRow(const Evaluation &ev, int iteration, int epoch, LabelModality lm, double wall) {
  json row = EmptyReportRow(iteration, epoch, "eval");
  row["eer"] = ev.eer;
  row["min_dcf"] = ev.min_dcf;
  row["eer_visual"] = Opt(ev.eer_visual);
  row["min_dcf_visual"] = Opt(ev.min_dcf_visual);
  row["nmi"] = Opt(ev.nmi);
  row["purity"] = Opt(ev.purity);
  row["cluster_modality"] = LabelModalityName(lm);
  row["wall_time"] = wall;
  return row;
}

std::vector<MetricRow> EvalMetrics(const Evaluation &ev, int iteration, LabelModality lm) {
  std::vector<MetricRow> m{{"eer", ev.eer, iteration, "audio"},
                           {"min_dcf", ev.min_dcf, iteration, "audio"}};
  if (ev.eer_visual) m.push_back({"eer", *ev.eer_visual, iteration, "visual"});
  if (ev.min_dcf_visual) m.push_back({"min_dcf", *ev.min_dcf_visual, iteration, "visual"});
  const std::string cm(LabelModalityName(lm));
  if (ev.nmi) m.push_back({"nmi", *ev.nmi, iteration, cm});
  if (ev.purity) m.push_back({"purity", *ev.purity, iteration, cm});
  return m;
}

LabelModality ClusterModality(const RunConfig &cfg) {
  return cfg.modality_mode == ModalityMode::kAudioVisual ? LabelModality::kJoint : LabelModality::kAudio;
}

void WriteMetrics(const RunContext &ctx, const std::vector<MetricRow> &rows) {
  if (!ctx.out.empty()) AppendMetrics(ctx.out / "metrics.jsonl", rows, ConfigHash(ctx.cfg));
}

// For each utterance: does its (possibly corrupted) training label name a
// cluster whose majority identity is the utterance's own?
std::vector<bool> LabelCorrectness(std::span<const int> clean, std::span<const int> used,
                                   int num_clusters, const TruthMap &truth) {
  std::vector<std::map<int, int>> votes(static_cast<std::size_t>(num_clusters));
  for (std::size_t i = 0; i < clean.size(); ++i) ++votes[clean[i]][truth[static_cast<int>(i)]];
  std::vector<int> majority(static_cast<std::size_t>(num_clusters), -1);
  for (int c = 0; c < num_clusters; ++c) {
    int best = 0;
    for (auto [id, n] : votes[c])
      if (n > best) best = n, majority[c] = id;
  }
  std::vector<bool> ok(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) ok[i] = majority[used[i]] == truth[static_cast<int>(i)];
  return ok;
}

}  // namespace

std::filesystem::path Stage1CheckpointPath(const std::filesystem::path &out, Modality m) {
  return out / "checkpoints" / ("stage1-" + ModalityName(m) + ".json");
}

std::filesystem::path Stage2CheckpointPath(const std::filesystem::path &out, int iteration, Modality m) {
  return out / "checkpoints" / ("iter-" + std::to_string(iteration) + "-" + ModalityName(m) + ".json");
}

std::filesystem::path LabelsPath(const std::filesystem::path &out, int iteration) {
  return out / "labels" / ("iter-" + std::to_string(iteration) + ".json");
}

RunContext ContextFromConfig(const RunConfig &cfg, const std::filesystem::path &out) {
  ValidateRunConfig(cfg);
  RunContext ctx{cfg, GenerateWorld(cfg.world), {}, out};
  Rng trial_rng = Rng(cfg.seed).Split(kTrialStream);
  ctx.trials = MakeTrials(ctx.world, cfg.eval.n_target, cfg.eval.n_nontarget, trial_rng);
  return ctx;
}

RunContext ContextFromFiles(const RunConfig &cfg, const std::filesystem::path &world_path,
                            const std::optional<std::filesystem::path> &truth_path,
                            const std::filesystem::path &out) {
  LoadedWorld lw = LoadWorld(world_path);
  RunContext ctx{cfg, std::move(lw.world), std::move(lw.trials), out};
  // The file's world wins over the config's.
  ctx.cfg.world = ctx.world.config;
  ctx.cfg.encoder_audio.input_dim = ctx.world.config.obs_dim_audio;
  ctx.cfg.encoder_visual.input_dim = ctx.world.config.obs_dim_visual;
  ValidateRunConfig(ctx.cfg);
  if (truth_path) {
    TruthMap truth = LoadTruth(*truth_path);
    if (truth.size() != ctx.world.num_utterances())
      Fail(Errc::kLengthMismatch, "truth sidecar does not match the world");
    ctx.world.truth = std::move(truth);
  }
  return ctx;
}

Evaluation Evaluate(const RunContext &ctx, std::span<const TrainedEncoder> encoders, int iteration) {
  const WorldView view = ctx.world.View();
  Evaluation ev;
  const TrainedEncoder *audio = nullptr, *visual = nullptr;
  for (const TrainedEncoder &e : encoders) (e.modality == Modality::kAudio ? audio : visual) = &e;
  if (!audio) Fail(Errc::kMissingInput, "evaluation needs an audio encoder");

  auto verify = [&](const TrainedEncoder &e, double *eer, double *dcf) {
    std::vector<Tensor> emb = EmbedUtterances(EncoderLayers(e), e.cfg, view, e.modality);
    ScoredTrials st = ScoreTrials(emb, ctx.trials);
    *eer = ComputeEer(st).eer;
    *dcf = ComputeMinDcf(st, ctx.cfg.eval.dcf);
  };
  verify(*audio, &ev.eer, &ev.min_dcf);
  if (visual) {
    double e, d;
    verify(*visual, &e, &d);
    ev.eer_visual = e;
    ev.min_dcf_visual = d;
  }

  const LabelModality lm = ClusterModality(ctx.cfg);
  if (lm == LabelModality::kJoint && !visual) Fail(Errc::kMissingInput, "joint clustering needs a visual encoder");
  Embedder ea = MakeEmbedder(EncoderLayers(*audio), audio->cfg, Modality::kAudio);
  Embedder evis = visual ? MakeEmbedder(EncoderLayers(*visual), visual->cfg, Modality::kVisual) : Embedder();
  Rng rng = Rng(ctx.cfg.seed).Split(kClusterStream + static_cast<std::uint64_t>(iteration));
  ev.labels = AssignPseudoLabels(view, lm, ea, evis, ctx.cfg.num_clusters, iteration, rng,
                                 ctx.cfg.kmeans);
  if (ctx.world.truth) {
    ev.nmi = Nmi(ev.labels.labels, ctx.world.truth->identity_of);
    ev.purity = Purity(ev.labels.labels, ctx.world.truth->identity_of);
  }
  return ev;
}

StageOutcome RunStage1(const RunContext &ctx, RunReport &report) {
  const auto start = Clock::now();
  const RunConfig &cfg = ctx.cfg;
  ValidateRunConfig(cfg);
  const WorldView view = ctx.world.View();
  if (!ctx.out.empty()) {
    std::filesystem::create_directories(ctx.out);
    std::filesystem::remove(ctx.out / "metrics.jsonl");
  }

  StageOutcome outcome;
  std::vector<std::vector<Stage1EpochStats>> stats;
  const Rng root(cfg.seed);
  for (Modality m : Modalities(cfg)) {
    Rng rng = root.Split(kStage1Stream).Split(static_cast<std::uint64_t>(m));
    Stage1Result r = TrainStage1(view, m, EncoderFor(cfg, m), cfg.dino, rng);
    if (!ctx.out.empty()) SaveStage1Checkpoint(Stage1CheckpointPath(ctx.out, m), r.state, cfg.dino);
    outcome.encoders.push_back({m, r.state.cfg, r.state.teacher});
    stats.push_back(std::move(r.epochs));
  }
  for (int e = 0; e < cfg.dino.epochs; ++e) {
    json row = EmptyReportRow(0, e, "stage1");
    json loss = json::object();
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const Stage1EpochStats &s = stats[i][static_cast<std::size_t>(e)];
      loss[ModalityName(outcome.encoders[i].modality)] = {
          {"ce", s.loss_ce}, {"cons", s.loss_cons}, {"total", s.loss_total},
          {"ema_lambda", s.ema_lambda}, {"cluster_aware", s.cluster_aware}};
    }
    row["loss"] = loss;
    row["lr"] = stats[0][static_cast<std::size_t>(e)].lr;
    row["wall_time"] = Seconds(start);
    report.Append(std::move(row));
  }

  outcome.eval = Evaluate(ctx, outcome.encoders, 0);
  const LabelModality lm = ClusterModality(cfg);
  report.Append(EvalRow(outcome.eval, 0, cfg.dino.epochs, lm, Seconds(start)));
  if (!ctx.out.empty()) {
    SaveStore(LabelsPath(ctx.out, 0), outcome.eval.labels);
    WriteMetrics(ctx, EvalMetrics(outcome.eval, 0, lm));
  }
  Persist(ctx, report);
  return outcome;
}

StageOutcome RunIteration(const RunContext &ctx, int iteration, const StageOutcome &prev,
                          RunReport &report) {
  const auto start = Clock::now();
  const RunConfig &cfg = ctx.cfg;
  if (iteration < 1) Fail(Errc::kInvalidConfig, "iterations are numbered from 1");
  const WorldView view = ctx.world.View();
  const Rng root(cfg.seed);
  const auto tag = static_cast<std::uint64_t>(iteration);

  const PseudoLabelStore &clean = prev.eval.labels;
  ValidateStore(clean, view.size());
  Rng corrupt_rng = root.Split(kCorruptStream + tag);
  CorruptedLabels noisy = CorruptLabels(clean.labels, cfg.label_noise_rate, clean.num_clusters, corrupt_rng);

  std::vector<bool> correct;
  if (ctx.world.truth)
    correct = LabelCorrectness(clean.labels, noisy.labels, clean.num_clusters, *ctx.world.truth);
  std::unique_ptr<bool[]> correct_buf(new bool[correct.size()]);
  for (std::size_t i = 0; i < correct.size(); ++i) correct_buf[i] = correct[i];

  Rng rng = root.Split(kStage2Stream + tag);
  std::vector<Stage2Model> init;
  if (cfg.warm_start) {
    if (!prev.stage2.empty()) {
      init = prev.stage2;
    } else {
      Rng wrng = rng.Split(1);
      for (const TrainedEncoder &e : prev.encoders) {
        Stage2Model m = InitStage2Model(e.modality, e.cfg, clean.num_clusters, wrng);
        std::copy(EncoderLayers(e).begin(), EncoderLayers(e).end(), m.params.begin());
        init.push_back(std::move(m));
      }
    }
  }

  std::vector<std::vector<SampleAudit>> audits(Modalities(cfg).size());
  Stage2Options opts;
  opts.label_correct = std::span<const bool>(correct_buf.get(), correct.size());
  opts.on_epoch = [&](const Stage2EpochStats &s, const std::vector<std::vector<SampleAudit>> &a) {
    json row = EmptyReportRow(iteration, s.epoch, "stage2");
    row["loss"] = {{"total", s.loss}};
    row["lr"] = s.lr;
    json gates = json::object();
    for (const GateEpochStats &g : s.gates) {
      gates[ModalityName(g.modality)] = {
          {"tau1", Num(g.tau1)},
          {"reliable", g.reliable},
          {"corrected", g.corrected},
          {"skipped", g.skipped},
          {"hard_label", g.hard_label},
          {"selection_rate", g.selection_rate()},
          {"selected_precision", Opt(g.selected_precision)},
          {"full_precision", Opt(g.full_precision)},
          {"refresh", g.refresh ? json(std::string(RefreshStatusName(*g.refresh))) : json()},
          {"gmm", g.gmm ? json(*g.gmm) : json()},
          {"next_tau1", Num(g.next_tau1)}};
    }
    const GateEpochStats &g0 = s.gates.front();
    row["tau1"] = Num(g0.tau1);
    row["selection_rate"] = g0.selection_rate();
    row["selected_precision"] = Opt(g0.selected_precision);
    row["gates"] = gates;
    row["wall_time"] = Seconds(start);
    report.Append(std::move(row));
    for (std::size_t m = 0; m < a.size(); ++m) audits[m].insert(audits[m].end(), a[m].begin(), a[m].end());
  };
  Stage2Result trained = TrainStage2(view, cfg, noisy.labels, clean.num_clusters, rng, opts, std::move(init));

  StageOutcome outcome;
  outcome.stage2 = trained.models;
  for (const Stage2Model &m : trained.models) {
    Params enc(m.encoder().begin(), m.encoder().end());
    outcome.encoders.push_back({m.modality, m.cfg, std::move(enc)});
  }
  outcome.eval = Evaluate(ctx, outcome.encoders, iteration);
  const LabelModality lm = ClusterModality(cfg);
  report.Append(EvalRow(outcome.eval, iteration, cfg.stage2.epochs, lm, Seconds(start)));

  if (!ctx.out.empty()) {
    for (std::size_t i = 0; i < trained.models.size(); ++i) {
      const Modality m = trained.models[i].modality;
      SaveStage2Checkpoint(Stage2CheckpointPath(ctx.out, iteration, m), trained.models[i], iteration);
      WriteLossRecords(ctx.out / "loss_records" /
                           ("iter-" + std::to_string(iteration) + "-" + ModalityName(m) + ".csv"),
                       audits[i]);
    }
    SaveStore(LabelsPath(ctx.out, iteration), outcome.eval.labels);
    std::vector<MetricRow> metrics = EvalMetrics(outcome.eval, iteration, lm);
    if (!trained.epochs.empty())
      for (const GateEpochStats &g : trained.epochs.back().gates) {
        metrics.push_back({"selection_rate", g.selection_rate(), iteration, ModalityName(g.modality)});
        if (g.selected_precision)
          metrics.push_back({"selected_precision", *g.selected_precision, iteration, ModalityName(g.modality)});
      }
    WriteMetrics(ctx, metrics);
  }
  Persist(ctx, report);
  return outcome;
}

RunReport RunFull(const RunContext &ctx) {
  if (!ctx.out.empty()) {
    std::filesystem::create_directories(ctx.out);
    std::ofstream(ctx.out / "config.ini") << RunConfigToText(ctx.cfg);
  }
  RunReport report;
  StageOutcome outcome = RunStage1(ctx, report);
  for (int k = 1; k <= ctx.cfg.num_iterations; ++k) outcome = RunIteration(ctx, k, outcome, report);
  return report;
}

void SaveStage2Checkpoint(const std::filesystem::path &path, const Stage2Model &model, int iteration) {
  WriteJsonFile(path, json{{"version", kStage2CheckpointVersion},
                           {"kind", "stage2"},
                           {"iteration", iteration},
                           {"modality", ModalityName(model.modality)},
                           {"cfg", model.cfg},
                           {"num_classes", model.num_classes},
                           {"params", ParamsToJson(model.params)}});
}

Stage2Model LoadStage2Checkpoint(const std::filesystem::path &path) {
  json j = ReadJsonFile(path);
  RequireVersion(j, kStage2CheckpointVersion, "stage-2 checkpoint");
  Stage2Model m;
  try {
    if (j.at("kind").get<std::string>() != "stage2") Fail(Errc::kFormat, "not a stage-2 checkpoint");
    const std::string mod = j.at("modality").get<std::string>();
    if (mod != "audio" && mod != "visual") Fail(Errc::kFormat, "unknown modality '" + mod + "'");
    m.modality = mod == "audio" ? Modality::kAudio : Modality::kVisual;
    m.cfg = j.at("cfg").get<EncoderConfig>();
    m.num_classes = j.at("num_classes").get<int>();
    m.params = ParamsFromJson(j.at("params"));
  } catch (const json::exception &e) {
    Fail(Errc::kFormat, std::string("bad stage-2 checkpoint: ") + e.what());
  }
  if (m.params.size() != NumParamTensors(m.cfg, false) + 1)
    Fail(Errc::kFormat, "checkpoint parameters do not match its config");
  const Tensor &w = m.params.back().value;
  if (w.shape() != std::vector<std::size_t>{static_cast<std::size_t>(m.num_classes),
                                            static_cast<std::size_t>(m.cfg.embed_dim)})
    Fail(Errc::kFormat, "class matrix shape does not match the checkpoint");
  return m;
}

TrainedEncoder LoadEncoder(const std::filesystem::path &path) {
  json j = ReadJsonFile(path);
  const std::string kind = j.value("kind", "");
  if (kind == "stage1") {
    Stage1Checkpoint c = Stage1CheckpointFromJson(j);
    // Stage I checkpoints do not record their modality; it is in the file name.
    const Modality m = path.stem().string().find("visual") != std::string::npos ? Modality::kVisual
                                                                                 : Modality::kAudio;
    return {m, c.state.cfg, c.state.teacher};
  }
  Stage2Model s = LoadStage2Checkpoint(path);
  return {s.modality, s.cfg, Params(s.encoder().begin(), s.encoder().end())};
}

StageOutcome LoadOutcome(const RunContext &ctx, int iteration) {
  StageOutcome o;
  for (Modality m : Modalities(ctx.cfg)) {
    if (iteration == 0) {
      Stage1Checkpoint c = LoadStage1Checkpoint(Stage1CheckpointPath(ctx.out, m));
      o.encoders.push_back({m, c.state.cfg, c.state.teacher});
    } else {
      Stage2Model s = LoadStage2Checkpoint(Stage2CheckpointPath(ctx.out, iteration, m));
      o.encoders.push_back({m, s.cfg, Params(s.encoder().begin(), s.encoder().end())});
      o.stage2.push_back(std::move(s));
    }
  }
  o.eval.labels = LoadStore(LabelsPath(ctx.out, iteration));
  return o;
}

}  // namespace dlglc
