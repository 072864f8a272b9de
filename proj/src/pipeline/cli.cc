// src/pipeline/cli.cc

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

#include "dlglc/pipeline/cli.h"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/json-file.h"
#include "dlglc/pipeline/run.h"
#include "dlglc/synthworld/world-io.h"

namespace dlglc {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string truth;
  std::string world;
};

RunConfig ResolveConfig(const Globals &g, const fs::path &fallback) {
  RunConfig cfg;
  if (!g.config.empty())
    cfg = LoadRunConfig(g.config);
  else if (!fallback.empty() && fs::exists(fallback))
    cfg = LoadRunConfig(fallback);
  if (g.seed) ApplySeed(cfg, *g.seed);
  ValidateRunConfig(cfg);
  return cfg;
}

fs::path RequireOut(const Globals &g) {
  if (g.out.empty()) Fail(Errc::kInvalidConfig, "--out is required");
  return g.out;
}

std::optional<fs::path> Truth(const Globals &g) {
  if (g.truth.empty()) return std::nullopt;
  return fs::path(g.truth);
}

// A generated world is saved next to the run, its truth in a separate
// sidecar file.
RunContext MakeContext(const Globals &g, const RunConfig &cfg, const fs::path &out) {
  if (!g.world.empty()) return ContextFromFiles(cfg, g.world, Truth(g), out);
  RunContext ctx = ContextFromConfig(cfg, out);
  if (!g.truth.empty()) Fail(Errc::kInvalidConfig, "--truth-sidecar needs --world");
  fs::create_directories(out);
  SaveWorld(out / "world.json", ctx.world, ctx.trials);
  SaveTruth(out / "truth.json", *ctx.world.truth);
  return ctx;
}

void WriteConfig(const fs::path &out, const RunConfig &cfg) {
  fs::create_directories(out);
  std::ofstream(out / "config.ini") << RunConfigToText(cfg);
}

int GenWorld(const Globals &g, std::ostream &os) {
  const fs::path out = RequireOut(g);
  RunConfig cfg = ResolveConfig(g, {});
  RunContext ctx = ContextFromConfig(cfg, out);
  fs::create_directories(out);
  SaveWorld(out / "world.json", ctx.world, ctx.trials);
  SaveTruth(out / "truth.json", *ctx.world.truth);
  os << (out / "world.json").string() << "\n" << (out / "truth.json").string() << "\n";
  return kExitOk;
}

int Pretrain(const Globals &g, std::ostream &os) {
  const fs::path out = RequireOut(g);
  RunConfig cfg = ResolveConfig(g, {});
  RunContext ctx = MakeContext(g, cfg, out);
  WriteConfig(out, ctx.cfg);
  RunReport report;
  StageOutcome o = RunStage1(ctx, report);
  os << "stage1 eer " << o.eval.eer << "\n";
  return kExitOk;
}

int Iterate(const Globals &g, int iteration, std::ostream &os) {
  const fs::path out = RequireOut(g);
  RunConfig cfg = ResolveConfig(g, out / "config.ini");
  const fs::path world = g.world.empty() ? out / "world.json" : fs::path(g.world);
  if (!fs::exists(world)) Fail(Errc::kMissingInput, "no world at " + world.string());
  RunContext ctx = ContextFromFiles(cfg, world, Truth(g), out);
  StageOutcome prev = LoadOutcome(ctx, iteration - 1);
  // Later rows are superseded.
  RunReport report;
  if (fs::exists(out / "report.jsonl")) {
    RunReport old = ReadReport(out / "report.jsonl");
    for (const auto &row : old.rows())
      if (row.at("iteration").get<int>() < iteration) report.Append(row);
  }
  StageOutcome o = RunIteration(ctx, iteration, prev, report);
  os << "iteration " << iteration << " eer " << o.eval.eer << "\n";
  return kExitOk;
}

int Run(const Globals &g, std::ostream &os) {
  const fs::path out = RequireOut(g);
  RunConfig cfg = ResolveConfig(g, {});
  RunContext ctx = MakeContext(g, cfg, out);
  RunReport report = RunFull(ctx);
  os << "report " << (out / "report.jsonl").string() << " (" << report.rows().size() << " rows)\n";
  return kExitOk;
}

int Eval(const Globals &g, const std::vector<std::string> &checkpoints, std::ostream &os) {
  if (checkpoints.empty()) Fail(Errc::kMissingInput, "eval needs --checkpoint");
  for (const auto &c : checkpoints)
    if (!fs::exists(c)) Fail(Errc::kMissingInput, "no checkpoint at " + c);
  const fs::path out = g.out;
  fs::path world = g.world;
  if (world.empty() && !out.empty()) world = out / "world.json";
  if (world.empty() || !fs::exists(world)) Fail(Errc::kMissingInput, "eval needs --world");
  RunConfig cfg = ResolveConfig(g, out.empty() ? fs::path() : out / "config.ini");
  std::vector<TrainedEncoder> enc;
  for (const auto &c : checkpoints) enc.push_back(LoadEncoder(c));
  bool visual = false;
  for (const auto &e : enc) visual |= e.modality == Modality::kVisual;
  cfg.modality_mode = visual ? ModalityMode::kAudioVisual : ModalityMode::kAudioOnly;
  RunContext ctx = ContextFromFiles(cfg, world, Truth(g), {});
  Evaluation ev = Evaluate(ctx, enc, 0);
  nlohmann::json j{{"version", 1}, {"eer", ev.eer}, {"min_dcf", ev.min_dcf}};
  if (ev.eer_visual) j["eer_visual"] = *ev.eer_visual, j["min_dcf_visual"] = *ev.min_dcf_visual;
  if (ev.nmi) j["nmi"] = *ev.nmi, j["purity"] = *ev.purity;
  os << j.dump() << "\n";
  if (!out.empty()) WriteJsonFile(out / "eval.json", j);
  return kExitOk;
}

int Report(const Globals &g, const std::string &dir, int bins, std::ostream &os) {
  const fs::path run = dir.empty() ? RequireOut(g) : fs::path(dir);
  for (const auto &p : WritePlotData(run, bins)) os << p.string() << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Iterative self-supervised speaker representation learning on a synthetic world"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run configuration file");
  app.add_option("--seed", g.seed, "Seed for the run and the world");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--truth-sidecar", g.truth, "Identity truth for evaluation rows");
  app.add_option("--world", g.world, "World file (generated from the config when absent)");

  auto *gen = app.add_subcommand("gen-world", "Generate a world, its trials and its truth sidecar");
  auto *pre = app.add_subcommand("pretrain", "Stage I self-distillation");
  auto *iter = app.add_subcommand("iterate", "One pseudo-label iteration from a previous one");
  int iteration = 1;
  iter->add_option("--iteration", iteration, "Iteration to run (>= 1)")->check(CLI::PositiveNumber);
  auto *run = app.add_subcommand("run", "Stage I and every iteration");
  auto *ev = app.add_subcommand("eval", "Score trials with one or more checkpoints");
  std::vector<std::string> checkpoints;
  ev->add_option("--checkpoint", checkpoints, "Checkpoint file (repeat for visual)");
  auto *rep = app.add_subcommand("report", "Write plot data for a finished run");
  std::string rep_dir;
  int bins = 40;
  rep->add_option("dir", rep_dir, "Run directory");
  rep->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  for (auto *s : {gen, pre, iter, run, ev, rep}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  }

  try {
    if (*gen) return GenWorld(g, out);
    if (*pre) return Pretrain(g, out);
    if (*iter) return Iterate(g, iteration, out);
    if (*run) return Run(g, out);
    if (*ev) return Eval(g, checkpoints, out);
    return Report(g, rep_dir, bins, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == Errc::kInvalidConfig) return kExitInvalidConfig;
    if (e.code() == Errc::kMissingInput) return kExitMissingInput;
    return kExitFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace dlglc
