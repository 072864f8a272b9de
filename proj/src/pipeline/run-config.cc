// src/pipeline/run-config.cc

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

#include "dlglc/pipeline/run-config.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dlglc/numkit/error.h"

namespace dlglc {

namespace {

namespace pt = boost::property_tree;

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string FormatDims(const std::vector<int> &dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s;
}

double ParseDouble(const std::string &key, const std::string &v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != v.size()) Fail(Errc::kInvalidConfig, key + ": not a number: " + v);
  return d;
}

long long ParseInt(const std::string &key, const std::string &v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != v.size()) Fail(Errc::kInvalidConfig, key + ": not an integer: " + v);
  return x;
}

bool ParseBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  Fail(Errc::kInvalidConfig, key + ": not a boolean: " + v);
}

std::vector<int> ParseDims(const std::string &key, const std::string &v) {
  std::vector<int> dims;
  if (v.empty() || v == "none") return dims;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) dims.push_back(static_cast<int>(ParseInt(key, part)));
  return dims;
}

// One key: how to print it and how to read it back.
struct Field {
  std::string section, key;
  std::function<std::string(const RunConfig &)> get;
  std::function<void(RunConfig &, const std::string &)> set;
};

// The accessors below hand out mutable references; getters only read.
RunConfig &Mut(const RunConfig &c) { return const_cast<RunConfig &>(c); }

std::vector<Field> Fields() {
  std::vector<Field> f;
  auto dbl = [&](const char *s, const char *k, std::function<double &(RunConfig &)> ref) {
    f.push_back({s, k, [ref](const RunConfig &c) { return FormatDouble(ref(Mut(c))); },
                 [ref, s, k](RunConfig &c, const std::string &v) {
                   ref(c) = ParseDouble(std::string(s) + "." + k, v);
                 }});
  };
  auto integer = [&](const char *s, const char *k, std::function<int &(RunConfig &)> ref) {
    f.push_back({s, k, [ref](const RunConfig &c) { return std::to_string(ref(Mut(c))); },
                 [ref, s, k](RunConfig &c, const std::string &v) {
                   ref(c) = static_cast<int>(ParseInt(std::string(s) + "." + k, v));
                 }});
  };
  auto i64 = [&](const char *s, const char *k, std::function<std::int64_t &(RunConfig &)> ref) {
    f.push_back({s, k, [ref](const RunConfig &c) { return std::to_string(ref(Mut(c))); },
                 [ref, s, k](RunConfig &c, const std::string &v) {
                   ref(c) = ParseInt(std::string(s) + "." + k, v);
                 }});
  };
  auto u64 = [&](const char *s, const char *k, std::function<std::uint64_t &(RunConfig &)> ref) {
    f.push_back({s, k, [ref](const RunConfig &c) { return std::to_string(ref(Mut(c))); },
                 [ref, s, k](RunConfig &c, const std::string &v) {
                   const long long x = ParseInt(std::string(s) + "." + k, v);
                   if (x < 0) Fail(Errc::kInvalidConfig, std::string(s) + "." + k + " must be >= 0");
                   ref(c) = static_cast<std::uint64_t>(x);
                 }});
  };
  auto boolean = [&](const char *s, const char *k, std::function<bool &(RunConfig &)> ref) {
    f.push_back({s, k, [ref](const RunConfig &c) { return ref(Mut(c)) ? "true" : "false"; },
                 [ref, s, k](RunConfig &c, const std::string &v) {
                   ref(c) = ParseBool(std::string(s) + "." + k, v);
                 }});
  };

  u64("run", "seed", [](RunConfig &c) -> std::uint64_t & { return c.seed; });
  integer("run", "num_iterations", [](RunConfig &c) -> int & { return c.num_iterations; });
  integer("run", "num_clusters", [](RunConfig &c) -> int & { return c.num_clusters; });
  f.push_back({"run", "modality_mode",
               [](const RunConfig &c) { return std::string(ModalityModeName(c.modality_mode)); },
               [](RunConfig &c, const std::string &v) { c.modality_mode = ParseModalityMode(v); }});
  f.push_back({"run", "selection_mode",
               [](const RunConfig &c) { return std::string(SelectionModeName(c.selection_mode)); },
               [](RunConfig &c, const std::string &v) { c.selection_mode = ParseSelectionMode(v); }});
  dbl("run", "fixed_tau1", [](RunConfig &c) -> double & { return c.fixed_tau1; });
  dbl("run", "label_noise_rate", [](RunConfig &c) -> double & { return c.label_noise_rate; });
  boolean("run", "warm_start", [](RunConfig &c) -> bool & { return c.warm_start; });

  u64("world", "seed", [](RunConfig &c) -> std::uint64_t & { return c.world.seed; });
  integer("world", "num_identities", [](RunConfig &c) -> int & { return c.world.num_identities; });
  integer("world", "utterances_per_identity", [](RunConfig &c) -> int & { return c.world.utterances_per_identity; });
  integer("world", "obs_dim_audio", [](RunConfig &c) -> int & { return c.world.obs_dim_audio; });
  integer("world", "obs_dim_visual", [](RunConfig &c) -> int & { return c.world.obs_dim_visual; });
  dbl("world", "channel_noise_std", [](RunConfig &c) -> double & { return c.world.channel_noise_std; });
  dbl("world", "content_noise_std_long", [](RunConfig &c) -> double & { return c.world.content_noise_std_long; });
  dbl("world", "content_noise_std_short", [](RunConfig &c) -> double & { return c.world.content_noise_std_short; });
  dbl("world", "augment_noise_std", [](RunConfig &c) -> double & { return c.world.augment_noise_std; });
  dbl("world", "modality_correlation", [](RunConfig &c) -> double & { return c.world.modality_correlation; });

  for (const char *sec : {"encoder_audio", "encoder_visual"}) {
    const bool audio = std::string(sec) == "encoder_audio";
    auto enc = [audio](RunConfig &c) -> EncoderConfig & { return audio ? c.encoder_audio : c.encoder_visual; };
    f.push_back({sec, "hidden_dims",
                 [enc](const RunConfig &c) { return FormatDims(enc(Mut(c)).hidden_dims); },
                 [enc, sec](RunConfig &c, const std::string &v) {
                   enc(c).hidden_dims = ParseDims(std::string(sec) + ".hidden_dims", v);
                 }});
    integer(sec, "embed_dim", [enc](RunConfig &c) -> int & { return enc(c).embed_dim; });
    integer(sec, "head_hidden_dim", [enc](RunConfig &c) -> int & { return enc(c).head_hidden_dim; });
    integer(sec, "head_bottleneck_dim", [enc](RunConfig &c) -> int & { return enc(c).head_bottleneck_dim; });
    integer(sec, "head_output_dim", [enc](RunConfig &c) -> int & { return enc(c).head_output_dim; });
  }

  dbl("dino", "teacher_temp", [](RunConfig &c) -> double & { return c.dino.teacher_temp; });
  dbl("dino", "student_temp", [](RunConfig &c) -> double & { return c.dino.student_temp; });
  dbl("dino", "consistency_weight", [](RunConfig &c) -> double & { return c.dino.consistency_weight; });
  dbl("dino", "center_momentum", [](RunConfig &c) -> double & { return c.dino.center_momentum; });
  boolean("dino", "include_self_pairs", [](RunConfig &c) -> bool & { return c.dino.include_self_pairs; });
  dbl("dino", "ema_start", [](RunConfig &c) -> double & { return c.dino.ema_schedule.start; });
  dbl("dino", "ema_end", [](RunConfig &c) -> double & { return c.dino.ema_schedule.end; });
  i64("dino", "ema_steps", [](RunConfig &c) -> std::int64_t & { return c.dino.ema_schedule.total_steps; });
  dbl("dino", "lr_start", [](RunConfig &c) -> double & { return c.dino.lr_schedule.start; });
  dbl("dino", "lr_end", [](RunConfig &c) -> double & { return c.dino.lr_schedule.end; });
  i64("dino", "lr_steps", [](RunConfig &c) -> std::int64_t & { return c.dino.lr_schedule.total_steps; });
  dbl("dino", "warmup_fraction", [](RunConfig &c) -> double & { return c.dino.warmup_fraction; });
  integer("dino", "epochs", [](RunConfig &c) -> int & { return c.dino.epochs; });
  integer("dino", "batch_size", [](RunConfig &c) -> int & { return c.dino.batch_size; });
  integer("dino", "ca_warmup_epochs", [](RunConfig &c) -> int & { return c.dino.ca_warmup_epochs; });
  integer("dino", "ca_cluster_every", [](RunConfig &c) -> int & { return c.dino.ca_cluster_every; });
  integer("dino", "ca_num_clusters", [](RunConfig &c) -> int & { return c.dino.ca_num_clusters; });

  integer("stage2", "epochs", [](RunConfig &c) -> int & { return c.stage2.epochs; });
  integer("stage2", "batch_size", [](RunConfig &c) -> int & { return c.stage2.batch_size; });
  dbl("stage2", "lr_start", [](RunConfig &c) -> double & { return c.stage2.lr_schedule.start; });
  dbl("stage2", "lr_end", [](RunConfig &c) -> double & { return c.stage2.lr_schedule.end; });
  dbl("stage2", "warmup_fraction", [](RunConfig &c) -> double & { return c.stage2.warmup_fraction; });
  dbl("stage2", "weight_decay", [](RunConfig &c) -> double & { return c.stage2.weight_decay; });

  dbl("gate", "tau2", [](RunConfig &c) -> double & { return c.gate.tau2; });
  dbl("gate", "sharpness", [](RunConfig &c) -> double & { return c.gate.sharpness; });
  dbl("aam", "scale", [](RunConfig &c) -> double & { return c.aam.scale; });
  dbl("aam", "margin", [](RunConfig &c) -> double & { return c.aam.margin; });

  integer("cluster", "max_iters", [](RunConfig &c) -> int & { return c.kmeans.max_iters; });
  integer("cluster", "restarts", [](RunConfig &c) -> int & { return c.kmeans.restarts; });
  integer("cluster", "seed_candidates", [](RunConfig &c) -> int & { return c.kmeans.seed_candidates; });
  integer("eval", "n_target", [](RunConfig &c) -> int & { return c.eval.n_target; });
  integer("eval", "n_nontarget", [](RunConfig &c) -> int & { return c.eval.n_nontarget; });
  dbl("eval", "p_target", [](RunConfig &c) -> double & { return c.eval.dcf.p_target; });
  dbl("eval", "c_miss", [](RunConfig &c) -> double & { return c.eval.dcf.c_miss; });
  dbl("eval", "c_fa", [](RunConfig &c) -> double & { return c.eval.dcf.c_fa; });
  return f;
}

}  // namespace

std::string_view ModalityModeName(ModalityMode m) {
  return m == ModalityMode::kAudioOnly ? "audio_only" : "audio_visual";
}

ModalityMode ParseModalityMode(std::string_view s) {
  if (s == "audio_only") return ModalityMode::kAudioOnly;
  if (s == "audio_visual") return ModalityMode::kAudioVisual;
  Fail(Errc::kInvalidConfig, "unknown modality mode: " + std::string(s));
}

void ValidateRunConfig(const RunConfig &cfg) {
  ValidateWorldConfig(cfg.world);
  ValidateEncoderConfig(cfg.encoder_audio);
  ValidateEncoderConfig(cfg.encoder_visual);
  if (cfg.encoder_audio.input_dim != cfg.world.obs_dim_audio ||
      cfg.encoder_visual.input_dim != cfg.world.obs_dim_visual)
    Fail(Errc::kInvalidConfig, "encoder input widths must match the world");
  ValidateDinoHyper(cfg.dino);
  ValidateGate(cfg.gate);
  ValidateAamConfig(cfg.aam);
  auto require = [](bool ok, const char *what) {
    if (!ok) Fail(Errc::kInvalidConfig, what);
  };
  require(cfg.stage2.epochs >= 0, "stage2.epochs must be >= 0");
  require(cfg.stage2.batch_size >= 1, "stage2.batch_size must be >= 1");
  require(cfg.stage2.lr_schedule.start >= 0 && cfg.stage2.lr_schedule.end >= 0,
          "stage2 learning rates must be >= 0");
  require(cfg.stage2.warmup_fraction >= 0 && cfg.stage2.warmup_fraction < 1,
          "stage2.warmup_fraction must be in [0, 1)");
  require(cfg.stage2.weight_decay >= 0, "stage2.weight_decay must be >= 0");
  require(cfg.eval.n_target >= 1 && cfg.eval.n_nontarget >= 1, "eval needs both trial kinds");
  require(cfg.eval.dcf.p_target > 0 && cfg.eval.dcf.p_target < 1, "eval.p_target must be in (0, 1)");
  require(cfg.eval.dcf.c_miss > 0 && cfg.eval.dcf.c_fa > 0, "eval costs must be > 0");
  require(cfg.kmeans.max_iters >= 1 && cfg.kmeans.restarts >= 1, "k-means needs >= 1 iteration and restart");
  require(cfg.kmeans.seed_candidates >= 0, "k-means seed_candidates must be >= 0");
  require(cfg.num_iterations >= 0, "num_iterations must be >= 0");
  require(cfg.num_clusters >= 2, "num_clusters must be >= 2");
  require(cfg.num_clusters <= cfg.world.num_identities * cfg.world.utterances_per_identity,
          "num_clusters exceeds the utterance count");
  require(cfg.label_noise_rate >= 0 && cfg.label_noise_rate <= 1, "label_noise_rate must be in [0, 1]");
}

RunConfig ParseRunConfig(const std::string &text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    Fail(Errc::kInvalidConfig, std::string("config does not parse: ") + e.what());
  }
  RunConfig cfg;
  std::map<std::string, std::map<std::string, const Field *>> index;
  const std::vector<Field> fields = Fields();
  for (const Field &f : fields) index[f.section][f.key] = &f;
  for (const auto &[section, body] : tree) {
    auto sec = index.find(section);
    if (sec == index.end()) Fail(Errc::kInvalidConfig, "unknown config section: " + section);
    if (body.empty() && !body.data().empty())
      Fail(Errc::kInvalidConfig, "key outside a section: " + section);
    for (const auto &[key, value] : body) {
      auto it = sec->second.find(key);
      if (it == sec->second.end()) Fail(Errc::kInvalidConfig, "unknown config key: " + section + "." + key);
      it->second->set(cfg, value.data());
    }
  }
  cfg.encoder_audio.input_dim = cfg.world.obs_dim_audio;
  cfg.encoder_visual.input_dim = cfg.world.obs_dim_visual;
  ValidateRunConfig(cfg);
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(Errc::kMissingInput, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseRunConfig(ss.str());
}

std::string RunConfigToText(const RunConfig &cfg) {
  std::string out, section;
  for (const Field &f : Fields()) {
    if (f.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::string ConfigHash(const RunConfig &cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : RunConfigToText(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ApplySeed(RunConfig &cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.world.seed = seed;
}

}  // namespace dlglc
