// src/dino/dino-loss.cc

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

#include "dlglc/dino/dino-loss.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/tensor-json.h"

namespace dlglc {

namespace {

constexpr int kLongViews = 2;
constexpr int kViews = 6;
constexpr double kEmbeddingNormFloor = 1e-12;

void CheckDistribution(const Tensor &p) {
  double sum = 0;
  for (double v : p.values()) {
    if (!(v >= 0.0)) Fail(Errc::kNonDistribution, "negative or NaN probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) Fail(Errc::kNonDistribution, "probabilities do not sum to 1");
}

}  // namespace

double RepeatProbability(int num_speakers, int batch_size) {
  if (num_speakers < 1 || batch_size < 1)
    Fail(Errc::kInvalidConfig, "speaker and batch counts must be >= 1");
  if (batch_size > num_speakers)
    Fail(Errc::kBatchLargerThanPopulation, "batch larger than speaker population");
  const double s = num_speakers;
  double log_no_repeat = 0.0;
  for (int i = 0; i < batch_size; ++i) log_no_repeat += std::log1p(-i / s);
  return -std::expm1(log_no_repeat);
}

void ValidateDinoHyper(const DinoHyper &h) {
  auto require = [](bool ok, const char *what) {
    if (!ok) Fail(Errc::kInvalidConfig, what);
  };
  require(h.teacher_temp > 0 && h.student_temp > 0, "temperatures must be > 0");
  require(h.consistency_weight >= 0, "consistency weight must be >= 0");
  require(h.center_momentum >= 0 && h.center_momentum < 1, "center momentum must be in [0, 1)");
  require(h.ema_schedule.start >= 0 && h.ema_schedule.start <= 1 && h.ema_schedule.end >= 0 &&
              h.ema_schedule.end <= 1,
          "ema schedule endpoints must be in [0, 1]");
  require(h.lr_schedule.start >= 0 && h.lr_schedule.end >= 0, "learning rates must be >= 0");
  require(h.ema_schedule.total_steps >= 0 && h.lr_schedule.total_steps >= 0,
          "schedule lengths must be >= 0");
  require(h.warmup_fraction >= 0 && h.warmup_fraction < 1, "warmup fraction must be in [0, 1)");
  require(h.epochs >= 0, "epochs must be >= 0");
  require(h.batch_size >= 1, "batch size must be >= 1");
  require(h.ca_warmup_epochs >= 0, "ca warmup must be >= 0");
  require(h.ca_cluster_every >= 1, "ca cluster interval must be >= 1");
  require(h.ca_num_clusters >= 1, "ca cluster count must be >= 1");
}

void to_json(nlohmann::json &j, const DinoHyper &h) {
  auto sched = [](const ScheduleSpec &s) {
    return nlohmann::json{{"start", s.start}, {"end", s.end}, {"total_steps", s.total_steps}};
  };
  j = nlohmann::json{{"teacher_temp", h.teacher_temp},
                     {"student_temp", h.student_temp},
                     {"consistency_weight", h.consistency_weight},
                     {"center_momentum", h.center_momentum},
                     {"include_self_pairs", h.include_self_pairs},
                     {"ema_schedule", sched(h.ema_schedule)},
                     {"lr_schedule", sched(h.lr_schedule)},
                     {"warmup_fraction", h.warmup_fraction},
                     {"epochs", h.epochs},
                     {"batch_size", h.batch_size},
                     {"ca_warmup_epochs", h.ca_warmup_epochs},
                     {"ca_cluster_every", h.ca_cluster_every},
                     {"ca_num_clusters", h.ca_num_clusters}};
}

void from_json(const nlohmann::json &j, DinoHyper &h) {
  auto sched = [](const nlohmann::json &s) {
    return ScheduleSpec{s.at("start").get<double>(), s.at("end").get<double>(),
                        s.at("total_steps").get<std::int64_t>()};
  };
  try {
    j.at("teacher_temp").get_to(h.teacher_temp);
    j.at("student_temp").get_to(h.student_temp);
    j.at("consistency_weight").get_to(h.consistency_weight);
    j.at("center_momentum").get_to(h.center_momentum);
    j.at("include_self_pairs").get_to(h.include_self_pairs);
    h.ema_schedule = sched(j.at("ema_schedule"));
    h.lr_schedule = sched(j.at("lr_schedule"));
    j.at("warmup_fraction").get_to(h.warmup_fraction);
    j.at("epochs").get_to(h.epochs);
    j.at("batch_size").get_to(h.batch_size);
    j.at("ca_warmup_epochs").get_to(h.ca_warmup_epochs);
    j.at("ca_cluster_every").get_to(h.ca_cluster_every);
    j.at("ca_num_clusters").get_to(h.ca_num_clusters);
  } catch (const nlohmann::json::exception &e) {
    Fail(Errc::kFormat, std::string("bad dino hyperparameters: ") + e.what());
  }
  ValidateDinoHyper(h);
}

ModelState InitModelState(const EncoderConfig &cfg, Rng &rng) {
  ModelState s;
  s.cfg = cfg;
  s.student = InitParams(cfg, true, rng);
  s.teacher = s.student;
  s.center = Tensor({static_cast<std::size_t>(cfg.head_output_dim)});
  return s;
}

Tensor TeacherProbs(const Tensor &head_logits, const Tensor &center,
                    double teacher_temp) {
  if (head_logits.size() != center.size())
    Fail(Errc::kShapeMismatch, "teacher logits and center differ in length");
  RowVector shifted = head_logits.AsRow() - center.AsRow();
  return SoftmaxTemp(Tensor::FromRow(shifted), teacher_temp);
}

Tensor UpdateCenter(const Tensor &center, std::span<const Tensor> batch_logits,
                    double momentum) {
  if (batch_logits.empty()) Fail(Errc::kEmptyBatch, "center update needs a batch");
  RowVector mean = RowVector::Zero(static_cast<Eigen::Index>(center.size()));
  for (const Tensor &l : batch_logits) {
    if (l.size() != center.size()) Fail(Errc::kShapeMismatch, "logit length != center length");
    mean += l.AsRow();
  }
  mean /= static_cast<double>(batch_logits.size());
  RowVector out = momentum * center.AsRow() + (1.0 - momentum) * mean;
  return Tensor::FromRow(out);
}

double DinoCeLoss(std::span<const Tensor> teacher_probs,
                  std::span<const Tensor> student_logits, double student_temp,
                  bool include_self_pairs) {
  if (teacher_probs.size() != kLongViews || student_logits.size() != kViews)
    Fail(Errc::kShapeMismatch, "need 2 teacher and 6 student terms");
  for (const Tensor &p : teacher_probs) CheckDistribution(p);
  double total = 0;
  for (int v = 0; v < kViews; ++v) {
    if (student_logits[v].size() != teacher_probs[0].size())
      Fail(Errc::kShapeMismatch, "student and teacher widths differ");
    Tensor logq = LogSoftmaxTemp(student_logits[v], student_temp);
    for (int t = 0; t < kLongViews; ++t) {
      if (t == v && !include_self_pairs) continue;
      total -= teacher_probs[t].AsRow().dot(logq.AsRow());
    }
  }
  return total;
}

double ConsistencyLoss(std::span<const Tensor> embeddings) {
  if (embeddings.size() != kViews) Fail(Errc::kShapeMismatch, "need 6 embeddings");
  double total = 0;
  for (int e = 0; e < kLongViews; ++e)
    for (int o = 0; o < kViews; ++o)
      if (o != e) {
        if (!(Norm(embeddings[e]) > 0) || !(Norm(embeddings[o]) > 0))
          Fail(Errc::kZeroVector, "consistency of a zero embedding");
        total += 1.0 - CosineSimilarity(embeddings[e], embeddings[o]);
      }
  return total;
}

double TotalDinoLoss(double ce, double cons, double alpha) {
  double total = ce + alpha * cons;
  if (!std::isfinite(total)) Fail(Errc::kNonFiniteLoss, "dino loss is not finite");
  return total;
}

void EmaUpdate(ModelState &state, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) Fail(Errc::kInvalidConfig, "ema lambda must be in [0, 1]");
  if (state.teacher.size() != state.student.size())
    Fail(Errc::kShapeMismatch, "teacher and student layouts differ");
  for (std::size_t i = 0; i < state.teacher.size(); ++i) {
    auto t = state.teacher[i].value.values();
    auto s = state.student[i].value.values();
    if (t.size() != s.size()) Fail(Errc::kShapeMismatch, "teacher and student shapes differ");
    // Written as an increment so that teacher == student stays a fixed point.
    if (lambda == 0.0)
      std::copy(s.begin(), s.end(), t.begin());
    else
      for (std::size_t k = 0; k < t.size(); ++k) t[k] += (1.0 - lambda) * (s[k] - t[k]);
  }
}

DinoTapeLoss DinoLossOnTape(ad::Tape &tape, ad::Var student_logits,
                            ad::Var student_embeddings,
                            const Matrix &teacher_probs, const DinoHyper &h) {
  const Matrix &sl = tape.value(student_logits);
  const Eigen::Index sets = teacher_probs.rows() / kLongViews;
  if (sets < 1 || teacher_probs.rows() != sets * kLongViews || sl.rows() != sets * kViews ||
      sl.cols() != teacher_probs.cols())
    Fail(Errc::kShapeMismatch, "dino batch layout mismatch");

  // Cross-entropy is linear in the target, so every teacher term aimed at one
  // student view collapses into a single summed target row.
  Matrix target = Matrix::Zero(sl.rows(), sl.cols());
  for (Eigen::Index b = 0; b < sets; ++b)
    for (int v = 0; v < kViews; ++v)
      for (int t = 0; t < kLongViews; ++t)
        if (t != v || h.include_self_pairs)
          target.row(b * kViews + v) += teacher_probs.row(b * kLongViews + t);
  ad::Var logq = tape.LogSoftmaxRows(student_logits, h.student_temp);
  ad::Var ce = tape.Scale(tape.Sum(tape.CrossEntropyRows(target, logq)), 1.0 / sets);

  std::vector<int> lhs, rhs;
  for (Eigen::Index b = 0; b < sets; ++b)
    for (int e = 0; e < kLongViews; ++e)
      for (int o = 0; o < kViews; ++o)
        if (o != e) {
          lhs.push_back(static_cast<int>(b * kViews + e));
          rhs.push_back(static_cast<int>(b * kViews + o));
        }
  ad::Var cos = tape.CosineRows(tape.GatherRows(student_embeddings, lhs),
                                tape.GatherRows(student_embeddings, rhs), kEmbeddingNormFloor);
  const double pairs = static_cast<double>(lhs.size());
  ad::Var cons = tape.Scale(tape.AddScalar(tape.Scale(tape.Sum(cos), -1.0), pairs), 1.0 / sets);

  ad::Var total = tape.Add(ce, tape.Scale(cons, h.consistency_weight));
  return {ce, cons, total};
}

}  // namespace dlglc
