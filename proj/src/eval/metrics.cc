// src/eval/metrics.cc

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

#include "dlglc/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/vector-ops.h"

namespace dlglc {

void ValidateScoredTrials(const ScoredTrials &st) {
  if (st.scores.size() != st.is_target.size())
    Fail(Errc::kDegenerateTrials, "scores and labels differ in length");
  std::size_t targets = std::count(st.is_target.begin(), st.is_target.end(), true);
  if (targets == 0 || targets == st.is_target.size())
    Fail(Errc::kDegenerateTrials, "need at least one target and one non-target");
  for (double s : st.scores)
    if (!std::isfinite(s)) Fail(Errc::kDegenerateTrials, "non-finite score");
}

ScoredTrials ScoreTrials(std::span<const Tensor> embeddings,
                         const TrialList &trials) {
  ScoredTrials st;
  for (const Trial &t : trials.trials) {
    auto valid = [&](int id) { return id >= 0 && static_cast<std::size_t>(id) < embeddings.size(); };
    if (!valid(t.utterance_a) || !valid(t.utterance_b))
      Fail(Errc::kUnknownUtterance, "trial references an unknown utterance");
    st.scores.push_back(CosineSimilarity(embeddings[t.utterance_a], embeddings[t.utterance_b]));
    st.is_target.push_back(t.is_target);
  }
  return st;
}

std::vector<OperatingPoint> SweepOperatingPoints(const ScoredTrials &st) {
  ValidateScoredTrials(st);
  const std::size_t n = st.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return st.scores[a] < st.scores[b]; });
  const double n_target =
      static_cast<double>(std::count(st.is_target.begin(), st.is_target.end(), true));
  const double n_nontarget = static_cast<double>(n) - n_target;

  std::vector<OperatingPoint> sweep;
  double rejected_targets = 0, rejected_nontargets = 0;
  sweep.push_back({-std::numeric_limits<double>::infinity(), 0.0, 1.0});
  std::size_t i = 0;
  while (i < n) {
    const double s = st.scores[order[i]];
    while (i < n && st.scores[order[i]] == s) {
      (st.is_target[order[i]] ? rejected_targets : rejected_nontargets) += 1.0;
      ++i;
    }
    double cut = i < n ? 0.5 * (s + st.scores[order[i]])
                       : std::numeric_limits<double>::infinity();
    sweep.push_back({cut, rejected_targets / n_target,
                     (n_nontarget - rejected_nontargets) / n_nontarget});
  }
  return sweep;
}

EerResult EerFromSweep(std::span<const OperatingPoint> sweep) {
  // miss - fa rises from -1 (accept all) to +1 (reject all).
  for (std::size_t j = 0; j < sweep.size(); ++j) {
    double d = sweep[j].miss_rate - sweep[j].false_alarm_rate;
    if (d < 0.0) continue;
    if (d == 0.0 || j == 0) return {sweep[j].miss_rate, sweep[j].threshold};
    const OperatingPoint &lo = sweep[j - 1];
    const OperatingPoint &hi = sweep[j];
    double d_lo = lo.miss_rate - lo.false_alarm_rate;
    double alpha = -d_lo / (d - d_lo);
    double eer = lo.miss_rate + alpha * (hi.miss_rate - lo.miss_rate);
    double t_lo = lo.threshold, t_hi = hi.threshold;
    double threshold;
    if (std::isinf(t_lo)) threshold = t_hi;
    else if (std::isinf(t_hi)) threshold = t_lo;
    else threshold = t_lo + alpha * (t_hi - t_lo);
    return {eer, threshold};
  }
  Fail(Errc::kDegenerateTrials, "sweep never reaches miss >= false alarm");
}

EerResult ComputeEer(const ScoredTrials &st) {
  std::vector<OperatingPoint> sweep = SweepOperatingPoints(st);
  return EerFromSweep(sweep);
}

double ComputeMinDcf(const ScoredTrials &st, const DcfConfig &cfg) {
  if (!(cfg.p_target > 0.0 && cfg.p_target < 1.0))
    Fail(Errc::kInvalidConfig, "p_target must lie in (0, 1)");
  if (!(cfg.c_miss > 0.0 && cfg.c_fa > 0.0))
    Fail(Errc::kInvalidConfig, "detection costs must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (const OperatingPoint &op : SweepOperatingPoints(st)) {
    double c = cfg.c_miss * op.miss_rate * cfg.p_target +
               cfg.c_fa * op.false_alarm_rate * (1.0 - cfg.p_target);
    best = std::min(best, c);
  }
  if (cfg.normalize)
    best /= std::min(cfg.c_miss * cfg.p_target, cfg.c_fa * (1.0 - cfg.p_target));
  return best;
}

double Nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) Fail(Errc::kLengthMismatch, "labelings differ in length");
  if (a.empty()) Fail(Errc::kEmptyInput, "nmi of empty labelings");
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    joint[{a[i], b[i]}] += 1;
  }
  auto entropy = [n](const std::map<int, double> &c) {
    double h = 0;
    for (auto &[k, v] : c) h -= (v / n) * std::log(v / n);
    return h;
  };
  double ha = entropy(ca), hb = entropy(cb);
  if (ha + hb == 0.0) return 1.0;
  double mi = 0;
  for (auto &[key, v] : joint)
    mi += (v / n) * std::log(v * n / (ca[key.first] * cb[key.second]));
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

double Purity(std::span<const int> pseudo, std::span<const int> truth) {
  if (pseudo.size() != truth.size())
    Fail(Errc::kLengthMismatch, "labelings differ in length");
  if (pseudo.empty()) Fail(Errc::kEmptyInput, "purity of empty labelings");
  std::map<int, std::map<int, int>> overlap;
  for (std::size_t i = 0; i < pseudo.size(); ++i) ++overlap[pseudo[i]][truth[i]];
  double total = 0;
  for (auto &[cluster, counts] : overlap) {
    int best = 0;
    for (auto &[cls, c] : counts) best = std::max(best, c);
    total += best;
  }
  return total / static_cast<double>(pseudo.size());
}

}  // namespace dlglc
