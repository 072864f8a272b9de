// src/lossgate/gate.cc

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

#include "dlglc/lossgate/gate.h"

#include <algorithm>
#include <cmath>

#include "dlglc/numkit/error.h"

namespace dlglc {

namespace {

constexpr std::size_t kMinRecord = 20;

void CheckDistribution(const Tensor &p) {
  double sum = 0;
  for (double v : p.values()) {
    if (!(v >= 0.0)) Fail(Errc::kNonDistribution, "negative or NaN probability");
    sum += v;
  }
  if (p.size() == 0 || std::abs(sum - 1.0) > 1e-9)
    Fail(Errc::kNonDistribution, "probabilities do not sum to 1");
}

int Argmax(const Tensor &p) {
  Eigen::Index k;
  p.AsRow().maxCoeff(&k);
  return static_cast<int>(k);
}

}  // namespace

void ValidateGate(const GateState &gate) {
  if (!(gate.tau2 > 0 && gate.tau2 <= 1)) Fail(Errc::kInvalidConfig, "tau2 must be in (0, 1]");
  if (!(gate.sharpness > 0)) Fail(Errc::kInvalidConfig, "sharpness must be > 0");
  if (std::isnan(gate.tau1)) Fail(Errc::kInvalidConfig, "tau1 is NaN");
}

double Percentile95(std::span<const double> xs) {
  if (xs.empty()) Fail(Errc::kEmptyInput, "percentile of an empty record");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double pos = 0.95 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::string_view RefreshStatusName(RefreshStatus s) {
  switch (s) {
    case RefreshStatus::kFitted: return "fitted";
    case RefreshStatus::kMidpointFallback: return "midpoint_fallback";
    case RefreshStatus::kDegenerateFallback: return "degenerate_fallback";
    case RefreshStatus::kTooFewSamples: return "too_few_samples";
    case RefreshStatus::kEmptyRecord: return "empty_record";
  }
  return "unknown";
}

RefreshResult RefreshThreshold(const GateState &gate, Rng &rng) {
  ValidateGate(gate);
  RefreshResult out;
  out.gate = gate;
  out.gate.loss_record.clear();
  const std::vector<double> &rec = gate.loss_record;
  if (rec.empty()) return out;
  if (rec.size() < kMinRecord) {
    out.status = RefreshStatus::kTooFewSamples;
    return out;
  }
  try {
    GmmFit fit = FitGmm2(rec, rng);
    out.gmm = fit.gmm;
    out.ll_trace = fit.ll_trace;
    Threshold t = SolveThreshold(fit.gmm);
    out.gate.tau1 = t.tau;
    out.status = t.midpoint_fallback ? RefreshStatus::kMidpointFallback : RefreshStatus::kFitted;
    return out;
  } catch (const Error &e) {
    if (e.code() != Errc::kDegenerateFit && e.code() != Errc::kDegenerateMeans) throw;
  }
  const double p95 = std::log(Percentile95(rec));
  out.gate.tau1 = std::nextafter(p95, std::numeric_limits<double>::infinity());
  out.status = RefreshStatus::kDegenerateFallback;
  return out;
}

std::string_view BranchName(Branch b) {
  switch (b) {
    case Branch::kReliable: return "reliable";
    case Branch::kCorrected: return "corrected";
    case Branch::kSkipped: return "skipped";
    case Branch::kHardLabel: return "hard_label";
  }
  return "unknown";
}

MmDecision MmGate(double loss_audio, double loss_visual, double tau_audio, double tau_visual,
                  const Tensor &p_audio, const Tensor &p_visual, double tau2) {
  CheckDistribution(p_audio);
  CheckDistribution(p_visual);
  MmDecision d;
  if (std::log(loss_audio) < tau_audio && std::log(loss_visual) < tau_visual) {
    d.kind = MmKind::kReliable;
    d.audio = d.visual = Branch::kReliable;
    return d;
  }
  const int ka = Argmax(p_audio), kv = Argmax(p_visual);
  if (ka == kv) {
    d.kind = MmKind::kHardLabel;
    d.hard_class = ka;
    d.audio = d.visual = Branch::kHardLabel;
    return d;
  }
  d.audio = p_audio.AsRow().maxCoeff() > tau2 ? Branch::kCorrected : Branch::kSkipped;
  d.visual = p_visual.AsRow().maxCoeff() > tau2 ? Branch::kCorrected : Branch::kSkipped;
  d.kind = d.audio == Branch::kSkipped && d.visual == Branch::kSkipped ? MmKind::kSkip
                                                                       : MmKind::kSoftLabel;
  return d;
}

}  // namespace dlglc
