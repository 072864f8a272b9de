// include/dlglc/lossgate/gate.h

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

#ifndef DLGLC_LOSSGATE_GATE_H_
#define DLGLC_LOSSGATE_GATE_H_

#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dlglc/lossgate/gmm2.h"
#include "dlglc/numkit/rng.h"
#include "dlglc/numkit/tensor.h"

namespace dlglc {

// tau1 lives in the log-loss domain: a sample is reliable when
// log(loss) < tau1. +inf opens the gate, -inf closes it.
struct GateState {
  double tau1 = std::numeric_limits<double>::infinity();
  double tau2 = 0.5;
  double sharpness = 0.1;
  std::vector<double> loss_record;  // raw clean losses, batch order
};

void ValidateGate(const GateState &gate);

// 95th percentile with linear interpolation between order statistics.
double Percentile95(std::span<const double> xs);

enum class RefreshStatus {
  kFitted,
  kMidpointFallback,    // no crossing between the means
  kDegenerateFallback,  // unimodal record, tau1 just above the 95th percentile
  kTooFewSamples,       // tau1 kept
  kEmptyRecord,         // tau1 kept
};
std::string_view RefreshStatusName(RefreshStatus s);

struct RefreshResult {
  GateState gate;  // record cleared
  RefreshStatus status = RefreshStatus::kEmptyRecord;
  std::optional<Gmm2> gmm;
  std::vector<double> ll_trace;
  bool warning() const {
    return status != RefreshStatus::kFitted && status != RefreshStatus::kEmptyRecord;
  }
};

// Fits the mixture on log(loss_record) and moves tau1 to the crossing.
RefreshResult RefreshThreshold(const GateState &gate, Rng &rng);

enum class Branch { kReliable, kCorrected, kSkipped, kHardLabel };
std::string_view BranchName(Branch b);

enum class MmKind { kReliable, kHardLabel, kSoftLabel, kSkip };

struct MmDecision {
  MmKind kind = MmKind::kSkip;
  int hard_class = -1;
  // Per-modality branch; kCorrected or kSkipped under kSoftLabel.
  Branch audio = Branch::kSkipped;
  Branch visual = Branch::kSkipped;
};

// Losses are raw (positive); thresholds are in the log domain.
MmDecision MmGate(double loss_audio, double loss_visual, double tau_audio, double tau_visual,
                  const Tensor &p_audio, const Tensor &p_visual, double tau2);

}  // namespace dlglc

#endif  // DLGLC_LOSSGATE_GATE_H_
