// include/dlglc/eval/metrics.h

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

#ifndef DLGLC_EVAL_METRICS_H_
#define DLGLC_EVAL_METRICS_H_

#include <span>
#include <vector>

#include "dlglc/numkit/tensor.h"
#include "dlglc/synthworld/world.h"

namespace dlglc {

struct ScoredTrials {
  std::vector<double> scores;
  std::vector<bool> is_target;
};

// Throws DegenerateTrials unless lengths match and both classes are present.
void ValidateScoredTrials(const ScoredTrials &st);

// Cosine score of every trial; embeddings are indexed by utterance id.
ScoredTrials ScoreTrials(std::span<const Tensor> embeddings,
                         const TrialList &trials);

// A verification operating point: scores above the threshold are accepted.
struct OperatingPoint {
  double threshold;
  double miss_rate;         // targets rejected
  double false_alarm_rate;  // non-targets accepted
};

// All distinct operating points: accept-all, one between each pair of
// adjacent distinct scores (at the midpoint), and reject-all.
std::vector<OperatingPoint> SweepOperatingPoints(const ScoredTrials &st);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Equal error rate, linearly interpolated between the two adjacent
// operating points where miss - false alarm changes sign.
EerResult ComputeEer(const ScoredTrials &st);
// Same estimator applied to a precomputed sweep.
EerResult EerFromSweep(std::span<const OperatingPoint> sweep);

struct DcfConfig {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;
  bool normalize = true;
};

double ComputeMinDcf(const ScoredTrials &st, const DcfConfig &cfg = {});

// Mutual information normalized by the arithmetic mean of the two entropies.
double Nmi(std::span<const int> labels_a, std::span<const int> labels_b);
double Purity(std::span<const int> pseudo, std::span<const int> truth);

}  // namespace dlglc

#endif  // DLGLC_EVAL_METRICS_H_
