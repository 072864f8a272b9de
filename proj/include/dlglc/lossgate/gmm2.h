// include/dlglc/lossgate/gmm2.h

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

#ifndef DLGLC_LOSSGATE_GMM2_H_
#define DLGLC_LOSSGATE_GMM2_H_

#include <span>
#include <vector>

#include "json.hpp"
#include "dlglc/numkit/rng.h"

namespace dlglc {

constexpr double kGmmVarianceFloor = 1e-6;
constexpr double kGmmWeightFloor = 1e-6;

// Two univariate Gaussians; component 1 has the smaller mean.
struct Gmm2 {
  double weight1 = 0.5, weight2 = 0.5;
  double mean1 = 0.0, mean2 = 1.0;
  double var1 = 1.0, var2 = 1.0;
};

void to_json(nlohmann::json &j, const Gmm2 &g);
void from_json(const nlohmann::json &j, Gmm2 &g);

double GaussianPdf(double x, double mean, double var);

struct GmmFitOptions {
  int max_em_iters = 200;
  double tol = 1e-8;
  // Random-start fits in addition to the quantile start.
  int restarts = 2;
};

struct GmmFit {
  Gmm2 gmm;
  // Mean log-likelihood after every EM update of the returned fit.
  std::vector<double> ll_trace;
  int iterations = 0;
  // Every fit tried, in start order; each one non-decreasing.
  std::vector<std::vector<double>> all_traces;
};

// EM on log(loss). Needs >= 20 positive losses.
GmmFit FitGmm2(std::span<const double> losses, Rng &rng,
               const GmmFitOptions &opts = {});
// Same fit on values already in the log domain.
GmmFit FitGmm2Log(std::span<const double> xs, Rng &rng,
                  const GmmFitOptions &opts = {});

// Mean log-likelihood of xs under g.
double MeanLogLikelihood(const Gmm2 &g, std::span<const double> xs);

struct Threshold {
  double tau = 0.0;
  // Set when no crossing lies between the means and tau is their midpoint.
  bool midpoint_fallback = false;
};

// Crossing of weight1*N1 and weight2*N2 between the two means.
Threshold SolveThreshold(const Gmm2 &g);

}  // namespace dlglc

#endif  // DLGLC_LOSSGATE_GMM2_H_
