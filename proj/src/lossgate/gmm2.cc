// src/lossgate/gmm2.cc

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

#include "dlglc/lossgate/gmm2.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dlglc/numkit/error.h"

namespace dlglc {

namespace {

constexpr int kMinSamples = 20;

double LogPdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

double LogSumExp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double Quantile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct RunResult {
  Gmm2 g;
  std::vector<double> trace;
  bool floored1 = false, floored2 = false;
};

RunResult RunEm(std::span<const double> xs, Gmm2 g, const GmmFitOptions &opts) {
  const std::size_t n = xs.size();
  std::vector<double> r(n);
  RunResult out;
  double prev = MeanLogLikelihood(g, xs);
  for (int it = 0; it < opts.max_em_iters; ++it) {
    // E step.
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::log(g.weight1) + LogPdf(xs[i], g.mean1, g.var1);
      const double b = std::log(g.weight2) + LogPdf(xs[i], g.mean2, g.var2);
      r[i] = std::exp(a - LogSumExp(a, b));
    }
    // M step.
    double n1 = 0, s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      n1 += r[i];
      s1 += r[i] * xs[i];
      s2 += (1.0 - r[i]) * xs[i];
    }
    const double n2 = static_cast<double>(n) - n1;
    Gmm2 next = g;
    if (n1 > 0) next.mean1 = s1 / n1;
    if (n2 > 0) next.mean2 = s2 / n2;
    double v1 = 0, v2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v1 += r[i] * (xs[i] - next.mean1) * (xs[i] - next.mean1);
      v2 += (1.0 - r[i]) * (xs[i] - next.mean2) * (xs[i] - next.mean2);
    }
    v1 = n1 > 0 ? v1 / n1 : 0.0;
    v2 = n2 > 0 ? v2 / n2 : 0.0;
    out.floored1 = v1 < kGmmVarianceFloor;
    out.floored2 = v2 < kGmmVarianceFloor;
    next.var1 = std::max(v1, kGmmVarianceFloor);
    next.var2 = std::max(v2, kGmmVarianceFloor);
    next.weight1 = std::clamp(n1 / static_cast<double>(n), kGmmWeightFloor, 1.0 - kGmmWeightFloor);
    next.weight2 = 1.0 - next.weight1;

    const double ll = MeanLogLikelihood(next, xs);
    // The floors make this a constrained step; keep the old parameters if it
    // would lower the likelihood.
    if (ll < prev) break;
    g = next;
    out.trace.push_back(ll);
    if (std::abs(ll - prev) < opts.tol) break;
    prev = ll;
  }
  if (g.mean1 > g.mean2) {
    std::swap(g.mean1, g.mean2);
    std::swap(g.var1, g.var2);
    std::swap(g.weight1, g.weight2);
    std::swap(out.floored1, out.floored2);
  }
  out.g = g;
  return out;
}

}  // namespace

void to_json(nlohmann::json &j, const Gmm2 &g) {
  j = nlohmann::json{{"weight1", g.weight1}, {"weight2", g.weight2}, {"mean1", g.mean1},
                     {"mean2", g.mean2},     {"var1", g.var1},       {"var2", g.var2}};
}

void from_json(const nlohmann::json &j, Gmm2 &g) {
  j.at("weight1").get_to(g.weight1);
  j.at("weight2").get_to(g.weight2);
  j.at("mean1").get_to(g.mean1);
  j.at("mean2").get_to(g.mean2);
  j.at("var1").get_to(g.var1);
  j.at("var2").get_to(g.var2);
}

double GaussianPdf(double x, double mean, double var) {
  if (!(var > 0)) Fail(Errc::kNonPositiveVariance, "gaussian variance must be > 0");
  const double d = x - mean;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

double MeanLogLikelihood(const Gmm2 &g, std::span<const double> xs) {
  double ll = 0;
  const double lw1 = std::log(g.weight1), lw2 = std::log(g.weight2);
  for (double x : xs) ll += LogSumExp(lw1 + LogPdf(x, g.mean1, g.var1), lw2 + LogPdf(x, g.mean2, g.var2));
  return ll / static_cast<double>(xs.size());
}

GmmFit FitGmm2Log(std::span<const double> xs, Rng &rng, const GmmFitOptions &opts) {
  if (static_cast<int>(xs.size()) < kMinSamples)
    Fail(Errc::kTooFewSamples, "gmm fit needs at least 20 samples");
  for (double x : xs)
    if (!std::isfinite(x)) Fail(Errc::kNonFiniteLoss, "gmm fit on a non-finite value");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  double mean = 0, var = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  for (double x : xs) var += (x - mean) * (x - mean);
  var = std::max(var / static_cast<double>(xs.size()), kGmmVarianceFloor);

  std::vector<Gmm2> starts;
  const double quarter = std::max(var / 4, kGmmVarianceFloor);
  starts.push_back({0.5, 0.5, Quantile(sorted, 0.25), Quantile(sorted, 0.75), quarter, quarter});
  for (int r = 0; r < opts.restarts; ++r) {
    double a = xs[rng.Index(xs.size())], b = xs[rng.Index(xs.size())];
    starts.push_back({0.5, 0.5, std::min(a, b), std::max(a, b), var, var});
  }

  GmmFit fit;
  double best = -std::numeric_limits<double>::infinity();
  bool degenerate = true;
  for (const Gmm2 &s : starts) {
    RunResult run = RunEm(xs, s, opts);
    const double ll = run.trace.empty() ? MeanLogLikelihood(run.g, xs) : run.trace.back();
    fit.all_traces.push_back(run.trace);
    if (ll > best) {
      best = ll;
      fit.gmm = run.g;
      fit.ll_trace = run.trace;
      fit.iterations = static_cast<int>(run.trace.size());
      degenerate = run.floored1 && run.floored2;
    }
  }
  if (degenerate) Fail(Errc::kDegenerateFit, "both mixture variances collapsed to the floor");
  return fit;
}

GmmFit FitGmm2(std::span<const double> losses, Rng &rng, const GmmFitOptions &opts) {
  std::vector<double> xs;
  xs.reserve(losses.size());
  for (double l : losses) {
    if (!(l > 0)) Fail(Errc::kNonFiniteLoss, "gmm fit needs positive losses");
    xs.push_back(std::log(l));
  }
  return FitGmm2Log(xs, rng, opts);
}

Threshold SolveThreshold(const Gmm2 &g) {
  if (g.mean1 == g.mean2) Fail(Errc::kDegenerateMeans, "mixture means coincide");
  if (g.mean1 > g.mean2) Fail(Errc::kDegenerateMeans, "mixture means out of order");
  if (!(g.var1 > 0 && g.var2 > 0)) Fail(Errc::kNonPositiveVariance, "mixture variance must be > 0");
  // f(x) = log(w1 N1(x)) - log(w2 N2(x)) = a x^2 + b x + c.
  auto f = [&](double x) {
    return std::log(g.weight1) + LogPdf(x, g.mean1, g.var1) - std::log(g.weight2) -
           LogPdf(x, g.mean2, g.var2);
  };
  const double a = 0.5 / g.var2 - 0.5 / g.var1;
  const double b = g.mean1 / g.var1 - g.mean2 / g.var2;
  const double c = -0.5 * g.mean1 * g.mean1 / g.var1 + 0.5 * g.mean2 * g.mean2 / g.var2 +
                   std::log(g.weight1 / g.weight2) + 0.5 * std::log(g.var2 / g.var1);

  std::vector<double> roots;
  if (std::abs(a) < 1e-14 * (std::abs(b) + std::abs(c))) {
    if (b != 0) roots.push_back(-c / b);
  } else {
    const double disc = b * b - 4 * a * c;
    if (disc >= 0) {
      // Stable form of the two roots.
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      roots.push_back(q / a);
      if (q != 0) roots.push_back(c / q);
    }
  }
  double lo = g.mean1, hi = g.mean2;
  const double mid = 0.5 * (lo + hi);
  double best = std::numeric_limits<double>::quiet_NaN();
  for (double r : roots)
    if (r >= lo && r <= hi && (std::isnan(best) || std::abs(r - mid) < std::abs(best - mid))) best = r;
  if (std::isnan(best)) return {mid, true};

  // Polish by bisection when the interval brackets a sign change.
  double flo = f(lo), fhi = f(hi);
  if ((flo > 0) != (fhi > 0)) {
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
      const double m = 0.5 * (lo + hi);
      if (m <= lo || m >= hi) break;
      if ((f(m) > 0) == (flo > 0)) lo = m; else hi = m;
    }
    best = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
  }
  const double p1 = g.weight1 * GaussianPdf(best, g.mean1, g.var1);
  const double p2 = g.weight2 * GaussianPdf(best, g.mean2, g.var2);
  if (!(std::abs(p1 - p2) < 1e-9)) return {mid, true};
  return {best, false};
}

}  // namespace dlglc
