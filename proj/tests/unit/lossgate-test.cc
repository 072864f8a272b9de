// tests/unit/lossgate-test.cc

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "gate-oracles.h"
#include "hand-batch.h"
#include "dlglc/lossgate/aam.h"
#include "dlglc/lossgate/dlg-lc.h"
#include "dlglc/lossgate/gate.h"
#include "dlglc/lossgate/gmm2.h"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/grad-check.h"
#include "dlglc/numkit/vector-ops.h"

using namespace dlglc;
using namespace dlglc::oracle;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Errc CodeOf(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::kFormat;
}

bool NonDecreasing(const std::vector<double> &t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] < t[i - 1]) return false;
  return true;
}

}  // namespace

TEST_CASE("gaussian_pdf") {
  CHECK(GaussianPdf(0.3, 0.3, 1.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(GaussianPdf(2.5, 2.0, 0.25) / GaussianPdf(2.0, 2.0, 0.25) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  // Composite Simpson over +-8 sigma.
  for (double var : {0.01, 1.0, 9.0}) {
    const double mu = -1.5, sd = std::sqrt(var), lo = mu - 8 * sd, hi = mu + 8 * sd;
    const int n = 20000;
    const double h = (hi - lo) / n;
    double s = GaussianPdf(lo, mu, var) + GaussianPdf(hi, mu, var);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * GaussianPdf(lo + i * h, mu, var);
    CHECK(std::abs(s * h / 3 - 1.0) < 1e-6);
  }
  CHECK(CodeOf([] { GaussianPdf(0, 0, 0); }) == Errc::kNonPositiveVariance);
  CHECK(CodeOf([] { GaussianPdf(0, 0, -1); }) == Errc::kNonPositiveVariance);
}

TEST_CASE("fit_gmm2 recovers a known mixture with a monotone likelihood trace") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 eng(seed);
    std::vector<double> logs = oracle::SampleMixture(eng, 5000, 0.5, -2.0, 0.3, 1.0, 0.5);
    std::vector<double> losses;
    for (double x : logs) losses.push_back(std::exp(x));
    Rng rng(seed);
    GmmFit fit = FitGmm2(losses, rng);
    CHECK(std::abs(fit.gmm.mean1 - -2.0) < 0.05);
    CHECK(std::abs(fit.gmm.mean2 - 1.0) < 0.05);
    CHECK(std::abs(fit.gmm.weight1 - 0.5) < 0.03);
    CHECK(std::abs(fit.gmm.weight2 - 0.5) < 0.03);
    CHECK(std::abs(fit.gmm.weight1 + fit.gmm.weight2 - 1.0) < 1e-9);
    CHECK(fit.gmm.mean1 <= fit.gmm.mean2);
    REQUIRE(!fit.all_traces.empty());
    for (const auto &t : fit.all_traces) CHECK(NonDecreasing(t));
    CHECK(NonDecreasing(fit.ll_trace));
  }
  // Skewed weights and unequal spreads.
  std::mt19937_64 eng(9);
  std::vector<double> logs = oracle::SampleMixture(eng, 5000, 0.8, -3.0, 0.4, 0.0, 0.8);
  Rng rng(9);
  GmmFit fit = FitGmm2Log(logs, rng);
  CHECK(std::abs(fit.gmm.mean1 - -3.0) < 0.05);
  CHECK(std::abs(fit.gmm.mean2 - 0.0) < 0.05);
  CHECK(std::abs(fit.gmm.weight1 - 0.8) < 0.03);
  for (const auto &t : fit.all_traces) CHECK(NonDecreasing(t));

  Rng r2(1);
  std::vector<double> same(50, 0.7);
  CHECK(CodeOf([&] { FitGmm2(same, r2); }) == Errc::kDegenerateFit);
  std::vector<double> few(19, 1.0);
  CHECK(CodeOf([&] { FitGmm2(few, r2); }) == Errc::kTooFewSamples);
  std::vector<double> neg(30, 1.0);
  neg[3] = 0.0;
  CHECK(CodeOf([&] { FitGmm2(neg, r2); }) == Errc::kNonFiniteLoss);
}

TEST_CASE("solve_threshold") {
  Threshold sym = SolveThreshold({0.5, 0.5, -1.0, 3.0, 0.7, 0.7});
  CHECK(!sym.midpoint_fallback);
  CHECK(sym.tau == doctest::Approx(1.0).epsilon(1e-12));

  Gmm2 g{0.7, 0.3, 0.0, 3.0, 1.0, 2.25};
  Threshold t = SolveThreshold(g);
  CHECK(!t.midpoint_fallback);
  double spacing = 0;
  const double grid = oracle::GridCrossing(0.7, 0.0, 1.0, 0.3, 3.0, 1.5, 0.0, 3.0, 1000000, &spacing);
  CHECK(std::abs(t.tau - grid) <= spacing);
  CHECK(std::abs(0.7 * oracle::NormalDensity(t.tau, 0, 1) - 0.3 * oracle::NormalDensity(t.tau, 3, 1.5)) < 1e-9);

  // Random well-posed mixtures: the crossing always meets the density bound.
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    Gmm2 r{0, 0, -5 + 5 * u(eng), 0, 0.01 + 2 * u(eng), 0.01 + 2 * u(eng)};
    r.weight1 = 0.05 + 0.9 * u(eng);
    r.weight2 = 1 - r.weight1;
    r.mean2 = r.mean1 + 0.1 + 5 * u(eng);
    Threshold s = SolveThreshold(r);
    if (s.midpoint_fallback) {
      CHECK(s.tau == doctest::Approx(0.5 * (r.mean1 + r.mean2)));
      // No crossing anywhere between the means.
      const double sd1 = std::sqrt(r.var1), sd2 = std::sqrt(r.var2);
      auto diff = [&](double x) {
        return r.weight1 * oracle::NormalDensity(x, r.mean1, sd1) - r.weight2 * oracle::NormalDensity(x, r.mean2, sd2);
      };
      const bool sign = diff(r.mean1) > 0;
      bool crossed = false;
      for (int k = 1; k <= 10000; ++k) crossed |= (diff(r.mean1 + k * (r.mean2 - r.mean1) / 10000) > 0) != sign;
      CHECK(!crossed);
      continue;
    }
    ++checked;
    CHECK(s.tau >= r.mean1);
    CHECK(s.tau <= r.mean2);
    CHECK(std::abs(r.weight1 * GaussianPdf(s.tau, r.mean1, r.var1) -
                   r.weight2 * GaussianPdf(s.tau, r.mean2, r.var2)) < 1e-9);
  }
  CHECK(checked > 0);

  // The heavy second component dominates everywhere between the means.
  Threshold none = SolveThreshold({0.001, 0.999, 0.0, 0.5, 1.0, 1.0});
  CHECK(none.midpoint_fallback);
  CHECK(none.tau == doctest::Approx(0.25));
  CHECK(CodeOf([] { SolveThreshold({0.5, 0.5, 1.0, 1.0, 1.0, 2.0}); }) == Errc::kDegenerateMeans);
}

TEST_CASE("aam_loss") {
  Rng rng(4);
  Tensor w({5, 4});
  for (double &v : w.values()) v = rng.Normal();
  for (int trial = 0; trial < 20; ++trial) {
    Tensor e({4});
    for (double &v : e.values()) v = rng.Normal();
    const int y = static_cast<int>(rng.Index(5));
    AamResult r = AamLoss(e, y, w, {30.0, 0.0});
    // Margin-free: plain softmax cross-entropy over s * cosines.
    std::vector<double> ev(e.values().begin(), e.values().end());
    std::vector<std::vector<double>> wv;
    for (int k = 0; k < 5; ++k) wv.push_back({w.AsMatrix()(k, 0), w.AsMatrix()(k, 1), w.AsMatrix()(k, 2), w.AsMatrix()(k, 3)});
    std::vector<double> p = CosineSoftmax(ev, wv, 30.0);
    CHECK(std::abs(r.loss - -std::log(p[y])) < 1e-10);
    for (int k = 0; k < 5; ++k) CHECK(std::abs(r.probs[k] - p[k]) < 1e-12);
  }
  // Embedding parallel to its class row, the other row orthogonal.
  Tensor w2({2, 2}, {3, 0, 0, 2});
  AamResult par = AamLoss(Tensor({2}, {0.5, 0}), 0, w2, {});
  const double t = std::exp(30 * std::cos(0.2));
  CHECK(par.loss == doctest::Approx(-std::log(t / (t + 1))).epsilon(1e-12));
  CHECK(par.probs[0] == doctest::Approx(t / (t + 1)));

  CHECK(CodeOf([&] { AamLoss(Tensor({2}), 0, w2, {}); }) == Errc::kZeroVector);
  CHECK(CodeOf([&] { AamLoss(Tensor({2}, {1, 1}), 2, w2, {}); }) == Errc::kInvalidLabel);
  CHECK(CodeOf([&] { AamLoss(Tensor({2}, {1, 1}), 0, w2, {30, 1.6}); }) == Errc::kInvalidConfig);

  // Tape gradient w.r.t. embeddings and class rows.
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Param x(Tensor({3, 4})), wp(Tensor({5, 4}));
    for (double &v : x.value.values()) v = rng.Normal();
    for (double &v : wp.value.values()) v = rng.Normal();
    std::vector<int> labels{static_cast<int>(rng.Index(5)), static_cast<int>(rng.Index(5)),
                            static_cast<int>(rng.Index(5))};
    std::vector<Param> point{x, wp};
    auto loss = [&](ad::Tape &tape, std::span<const ad::Var> p) {
      return tape.Sum(AamOnTape(tape, p[0], p[1], labels, {}).losses);
    };
    worst = std::max(worst, GradCheck(loss, point, 1e-6));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("cross_entropy_at stays accurate for tiny losses") {
  RowVector z(3);
  z << 60, 0, -60;
  CHECK(CrossEntropyAt(z, 0) == doctest::Approx(std::exp(-60.0) + std::exp(-120.0)).epsilon(1e-12));
  CHECK(CrossEntropyAt(z, 0) > 0);
  CHECK(CrossEntropyAt(z, 2) == doctest::Approx(120 + std::log1p(std::exp(-60.0) + std::exp(-120.0))));
}

TEST_CASE("sharpen") {
  Tensor uni = Probs({0.25, 0.25, 0.25, 0.25});
  for (double eps : {0.05, 0.1, 1.0, 3.0}) {
    Tensor s = Sharpen(uni, eps);
    for (int k = 0; k < 4; ++k) CHECK(s[k] == doctest::Approx(0.25).epsilon(1e-14));
  }
  Tensor p = Probs({0.2, 0.5, 0.3});
  Tensor id = Sharpen(p, 1.0);
  for (int k = 0; k < 3; ++k) CHECK(id[k] == doctest::Approx(p[k]).epsilon(1e-14));

  Tensor s = Sharpen(Probs({0.6, 0.3, 0.1}), 0.1);
  const double a = std::pow(0.6, 10), b = std::pow(0.3, 10), c = std::pow(0.1, 10);
  CHECK(s[0] == doctest::Approx(a / (a + b + c)).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(b / (a + b + c)).epsilon(1e-12));
  CHECK(s[2] == doctest::Approx(c / (a + b + c)).epsilon(1e-12));
  CHECK(s[0] > 0.99);

  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(6);
    double sum = 0;
    for (double &x : v) sum += (x = u(eng));
    for (double &x : v) x /= sum;
    Tensor q = Probs(v);
    Tensor out = Sharpen(q, 0.05 + u(eng));
    Eigen::Index ka, kb;
    q.AsRow().maxCoeff(&ka);
    out.AsRow().maxCoeff(&kb);
    CHECK(ka == kb);
    CHECK(out.AsRow().sum() == doctest::Approx(1.0));
  }
  CHECK(CodeOf([] { Sharpen(Probs({0.5, 0.6}), 0.1); }) == Errc::kNonDistribution);
}

TEST_CASE("lc_loss") {
  CHECK(!LcLoss(Probs({0.4, 0.35, 0.25}), Probs({0.2, 0.3, 0.5}), 0.5, 0.1).has_value());
  CHECK(!LcLoss(Probs({0.5, 0.3, 0.2}), Probs({0.2, 0.3, 0.5}), 0.5, 0.1).has_value());

  Tensor pc = Probs({0.7, 0.2, 0.1});
  Tensor target = Sharpen(pc, 0.1);
  double ent = 0;
  for (int k = 0; k < 3; ++k) ent -= target[k] * std::log(target[k]);
  CHECK(*LcLoss(pc, target, 0.5, 0.1) == doctest::Approx(ent).epsilon(1e-12));

  // Hand-rolled: target ~ (0.7^10, 0.2^10, 0.1^10) normalized.
  Tensor pa = Probs({0.5, 0.3, 0.2});
  const double a = std::pow(0.7, 10), b = std::pow(0.2, 10), c = std::pow(0.1, 10), z = a + b + c;
  const double want = -(a / z * std::log(0.5) + b / z * std::log(0.3) + c / z * std::log(0.2));
  CHECK(*LcLoss(pc, pa, 0.5, 0.1) == doctest::Approx(want).epsilon(1e-12));
  CHECK(CodeOf([&] { LcLoss(Probs({0.7, 0.2}), pa, 0.5, 0.1); }) == Errc::kNonDistribution);
}

TEST_CASE("dlg_lc_step follows the hand-simulated branches in every regime") {
  HandBatch hb;
  using B = Branch;
  const B R = B::kReliable, C = B::kCorrected, S = B::kSkipped;
  struct Regime {
    const char *name;
    double tau1, tau2;
    std::vector<Branch> want;
  };
  const std::vector<Regime> regimes{
      {"reliable", kInf, 0.5, {R, R, R, R, R, R, R, R}},
      {"lc", -kInf, 0.5, {C, C, S, C, C, C, S, C}},
      {"skip", -kInf, 1.0, {S, S, S, S, S, S, S, S}},
      {"mixed", 0.0, 0.5, {R, C, S, C, R, R, S, C}},
  };
  for (const Regime &g : regimes) {
    CAPTURE(g.name);
    StepRun r = RunHand(hb, g.tau1, g.tau2, true);
    CHECK(r.branches == g.want);
    CHECK(r.total == doctest::Approx(HandTotal(hb, g.want, g.tau2)).epsilon(1e-10));
    REQUIRE(r.gate.loss_record.size() == 8);
    for (int i = 0; i < 8; ++i) {
      CHECK(r.audit[i].sample_id == hb.ids[i]);
      CHECK(r.audit[i].epoch == 4);
      CHECK(r.audit[i].tau1 == g.tau1);
      CHECK(r.audit[i].log_loss == doctest::Approx(std::log(r.gate.loss_record[i])));
    }
  }
  // Open gate is plain AAM over the augmented views.
  StepRun open = RunHand(hb, kInf, 0.5, true);
  double plain = 0;
  for (int i = 0; i < 8; ++i)
    plain += AamLoss(Tensor::FromRow(hb.aug.row(i)), hb.labels[i], Tensor::FromMatrix(hb.w), {}).loss;
  CHECK(open.total == doctest::Approx(plain / 8).epsilon(1e-12));
  // Closed gate: zero loss and zero gradient.
  StepRun closed = RunHand(hb, -kInf, 1.0, true);
  CHECK(closed.total == 0.0);
  CHECK(closed.aug_grad.cwiseAbs().maxCoeff() == 0.0);
  // Without label correction the LC candidates are skipped.
  StepRun nolc = RunHand(hb, 0.0, 0.5, false);
  CHECK(nolc.branches == std::vector<Branch>{R, S, S, S, R, R, S, S});
}

TEST_CASE("dlg_lc_step gradient flows only through the augmented view") {
  HandBatch hb;
  Rng rng(6);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Matrix clean = hb.clean;
    for (Eigen::Index i = 0; i < clean.size(); ++i) clean.data()[i] += 0.3 * rng.Normal();
    Param aug(Tensor::FromMatrix(hb.aug));
    for (double &v : aug.value.values()) v += 0.3 * rng.Normal();
    GateState gate;
    gate.tau1 = rng.Normal(0.0, 2.0);
    std::vector<Param> point{aug};
    auto loss = [&](ad::Tape &tape, std::span<const ad::Var> p) {
      GateState g = gate;
      DlgBatch b{&clean, p[0], tape.Constant(hb.w)};
      return DlgLcStep(tape, b, hb.labels, hb.ids, 0, g, {}, true).total;
    };
    worst = std::max(worst, GradCheck(loss, point, 1e-6));

    // A clean leaf on the same tape never receives gradient.
    ad::Tape tape;
    Param cp(Tensor::FromMatrix(clean));
    ad::Var cl = tape.Leaf(cp);
    const Matrix clean_values = tape.value(cl);
    DlgBatch b{&clean_values, tape.Leaf(aug), tape.Constant(hb.w)};
    GateState g = gate;
    tape.Backward(DlgLcStep(tape, b, hb.labels, hb.ids, 0, g, {}, true).total);
    CHECK(tape.grad(cl).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("raising tau1 never shrinks the reliable set") {
  HandBatch hb;
  std::vector<bool> prev(8, false);
  for (double tau : {-kInf, -20.0, -5.0, 0.0, 1.0, 2.0, 5.0, kInf}) {
    StepRun r = RunHand(hb, tau, 0.5, true);
    for (int i = 0; i < 8; ++i) {
      const bool rel = r.branches[i] == Branch::kReliable;
      if (prev[i]) CHECK(rel);
      prev[i] = rel;
    }
  }
}

TEST_CASE("refresh_threshold") {
  // Known bimodal record: analytic crossing from the closed-form quadratic.
  const double w1 = 0.6, m1 = -2.5, s1 = 0.4, m2 = 0.5, s2 = 0.6;
  const double a = 0.5 / (s2 * s2) - 0.5 / (s1 * s1);
  const double b = m1 / (s1 * s1) - m2 / (s2 * s2);
  const double c = -0.5 * m1 * m1 / (s1 * s1) + 0.5 * m2 * m2 / (s2 * s2) +
                   std::log(w1 / (1 - w1)) + std::log(s2 / s1);
  const double disc = std::sqrt(b * b - 4 * a * c);
  double crossing = (-b + disc) / (2 * a);
  if (crossing < m1 || crossing > m2) crossing = (-b - disc) / (2 * a);
  std::mt19937_64 eng(2);
  GateState gate;
  for (double x : oracle::SampleMixture(eng, 5000, w1, m1, s1, m2, s2)) gate.loss_record.push_back(std::exp(x));
  Rng rng(2);
  RefreshResult r = RefreshThreshold(gate, rng);
  CHECK(r.status == RefreshStatus::kFitted);
  CHECK(!r.warning());
  CHECK(std::abs(r.gate.tau1 - crossing) < 0.05);
  CHECK(r.gate.loss_record.empty());
  CHECK(NonDecreasing(r.ll_trace));

  // Unimodal (constant) record: just above the 95th percentile.
  GateState flat;
  flat.tau1 = 1.0;
  for (int i = 0; i < 40; ++i) flat.loss_record.push_back(0.25);
  RefreshResult f = RefreshThreshold(flat, rng);
  CHECK(f.status == RefreshStatus::kDegenerateFallback);
  CHECK(f.warning());
  CHECK(f.gate.tau1 > std::log(0.25));
  CHECK(f.gate.tau1 == std::nextafter(std::log(0.25), kInf));
  CHECK(f.gate.tau1 > std::log(Percentile95(flat.loss_record)));

  GateState empty;
  empty.tau1 = -1.25;
  RefreshResult e = RefreshThreshold(empty, rng);
  CHECK(e.status == RefreshStatus::kEmptyRecord);
  CHECK(e.gate.tau1 == -1.25);
  CHECK(!e.warning());

  GateState few;
  few.tau1 = 0.75;
  few.loss_record = {0.1, 0.2, 3.0};
  RefreshResult fr = RefreshThreshold(few, rng);
  CHECK(fr.status == RefreshStatus::kTooFewSamples);
  CHECK(fr.warning());
  CHECK(fr.gate.tau1 == 0.75);
  CHECK(fr.gate.loss_record.empty());

  std::vector<double> pts{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21};
  CHECK(Percentile95(pts) == doctest::Approx(20.0));
}

TEST_CASE("mm_gate") {
  Tensor pa = Probs({0.1, 0.1, 0.1, 0.6, 0.1});
  Tensor pv = Probs({0.05, 0.05, 0.1, 0.7, 0.1});
  Tensor qa = Probs({0.4, 0.3, 0.1, 0.1, 0.1});
  Tensor qv = Probs({0.1, 0.45, 0.15, 0.2, 0.1});
  // Both under their gates: reliable whatever the predictions say.
  MmDecision d = MmGate(0.1, 0.2, std::log(0.5), std::log(0.5), qa, qv, 0.5);
  CHECK(d.kind == MmKind::kReliable);
  CHECK(d.audio == Branch::kReliable);
  // Audio over its gate, both predictions class 3.
  d = MmGate(2.0, 0.2, std::log(0.5), std::log(0.5), pa, pv, 0.5);
  CHECK(d.kind == MmKind::kHardLabel);
  CHECK(d.hard_class == 3);
  // Disagreement, neither confident.
  d = MmGate(2.0, 0.2, std::log(0.5), std::log(0.5), qa, qv, 0.5);
  CHECK(d.kind == MmKind::kSkip);
  // Disagreement, only audio confident.
  Tensor ca = Probs({0.8, 0.05, 0.05, 0.05, 0.05});
  d = MmGate(2.0, 2.0, std::log(0.5), std::log(0.5), ca, qv, 0.5);
  CHECK(d.kind == MmKind::kSoftLabel);
  CHECK(d.audio == Branch::kCorrected);
  CHECK(d.visual == Branch::kSkipped);
  CHECK(CodeOf([&] { MmGate(1, 1, 0, 0, Probs({0.5, 0.6}), pv, 0.5); }) == Errc::kNonDistribution);
}

TEST_CASE("multi-modal step combines both encoders") {
  HandBatch hb;
  // The visual view agrees with the audio view on samples 1 and 3 (class 0),
  // leans to class 2 on the equidistant samples and points at class 2 on
  // sample 7.
  Matrix vclean = hb.clean;
  vclean.row(2) << 0, 1, 1.2;
  vclean.row(6) << 0, 1, 1.2;
  vclean.row(7) << 0, 0, 1;
  Matrix vaug = vclean + 0.01 * Matrix::Ones(8, 3);
  for (bool lc : {true, false}) {
    CAPTURE(lc);
    ad::Tape tape;
    Param a(Tensor::FromMatrix(hb.aug)), v(Tensor::FromMatrix(vaug));
    DlgBatch ab{&hb.clean, tape.Leaf(a), tape.Constant(hb.w)};
    DlgBatch vb{&vclean, tape.Leaf(v), tape.Constant(hb.w)};
    GateState ga, gv;
    ga.tau1 = gv.tau1 = 0.0;
    MmStepResult r = MmDlgLcStep(tape, ab, vb, hb.labels, hb.ids, 1, ga, gv, {}, lc);
    tape.Backward(r.total);
    REQUIRE(r.decisions.size() == 8);
    CHECK(ga.loss_record.size() == 8);
    CHECK(gv.loss_record.size() == 8);
    const MmKind want_lc[8] = {MmKind::kReliable, MmKind::kHardLabel, MmKind::kSoftLabel,
                               MmKind::kHardLabel, MmKind::kReliable, MmKind::kReliable,
                               MmKind::kSoftLabel, MmKind::kSoftLabel};
    for (int i = 0; i < 8; ++i) {
      CAPTURE(i);
      const MmKind want = lc || want_lc[i] == MmKind::kReliable ? want_lc[i] : MmKind::kSkip;
      CHECK(r.decisions[i].kind == want);
    }
    // Oracle total.
    Tensor wt = Tensor::FromMatrix(hb.w);
    std::vector<std::vector<double>> w{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    double total = 0;
    for (int i = 0; i < 8; ++i) {
      const MmDecision &d = r.decisions[i];
      if (d.kind == MmKind::kReliable || d.kind == MmKind::kHardLabel) {
        const int y = d.kind == MmKind::kHardLabel ? d.hard_class : hb.labels[i];
        total += AamLoss(Tensor::FromRow(hb.aug.row(i)), y, wt, {}).loss;
        total += AamLoss(Tensor::FromRow(vaug.row(i)), y, wt, {}).loss;
      }
      if (d.kind == MmKind::kSoftLabel) {
        auto row = [](const Matrix &m, int i) { return std::vector<double>(m.row(i).data(), m.row(i).data() + 3); };
        if (d.audio == Branch::kCorrected)
          total += *LcLoss(Probs(CosineSoftmax(row(hb.clean, i), w, 30)), Probs(CosineSoftmax(row(hb.aug, i), w, 30)), 0.5, 0.1);
        if (d.visual == Branch::kCorrected)
          total += *LcLoss(Probs(CosineSoftmax(row(vclean, i), w, 30)), Probs(CosineSoftmax(row(vaug, i), w, 30)), 0.5, 0.1);
      }
    }
    CHECK(tape.scalar(r.total) == doctest::Approx(total / 8).epsilon(1e-10));
  }
}

TEST_CASE("selection mode names round trip") {
  for (SelectionMode m : {SelectionMode::kNone, SelectionMode::kFixed, SelectionMode::kDlg, SelectionMode::kDlgLc})
    CHECK(ParseSelectionMode(SelectionModeName(m)) == m);
  CHECK(CodeOf([] { ParseSelectionMode("lg"); }) == Errc::kInvalidConfig);
}
