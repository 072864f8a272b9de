// tests/unit/eval-test.cc

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

#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "dlglc/eval/metrics.h"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/rng.h"
#include "metric-oracles.h"

using namespace dlglc;

namespace {

Errc CodeOf(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::kFormat;
}

// Hand-built list: targets {0.9, 0.8, 0.7, 0.4, 0.35, 0.2}, non-targets
// {0.6, 0.5, 0.3, 0.1, 0.05, 0.0}.
ScoredTrials HandList() {
  return ScoredTrials{{0.9, 0.8, 0.7, 0.4, 0.35, 0.2, 0.6, 0.5, 0.3, 0.1, 0.05, 0.0},
                      {true, true, true, true, true, true, false, false, false, false, false, false}};
}

}  // namespace

TEST_CASE("eer on trivial lists") {
  ScoredTrials separated{{0.9, 0.8, 0.1, 0.2}, {true, true, false, false}};
  CHECK(ComputeEer(separated).eer == 0.0);
  CHECK(ComputeMinDcf(separated) == 0.0);

  ScoredTrials inverted{{0.1, 0.2, 0.9, 0.8}, {true, true, false, false}};
  CHECK(ComputeEer(inverted).eer == 1.0);

  CHECK(CodeOf([] { ComputeEer(ScoredTrials{{0.1, 0.2}, {true, true}}); }) ==
        Errc::kDegenerateTrials);
  CHECK(CodeOf([] { ComputeEer(ScoredTrials{{0.1}, {true, false}}); }) ==
        Errc::kDegenerateTrials);
}

TEST_CASE("hand-built 12-trial list") {
  ScoredTrials st = HandList();
  // Rejecting everything at or below 0.35 misses 2/6 targets and accepts 2/6
  // non-targets: an exact crossing.
  EerResult eer = ComputeEer(st);
  CHECK(eer.eer == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(eer.threshold == doctest::Approx(0.375));
  // Normalized cost is miss + 99 * fa; the best is fa = 0 with 3/6 missed.
  CHECK(ComputeMinDcf(st) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(eer.eer - oracle::Eer(st)) < 1e-15);
  CHECK(std::abs(ComputeMinDcf(st) - oracle::MinDcf(st, DcfConfig{})) < 1e-15);
  DcfConfig unnorm;
  unnorm.normalize = false;
  CHECK(ComputeMinDcf(st, unnorm) == doctest::Approx(0.005));
}

TEST_CASE("identical target and non-target distributions give eer near 0.5") {
  Rng rng(77);
  ScoredTrials st;
  for (int i = 0; i < 10000; ++i) {
    st.scores.push_back(rng.Normal());
    st.is_target.push_back(i % 2 == 0);
  }
  CHECK(std::abs(ComputeEer(st).eer - 0.5) < 0.03);
}

TEST_CASE("eer and mindcf match the brute-force sweep; invariances") {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    ScoredTrials st = oracle::RandomTrials(rng, 12 + static_cast<int>(rng.Index(189)));
    double eer = ComputeEer(st).eer;
    double dcf = ComputeMinDcf(st);
    CHECK(std::abs(eer - oracle::Eer(st)) < 1e-12);
    CHECK(std::abs(dcf - oracle::MinDcf(st, DcfConfig{})) < 1e-12);
    CHECK(dcf <= 1.0);
    CHECK(dcf >= 0.0);
    ScoredTrials warped = st;
    for (double &s : warped.scores) s = std::exp(3.0 * s) + s;
    CHECK(std::abs(ComputeEer(warped).eer - eer) < 1e-12);
    CHECK(std::abs(ComputeMinDcf(warped) - dcf) < 1e-12);
  }
}

TEST_CASE("score_trials") {
  std::vector<Tensor> emb = {Tensor::Vector({1, 2, 3}), Tensor::Vector({-1, -2, -3}),
                             Tensor::Vector({0.5, -1, 2})};
  TrialList trials{{{0, 0, true}, {0, 1, false}, {0, 2, false}}};
  ScoredTrials st = ScoreTrials(emb, trials);
  CHECK(st.scores[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st.scores[1] == doctest::Approx(-1.0).epsilon(1e-15));
  double dot = 0.5 - 2 + 6;
  CHECK(st.scores[2] == doctest::Approx(dot / (std::sqrt(14.0) * std::sqrt(5.25))));
  TrialList bad{{{0, 7, true}}};
  CHECK(CodeOf([&] { ScoreTrials(emb, bad); }) == Errc::kUnknownUtterance);
}

TEST_CASE("nmi") {
  std::vector<int> a = {0, 0, 0, 1, 1, 1};
  std::vector<int> b = {0, 0, 1, 1, 2, 2};
  CHECK(Nmi(a, a) == doctest::Approx(1.0));
  std::vector<int> constant(6, 4);
  CHECK(Nmi(constant, b) == 0.0);
  CHECK(Nmi(constant, constant) == 1.0);
  // Contingency table {(0,0):2, (0,1):1, (1,1):1, (1,2):2}: MI = (2/3) ln 2,
  // entropies ln 2 and ln 3.
  double expected = (2.0 / 3.0) * std::log(2.0) / (0.5 * (std::log(2.0) + std::log(3.0)));
  CHECK(Nmi(a, b) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(Nmi(b, a) == doctest::Approx(expected).epsilon(1e-14));
  std::vector<int> relabeled = {7, 7, 3, 3, 9, 9};
  CHECK(Nmi(a, relabeled) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(CodeOf([&] { Nmi(a, std::vector<int>{1, 2}); }) == Errc::kLengthMismatch);

  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> x(40), y(40);
    for (int i = 0; i < 40; ++i) {
      x[i] = static_cast<int>(rng.Index(4));
      y[i] = static_cast<int>(rng.Index(6));
    }
    double v = Nmi(x, y);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(std::abs(v - Nmi(y, x)) < 1e-12);
  }
}

TEST_CASE("purity") {
  std::vector<int> truth = {0, 0, 1, 1, 1, 2, 2, 2};
  std::vector<int> pseudo = {0, 0, 0, 1, 1, 1, 2, 2};
  CHECK(Purity(pseudo, truth) == doctest::Approx(6.0 / 8.0));
  CHECK(Purity(truth, truth) == 1.0);
  std::vector<int> singletons = {0, 1, 2, 3, 4, 5, 6, 7};
  CHECK(Purity(singletons, truth) == 1.0);
  CHECK(CodeOf([&] { Purity(pseudo, std::vector<int>{1}); }) == Errc::kLengthMismatch);

  // Splitting a cluster never lowers purity.
  Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> tr(50), ps(50);
    for (int i = 0; i < 50; ++i) {
      tr[i] = static_cast<int>(rng.Index(5));
      ps[i] = static_cast<int>(rng.Index(4));
    }
    std::vector<int> split = ps;
    for (int i = 0; i < 50; ++i)
      if (split[i] == 0 && rng.Uniform() < 0.5) split[i] = 99;
    CHECK(Purity(split, tr) >= Purity(ps, tr));
  }
}
