// tests/unit/cluster-test.cc

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
#include <map>
#include <set>

#include "doctest.h"
#include "dlglc/cluster/kmeans.h"
#include "dlglc/cluster/pseudo-labels.h"
#include "dlglc/eval/metrics.h"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/vector-ops.h"
#include "kmeans-oracle.h"

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

void CheckLloydInvariants(std::span<const Tensor> pts, const KmeansResult &r, int k) {
  for (std::size_t i = 1; i < r.inertia_trace.size(); ++i)
    CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] * (1 + 1e-12));
  std::vector<int> sizes(k, 0);
  for (int a : r.assignments) ++sizes[a];
  for (int s : sizes) CHECK(s > 0);
  // One more assignment pass against the returned centroids changes nothing.
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int best = 0;
    double best_d = INFINITY;
    for (int j = 0; j < k; ++j) {
      double d = (pts[i].AsRow() - r.centroids[j].AsRow()).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    CHECK(best == r.assignments[i]);
  }
  CHECK(std::abs(PartitionInertia(pts, r.assignments, k) - r.inertia) < 1e-9);
}

}  // namespace

TEST_CASE("kmeans separates two blobs") {
  Rng rng(3);
  std::vector<Tensor> pts;
  std::vector<int> blob;
  for (int i = 0; i < 40; ++i) {
    double cx = i < 20 ? -10.0 : 10.0;
    pts.push_back(Tensor::Vector({cx + rng.Normal(), rng.Normal()}));
    blob.push_back(i < 20);
  }
  KmeansResult r = Kmeans(pts, 2, rng);
  for (int i = 0; i < 40; ++i)
    CHECK((r.assignments[i] == r.assignments[0]) == (blob[i] == blob[0]));
  CheckLloydInvariants(pts, r, 2);
}

TEST_CASE("kmeans with k = 1 is the global mean") {
  Rng rng(8);
  std::vector<Tensor> pts;
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(3);
  for (int i = 0; i < 25; ++i) {
    pts.push_back(Tensor::Vector({rng.Normal(), rng.Normal(2.0, 3.0), rng.Normal()}));
    mean += pts.back().AsRow();
  }
  mean /= 25.0;
  double ss = 0;
  for (const Tensor &p : pts) ss += (p.AsRow() - mean).squaredNorm();
  KmeansResult r = Kmeans(pts, 1, rng);
  CHECK((r.centroids[0].AsRow() - mean).norm() < 1e-12);
  CHECK(r.inertia == doctest::Approx(ss).epsilon(1e-12));
}

TEST_CASE("kmeans matches exhaustive 2-partition search on 8 points") {
  Rng rng(2718);
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<Tensor> pts = oracle::RandomPoints(rng, 8);
    KmeansResult r = Kmeans(pts, 2, rng, KmeansOptions{100, 40});
    CHECK(r.inertia == doctest::Approx(oracle::BestTwoPartition(pts)).epsilon(1e-10));
    CheckLloydInvariants(pts, r, 2);
  }
}

TEST_CASE("kmeans invariants on random data and error paths") {
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    std::vector<Tensor> pts;
    for (int i = 0; i < 120; ++i)
      pts.push_back(Tensor::Vector({rng.Normal(), rng.Normal(), rng.Normal()}));
    int k = 2 + static_cast<int>(rng.Index(10));
    KmeansResult r = Kmeans(pts, k, rng);
    CheckLloydInvariants(pts, r, k);
  }
  std::vector<Tensor> dup = {Tensor::Vector({1, 1}), Tensor::Vector({1, 1}),
                             Tensor::Vector({2, 2}), Tensor::Vector({3, 3})};
  CHECK(CodeOf([&] { Kmeans(dup, 4, rng); }) == Errc::kTooFewDistinctPoints);
  CHECK(CodeOf([&] { Kmeans(dup, 2, rng, KmeansOptions{100, 3, -1}); }) == Errc::kInvalidConfig);
  for (int cands : {1, 2, 7}) {
    std::vector<Tensor> blobs;
    for (int i = 0; i < 90; ++i)
      blobs.push_back(Tensor::Vector({10.0 * (i % 9) + rng.Normal(), rng.Normal()}));
    KmeansResult r = Kmeans(blobs, 9, rng, KmeansOptions{100, 2, cands});
    CheckLloydInvariants(blobs, r, 9);
  }
  KmeansResult ok = Kmeans(dup, 3, rng);
  CheckLloydInvariants(dup, ok, 3);

  Rng a(12), b(12);
  std::vector<Tensor> pts = oracle::RandomPoints(a, 30);
  b = Rng(99);
  Rng c(99);
  CHECK(Kmeans(pts, 4, b).assignments == Kmeans(pts, 4, c).assignments);
}

TEST_CASE("joint_embed") {
  Tensor ea = L2Normalize(Tensor::Vector({1, 1}));
  Tensor ev = L2Normalize(Tensor::Vector({1, 2, 2}));
  Tensor j = JointEmbed(ea, ev);
  CHECK(j.size() == 5);
  CHECK(Norm(j) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  Tensor scaled = ev;
  for (double &v : scaled.values()) v *= 10.0;
  Tensor j2 = JointEmbed(ea, scaled);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(j[i] - j2[i]) < 1e-15);
  CHECK(CodeOf([&] { JointEmbed(Tensor::Vector({0, 0}), ev); }) == Errc::kZeroVector);
}

TEST_CASE("assign_pseudo_labels on a noiseless world with a perfect encoder") {
  WorldConfig c;
  c.channel_noise_std = 0;
  c.num_identities = 8;
  c.utterances_per_identity = 10;
  World w = GenerateWorld(c);
  Embedder id_audio = [](const Utterance &u) { return u.audio_base; };
  Embedder id_visual = [](const Utterance &u) { return u.visual_base; };
  Rng rng(4), rng2(4);
  PseudoLabelStore s = AssignPseudoLabels(w.View(), LabelModality::kAudio, id_audio, {}, 8, 0, rng);
  CHECK(Purity(s.labels, w.truth->identity_of) == 1.0);
  ValidateStore(s, w.num_utterances());
  PseudoLabelStore again = AssignPseudoLabels(w.View(), LabelModality::kAudio, id_audio, {}, 8, 0, rng2);
  CHECK(again.labels == s.labels);

  PseudoLabelStore joint = AssignPseudoLabels(w.View(), LabelModality::kJoint, id_audio, id_visual, 8, 2, rng);
  CHECK(joint.modality == LabelModality::kJoint);
  CHECK(joint.iteration == 2);
  CHECK(Purity(joint.labels, w.truth->identity_of) == 1.0);

  CHECK(CodeOf([&] {
          AssignPseudoLabels(w.View(), LabelModality::kJoint, id_audio, {}, 8, 0, rng);
        }) == Errc::kMissingInput);

  PseudoLabelStore loaded = StoreFromJson(StoreToJson(joint));
  CHECK(loaded.labels == joint.labels);
  CHECK(loaded.num_clusters == joint.num_clusters);
  CHECK(loaded.modality == joint.modality);
  CHECK(loaded.iteration == joint.iteration);
}

TEST_CASE("joint clustering of raw views beats either modality alone") {
  // Independent per-modality noise makes the concatenation more informative.
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    WorldConfig c;
    c.seed = seed;
    World w = GenerateWorld(c);
    Embedder a = [](const Utterance &u) { return u.audio_base; };
    Embedder v = [](const Utterance &u) { return u.visual_base; };
    Rng r1(seed), r2(seed), r3(seed);
    double nmi_a = Nmi(AssignPseudoLabels(w.View(), LabelModality::kAudio, a, v, 30, 0, r1).labels,
                       w.truth->identity_of);
    double nmi_v = Nmi(AssignPseudoLabels(w.View(), LabelModality::kVisual, a, v, 30, 0, r2).labels,
                       w.truth->identity_of);
    double nmi_j = Nmi(AssignPseudoLabels(w.View(), LabelModality::kJoint, a, v, 30, 0, r3).labels,
                       w.truth->identity_of);
    MESSAGE("seed " << seed << " nmi audio " << nmi_a << " visual " << nmi_v << " joint " << nmi_j);
    wins += nmi_j >= std::max(nmi_a, nmi_v);
  }
  CHECK(wins >= 4);
}
