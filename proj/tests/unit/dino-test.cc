// tests/unit/dino-test.cc

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
#include <filesystem>
#include <set>

#include "doctest.h"
#include "dlglc/dino/checkpoint.h"
#include "dlglc/dino/dino-train.h"
#include "dlglc/numkit/error.h"
#include "dlglc/numkit/grad-check.h"

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

Tensor RandomVector(Rng &rng, std::size_t n, double sd = 1.0) {
  Tensor t({n});
  for (double &v : t.values()) v = rng.Normal(0.0, sd);
  return t;
}

// Probability vector written out with explicit exponentials.
std::vector<double> NaiveSoftmax(const Tensor &logits, double temp) {
  double mx = -INFINITY;
  for (double v : logits.values()) mx = std::max(mx, v / temp);
  std::vector<double> p;
  double z = 0;
  for (double v : logits.values()) {
    p.push_back(std::exp(v / temp - mx));
    z += p.back();
  }
  for (double &v : p) v /= z;
  return p;
}

double NaiveCe(std::span<const Tensor> teacher, std::span<const Tensor> student, double temp,
               bool self_pairs) {
  double total = 0;
  for (std::size_t t = 0; t < teacher.size(); ++t)
    for (std::size_t v = 0; v < student.size(); ++v) {
      if (t == v && !self_pairs) continue;
      std::vector<double> q = NaiveSoftmax(student[v], temp);
      for (std::size_t k = 0; k < q.size(); ++k) total -= teacher[t][k] * std::log(q[k]);
    }
  return total;
}

double NaiveCosine(const Tensor &a, const Tensor &b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

double NaiveConsistency(std::span<const Tensor> e) {
  double total = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) total += 1.0 - NaiveCosine(e[i], e[j]);
  return total;
}

EncoderConfig ToyConfig(int input_dim) {
  EncoderConfig c;
  c.input_dim = input_dim;
  c.hidden_dims = {6};
  c.embed_dim = 5;
  c.head_hidden_dim = 7;
  c.head_bottleneck_dim = 4;
  c.head_output_dim = 9;
  return c;
}

WorldConfig ToyWorld(int identities = 2) {
  WorldConfig w;
  w.num_identities = identities;
  w.utterances_per_identity = 6;
  w.obs_dim_audio = 4;
  w.obs_dim_visual = 3;
  return w;
}

}  // namespace

TEST_CASE("repeat_probability") {
  const int sizes[] = {16, 32, 64, 128, 256};
  const double table[] = {0.020, 0.080, 0.286, 0.745, 0.996};
  for (int i = 0; i < 5; ++i) CHECK(std::abs(RepeatProbability(5994, sizes[i]) - table[i]) <= 5e-4);
  CHECK(RepeatProbability(7, 1) == 0.0);
  CHECK(RepeatProbability(1, 1) == 0.0);
  // Two draws from S collide with probability 1/S.
  CHECK(RepeatProbability(10, 2) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(RepeatProbability(3, 3) == doctest::Approx(1.0 - 6.0 / 27.0).epsilon(1e-14));
  CHECK(CodeOf([] { RepeatProbability(5, 6); }) == Errc::kBatchLargerThanPopulation);
}

TEST_CASE("forward") {
  EncoderConfig cfg = ToyConfig(4);
  Rng rng(1);
  Params p = InitParams(cfg, true, rng);
  CHECK(p.size() == NumParamTensors(cfg, true));
  CHECK(p.back().value.size() == 9);
  for (double g : p.back().value.values()) CHECK(g == 1.0);

  // Zero input with zero biases: the embedding is exactly zero and the head
  // sees only its biases. Give the last head layer a bias so the hand
  // computation has something to normalize.
  Tensor zero({4});
  Params q = p;
  const int hb = 2 * NumEncoderLayers(cfg) + 5;  // bias of the bottleneck layer
  q[hb].value = Tensor::Vector({3, 0, 4, 0});
  ForwardResult r = Forward(q, zero, cfg);
  for (double v : r.embedding.values()) CHECK(v == 0.0);
  const Tensor &vdir = q[hb + 1].value;
  for (std::size_t k = 0; k < 9; ++k) {
    double norm = 0;
    for (std::size_t j = 0; j < 4; ++j) norm += vdir.at(k, j) * vdir.at(k, j);
    double expected = (0.6 * vdir.at(k, 0) + 0.8 * vdir.at(k, 2)) / std::sqrt(norm);
    CHECK(r.head_logits[k] == doctest::Approx(expected).epsilon(1e-13));
  }

  Tensor x = RandomVector(rng, 4);
  ForwardResult a = Forward(p, x, cfg), b = Forward(p, x, cfg);
  CHECK(a.embedding == b.embedding);
  CHECK(a.head_logits == b.head_logits);
  for (double v : a.head_logits.values()) CHECK(std::abs(v) <= 1.0 + 1e-12);
  CHECK(CodeOf([&] { Forward(p, Tensor({3}), cfg); }) == Errc::kShapeMismatch);

  // Batched paths agree with the single-view path.
  Matrix rows(2, 4);
  rows.row(0) = x.AsRow();
  rows.row(1) = zero.AsRow() + RowVector::Ones(4);
  Matrix emb = EmbedRows(p, rows, cfg);
  Matrix logits = HeadLogitsRows(p, rows, cfg);
  CHECK((emb.row(0) - a.embedding.AsRow()).norm() < 1e-14);
  CHECK((logits.row(0) - a.head_logits.AsRow()).norm() < 1e-14);

  // Gradient of the head output through every parameter.
  for (int trial = 0; trial < 5; ++trial) {
    Params point = InitParams(cfg, true, rng);
    for (Param &t : point)
      for (double &v : t.value.values()) v += rng.Normal(0.0, 0.1);
    Matrix views(3, 4);
    for (int i = 0; i < 3; ++i) views.row(i) = RandomVector(rng, 4).AsRow();
    Matrix mix(3, 9);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = rng.Normal();
    auto loss = [&](ad::Tape &tape, std::span<const ad::Var> bound) {
      TapeOutputs o = ForwardOnTape(tape, bound, tape.Constant(views), cfg, true);
      return tape.Sum(tape.Mul(o.logits, tape.Constant(mix)));
    };
    CHECK(GradCheck(loss, point, 1e-5) < 1e-4);
  }
}

TEST_CASE("teacher_probs") {
  Rng rng(2);
  Tensor logits = RandomVector(rng, 10);
  Tensor uniform = TeacherProbs(logits, logits, 0.04);
  for (double v : uniform.values()) CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
  Tensor plain = TeacherProbs(logits, Tensor({10}), 0.04);
  CHECK(plain == SoftmaxTemp(logits, 0.04));
  for (int t = 0; t < 20; ++t) {
    Tensor l = RandomVector(rng, 10), c = RandomVector(rng, 10, 0.3);
    Tensor p = TeacherProbs(l, c, 0.04);
    Tensor diff({10});
    for (int k = 0; k < 10; ++k) diff[k] = l[k] - c[k];
    std::vector<double> expected = NaiveSoftmax(diff, 0.04);
    for (int k = 0; k < 10; ++k) CHECK(std::abs(p[k] - expected[k]) < 1e-12);
  }
  CHECK(CodeOf([&] { TeacherProbs(logits, Tensor({3}), 0.04); }) == Errc::kShapeMismatch);
}

TEST_CASE("update_center") {
  Rng rng(3);
  Tensor c0 = RandomVector(rng, 6);
  std::vector<Tensor> batch = {RandomVector(rng, 6), RandomVector(rng, 6), RandomVector(rng, 6)};
  Tensor mean({6});
  for (int k = 0; k < 6; ++k) mean[k] = (batch[0][k] + batch[1][k] + batch[2][k]) / 3.0;
  Tensor m0 = UpdateCenter(c0, batch, 0.0);
  for (int k = 0; k < 6; ++k) CHECK(m0[k] == doctest::Approx(mean[k]).epsilon(1e-14));
  CHECK(UpdateCenter(c0, batch, 1.0) == c0);
  // c_n = mean + m^n (c_0 - mean).
  Tensor c = c0;
  for (int n = 1; n <= 30; ++n) {
    c = UpdateCenter(c, batch, 0.9);
    for (int k = 0; k < 6; ++k)
      CHECK(std::abs(c[k] - (mean[k] + std::pow(0.9, n) * (c0[k] - mean[k]))) < 1e-12);
  }
  CHECK(CodeOf([&] { UpdateCenter(c0, {}, 0.9); }) == Errc::kEmptyBatch);
}

TEST_CASE("dino_ce_loss") {
  const int k = 16;
  std::vector<Tensor> uniform_t(2, Tensor::Vector(std::vector<double>(k, 1.0 / k)));
  std::vector<Tensor> flat_s(6, Tensor({k}));
  CHECK(DinoCeLoss(uniform_t, flat_s, 0.1) == doctest::Approx(10 * std::log(k)).epsilon(1e-14));
  CHECK(DinoCeLoss(uniform_t, flat_s, 0.1, true) == doctest::Approx(12 * std::log(k)).epsilon(1e-14));

  std::vector<double> onehot(k, 0.0);
  onehot[3] = 1.0;
  std::vector<Tensor> sharp_t(2, Tensor::Vector(onehot));
  std::vector<double> favour(k, 0.0);
  favour[3] = 5.0;
  std::vector<Tensor> sharp_s(6, Tensor::Vector(favour));
  CHECK(DinoCeLoss(sharp_t, sharp_s, 0.1) / 10.0 < 0.01);

  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<Tensor> teacher, student;
    for (int i = 0; i < 2; ++i) teacher.push_back(SoftmaxTemp(RandomVector(rng, 3), 0.5));
    for (int i = 0; i < 6; ++i) student.push_back(RandomVector(rng, 3));
    double got = DinoCeLoss(teacher, student, 0.1);
    CHECK(got > 0.0);
    CHECK(std::abs(got - NaiveCe(teacher, student, 0.1, false)) < 1e-10);
    CHECK(std::abs(DinoCeLoss(teacher, student, 0.1, true) - NaiveCe(teacher, student, 0.1, true)) <
          1e-10);
  }
  std::vector<Tensor> bad_t = {Tensor::Vector({0.5, 0.6}), Tensor::Vector({0.5, 0.5})};
  std::vector<Tensor> s2(6, Tensor({2}));
  CHECK(CodeOf([&] { DinoCeLoss(bad_t, s2, 0.1); }) == Errc::kNonDistribution);
  CHECK(CodeOf([&] { DinoCeLoss(uniform_t, std::span(flat_s).first(5), 0.1); }) ==
        Errc::kShapeMismatch);
}

TEST_CASE("consistency_loss") {
  std::vector<Tensor> same(6, Tensor::Vector({1, 2, 3}));
  CHECK(ConsistencyLoss(same) == doctest::Approx(0.0).epsilon(1e-15));

  std::vector<Tensor> ortho;
  for (int i = 0; i < 6; ++i) {
    Tensor e({6});
    e[i] = 1.0 + i;
    ortho.push_back(e);
  }
  CHECK(ConsistencyLoss(ortho) == doctest::Approx(10.0).epsilon(1e-15));

  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<Tensor> e;
    for (int i = 0; i < 6; ++i) e.push_back(RandomVector(rng, 4));
    double c = ConsistencyLoss(e);
    CHECK(std::abs(c - NaiveConsistency(e)) < 1e-12);
    CHECK(c >= 0.0);
    CHECK(c <= 20.0);
  }
  std::vector<Tensor> opposite = {Tensor::Vector({1, 0}), Tensor::Vector({-1, 0}),
                                  Tensor::Vector({-1, 0}), Tensor::Vector({-1, 0}),
                                  Tensor::Vector({-1, 0}), Tensor::Vector({-1, 0})};
  CHECK(ConsistencyLoss(opposite) == doctest::Approx(2.0 * 5 + 2.0).epsilon(1e-15));
  std::vector<Tensor> with_zero = same;
  with_zero[4] = Tensor({3});
  CHECK(CodeOf([&] { ConsistencyLoss(with_zero); }) == Errc::kZeroVector);
}

TEST_CASE("total_dino_loss") {
  CHECK(TotalDinoLoss(1.5, 7.0, 0.0) == 1.5);
  CHECK(TotalDinoLoss(0.0, 2.5, 1.0) == 2.5);
  CHECK(DinoHyper{}.consistency_weight == 1.0);
  CHECK(DinoHyper{}.teacher_temp == 0.04);
  CHECK(DinoHyper{}.student_temp == 0.1);
  CHECK(CodeOf([] { TotalDinoLoss(INFINITY, 0.0, 1.0); }) == Errc::kNonFiniteLoss);
  CHECK(CodeOf([] { TotalDinoLoss(1.0, NAN, 1.0); }) == Errc::kNonFiniteLoss);
}

TEST_CASE("ema_update") {
  Rng rng(6);
  EncoderConfig cfg = ToyConfig(4);
  ModelState s = InitModelState(cfg, rng);
  Rng other(7);
  s.student = InitParams(cfg, true, other);
  const Params teacher0 = s.teacher, student0 = s.student;
  EmaUpdate(s, 1.0);
  for (std::size_t i = 0; i < s.teacher.size(); ++i) CHECK(s.teacher[i].value == teacher0[i].value);
  EmaUpdate(s, 0.0);
  for (std::size_t i = 0; i < s.teacher.size(); ++i) {
    CHECK(s.teacher[i].value == student0[i].value);
    CHECK(s.student[i].value == student0[i].value);
  }

  ModelState scalar;
  scalar.teacher.emplace_back(Tensor::Vector({2.0}));
  scalar.student.emplace_back(Tensor::Vector({4.0}));
  EmaUpdate(scalar, 0.5);
  CHECK(scalar.teacher[0].value[0] == 3.0);
  CHECK(scalar.student[0].value[0] == 4.0);

  // The schedule ends at lambda = 1, a fixed point for the teacher.
  DinoHyper h;
  CHECK(Stage1EmaLambda(h, 99, 100) == 1.0);
  CHECK(Stage1EmaLambda(h, 0, 100) == 0.996);
  ModelState fixed = InitModelState(cfg, rng);
  fixed.student = InitParams(cfg, true, other);
  Params before = fixed.teacher;
  EmaUpdate(fixed, Stage1EmaLambda(h, 99, 100));
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(fixed.teacher[i].value == before[i].value);
}

TEST_CASE("learning-rate schedule warms up then decays") {
  DinoHyper h;
  h.lr_schedule = {0.1, 0.001, 0};
  h.warmup_fraction = 0.13;
  const std::int64_t total = 100;
  CHECK(Stage1LearningRate(h, 0, total) == doctest::Approx(0.1 / 13));
  CHECK(Stage1LearningRate(h, 12, total) == doctest::Approx(0.1));
  CHECK(Stage1LearningRate(h, 13, total) == doctest::Approx(0.1));
  CHECK(Stage1LearningRate(h, 99, total) == doctest::Approx(0.001));
  for (std::int64_t s = 14; s < total; ++s)
    CHECK(Stage1LearningRate(h, s, total) <= Stage1LearningRate(h, s - 1, total));
}

TEST_CASE("batched dino loss equals the per-crop-set definitions") {
  WorldConfig wc = ToyWorld(3);
  World w = GenerateWorld(wc);
  EncoderConfig cfg = ToyConfig(wc.obs_dim_audio);
  Rng rng(8);
  ModelState state = InitModelState(cfg, rng);
  Rng other(9);
  state.student = InitParams(cfg, true, other);
  state.center = RandomVector(rng, 9, 0.1);
  for (bool self_pairs : {false, true}) {
    DinoHyper h;
    h.include_self_pairs = self_pairs;
    h.consistency_weight = 0.7;
    std::vector<CropSet> crops;
    for (int i = 0; i < 5; ++i)
      crops.push_back(SampleCrops(w.View().utterance(i), Modality::kAudio, w.View().noise(), rng));

    double ce = 0, cons = 0;
    for (const CropSet &c : crops) {
      std::vector<Tensor> tp, sl, se;
      for (int t = 0; t < 2; ++t)
        tp.push_back(TeacherProbs(Forward(state.teacher, c.view(t), cfg).head_logits, state.center,
                                  h.teacher_temp));
      for (int v = 0; v < 6; ++v) {
        ForwardResult f = Forward(state.student, c.view(v), cfg);
        sl.push_back(f.head_logits);
        se.push_back(f.embedding);
      }
      ce += DinoCeLoss(tp, sl, h.student_temp, self_pairs);
      cons += ConsistencyLoss(se);
    }
    ad::Tape tape;
    auto bound = BindParams(tape, state.student);
    DinoBatch b = BuildDinoBatchLoss(tape, bound, state, crops, h);
    CHECK(tape.scalar(b.loss.ce) == doctest::Approx(ce / 5).epsilon(1e-12));
    CHECK(tape.scalar(b.loss.cons) == doctest::Approx(cons / 5).epsilon(1e-12));
    CHECK(tape.scalar(b.loss.total) ==
          doctest::Approx(TotalDinoLoss(ce, cons, 0.7) / 5).epsilon(1e-12));

    // Gradients reach the student only.
    for (Param &p : state.student) p.ZeroGrad();
    for (Param &p : state.teacher) p.ZeroGrad();
    tape.Backward(b.loss.total);
    double student_grad = 0, teacher_grad = 0;
    for (const Param &p : state.student) student_grad += p.grad.AsRow().norm();
    for (const Param &p : state.teacher) teacher_grad += p.grad.AsRow().norm();
    CHECK(student_grad > 0.0);
    CHECK(teacher_grad == 0.0);
  }
}

TEST_CASE("end-to-end dino gradient on a two-identity world") {
  WorldConfig wc = ToyWorld(2);
  World w = GenerateWorld(wc);
  EncoderConfig cfg = ToyConfig(wc.obs_dim_audio);
  Rng rng(10);
  int checked = 0;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ModelState state = InitModelState(cfg, rng);
    state.student = InitParams(cfg, true, rng);
    // Nonzero biases keep the toy network off its all-dead-ReLU corner, where
    // the embedding is exactly zero.
    for (Param &p : state.student)
      for (double &v : p.value.values()) v += rng.Normal(0.0, 0.3);
    state.center = RandomVector(rng, 9, 0.05);
    std::vector<CropSet> crops;
    for (int i = 0; i < 2; ++i)
      crops.push_back(SampleCrops(w.View().utterance(rng.Index(w.num_utterances())),
                                  Modality::kAudio, w.View().noise(), rng));
    DinoHyper h;
    auto loss = [&](ad::Tape &tape, std::span<const ad::Var> bound) {
      return BuildDinoBatchLoss(tape, bound, state, crops, h).loss.total;
    };
    double err = GradCheck(loss, state.student, 1e-6);
    worst = std::max(worst, err);
    ++checked;
  }
  MESSAGE("worst relative error " << worst);
  CHECK(checked == 100);
  CHECK(worst < 1e-4);
}

TEST_CASE("train_stage1 determinism, zero learning rate, cluster-aware sampling") {
  WorldConfig wc = ToyWorld(4);
  wc.utterances_per_identity = 10;
  World w = GenerateWorld(wc);
  EncoderConfig cfg = ToyConfig(wc.obs_dim_audio);
  DinoHyper h;
  h.epochs = 1;
  h.batch_size = 8;
  Stage1Options one;
  one.max_batches_per_epoch = 1;
  Rng r1(11), r2(11);
  Stage1Result a = TrainStage1(w.View(), Modality::kAudio, cfg, h, r1, one);
  Stage1Result b = TrainStage1(w.View(), Modality::kAudio, cfg, h, r2, one);
  REQUIRE(a.epochs.size() == 1);
  CHECK(a.epochs[0].loss_total == b.epochs[0].loss_total);
  CHECK(a.state.step == 1);
  for (std::size_t i = 0; i < a.state.student.size(); ++i)
    CHECK(a.state.student[i].value == b.state.student[i].value);

  DinoHyper frozen = h;
  frozen.epochs = 3;
  frozen.lr_schedule = {0.0, 0.0, 0};
  Rng r3(12), r4(12);
  Stage1Result z = TrainStage1(w.View(), Modality::kAudio, cfg, frozen, r3);
  Rng init = r4.Split(11);
  ModelState fresh = InitModelState(cfg, init);
  for (std::size_t i = 0; i < fresh.student.size(); ++i) {
    CHECK(z.state.student[i].value == fresh.student[i].value);
    CHECK(z.state.teacher[i].value == fresh.teacher[i].value);
  }

  DinoHyper ca = h;
  ca.epochs = 4;
  ca.ca_warmup_epochs = 1;
  ca.ca_cluster_every = 2;
  ca.ca_num_clusters = 4;
  int ca_batches = 0, plain_batches = 0;
  Stage1Options watch;
  watch.on_batch = [&](std::span<const CropSet> crops, std::span<const int> cluster_of) {
    if (cluster_of.empty()) {
      ++plain_batches;
      for (const CropSet &c : crops)
        for (int id : c.source_utterance_ids) CHECK(id == c.source_utterance_ids[0]);
      return;
    }
    ++ca_batches;
    for (const CropSet &c : crops)
      for (int id : c.source_utterance_ids) CHECK(cluster_of[id] == cluster_of[c.source_utterance_ids[0]]);
  };
  Rng r5(13);
  Stage1Result c = TrainStage1(w.View(), Modality::kAudio, cfg, ca, r5, watch);
  CHECK(plain_batches == 5);
  CHECK(ca_batches == 15);
  CHECK(!c.epochs[0].cluster_aware);
  CHECK(c.epochs[1].cluster_aware);
  CHECK(c.epochs[3].ca_clusters == 4);
}

TEST_CASE("train_stage1 steps use only the current batch gradient") {
  WorldConfig wc = ToyWorld(4);
  wc.utterances_per_identity = 6;
  World w = GenerateWorld(wc);
  EncoderConfig cfg = ToyConfig(wc.obs_dim_audio);
  DinoHyper h;
  h.epochs = 1;
  h.batch_size = 6;
  h.lr_schedule = {0.05, 0.01, 0};
  h.warmup_fraction = 0.0;
  std::vector<std::vector<CropSet>> seen;
  Stage1Options opts;
  opts.max_batches_per_epoch = 3;
  opts.on_batch = [&](std::span<const CropSet> crops, std::span<const int>) {
    seen.emplace_back(crops.begin(), crops.end());
  };
  Rng r(21), rr(21);
  Stage1Result got = TrainStage1(w.View(), Modality::kAudio, cfg, h, r, opts);
  REQUIRE(seen.size() == 3);

  // Replay with freshly built parameters every step, plain momentum SGD.
  Rng init = rr.Split(11);
  ModelState s = InitModelState(cfg, init);
  std::vector<Matrix> vel;
  for (std::size_t step = 0; step < seen.size(); ++step) {
    Params fresh;
    for (const Param &p : s.student) fresh.emplace_back(p.value);
    ad::Tape tape;
    auto bound = BindParams(tape, fresh);
    DinoBatch batch = BuildDinoBatchLoss(tape, bound, s, seen[step], h);
    tape.Backward(batch.loss.total);
    const double lr = Stage1LearningRate(h, static_cast<std::int64_t>(step), 3);
    for (std::size_t i = 0; i + 1 < fresh.size(); ++i) {
      Matrix g = fresh[i].grad.AsMatrix();
      Matrix wv = s.student[i].value.AsMatrix();
      if (vel.size() <= i) vel.push_back(Matrix::Zero(g.rows(), g.cols()));
      vel[i] = 0.9 * vel[i] + g + 5e-5 * wv;
      s.student[i].value.AsMatrix() = wv - lr * vel[i];
    }
    EmaUpdate(s, Stage1EmaLambda(h, static_cast<std::int64_t>(step), 3));
    s.center = Tensor::FromRow(0.9 * s.center.AsRow() +
                               0.1 * RowVector(batch.teacher_logits.colwise().mean()));
  }
  for (std::size_t i = 0; i < s.student.size(); ++i) {
    const auto a = got.state.student[i].value.values();
    const auto b = s.student[i].value.values();
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
  }
}

TEST_CASE("stage-1 checkpoint round trip is bit-exact") {
  EncoderConfig cfg = ToyConfig(4);
  Rng rng(14);
  ModelState s = InitModelState(cfg, rng);
  s.student = InitParams(cfg, true, rng);
  s.center = RandomVector(rng, 9);
  s.center[0] = 1.0 / 3.0;
  s.center[1] = -2.2250738585072014e-308;
  s.step = 1234;
  DinoHyper h;
  h.epochs = 7;
  auto path = std::filesystem::temp_directory_path() / "dlglc-stage1-ckpt-test.json";
  SaveStage1Checkpoint(path, s, h);
  Stage1Checkpoint c = LoadStage1Checkpoint(path);
  std::filesystem::remove(path);
  CHECK(c.state.step == 1234);
  CHECK(c.hyper.epochs == 7);
  CHECK(c.state.cfg.head_output_dim == 9);
  CHECK(c.state.center == s.center);
  for (std::size_t i = 0; i < s.student.size(); ++i) {
    CHECK(c.state.student[i].value == s.student[i].value);
    CHECK(c.state.teacher[i].value == s.teacher[i].value);
  }
  CHECK(CodeOf([] { LoadStage1Checkpoint("/nonexistent/ckpt.json"); }) == Errc::kMissingInput);
  nlohmann::json bad = Stage1CheckpointToJson(s, h);
  bad["version"] = 99;
  CHECK(CodeOf([&] { Stage1CheckpointFromJson(bad); }) == Errc::kFormat);
}
