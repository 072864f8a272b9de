// src/cluster/kmeans.cc

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

#include "dlglc/cluster/kmeans.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dlglc/numkit/error.h"

namespace dlglc {

namespace {

Matrix Stack(std::span<const Tensor> points) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  const Eigen::Index d = static_cast<Eigen::Index>(points[0].size());
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(points[i].size()) != d)
      Fail(Errc::kShapeMismatch, "k-means points differ in dimension");
    x.row(i) = points[i].AsRow();
  }
  return x;
}

std::size_t CountDistinct(const Matrix &x) {
  std::set<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    rows.emplace(x.row(i).data(), x.row(i).data() + x.cols());
  return rows.size();
}

Eigen::Index DrawByWeight(const Eigen::VectorXd &d2, Rng &rng) {
  const double r = rng.Uniform() * d2.sum();
  Eigen::Index pick = -1;
  double acc = 0;
  for (Eigen::Index i = 0; i < d2.size(); ++i) {
    if (d2(i) <= 0.0) continue;
    acc += d2(i);
    pick = i;
    if (acc > r) break;
  }
  return pick;
}

// Greedy k-means++: several d^2-weighted candidates per step, keep the one
// that lowers the potential most.
Matrix SeedPlusPlus(const Matrix &x, int k, Rng &rng, int candidates) {
  const Eigen::Index n = x.rows();
  Matrix c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.Index(static_cast<std::size_t>(n))));
  Eigen::VectorXd d2 = (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    Eigen::Index best = -1;
    Eigen::VectorXd best_d2;
    double best_pot = std::numeric_limits<double>::infinity();
    for (int t = 0; t < candidates; ++t) {
      const Eigen::Index pick = DrawByWeight(d2, rng);
      Eigen::VectorXd nd = d2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
      const double pot = nd.sum();
      if (pot < best_pot) {
        best_pot = pot;
        best = pick;
        best_d2 = std::move(nd);
      }
    }
    c.row(j) = x.row(best);
    d2 = std::move(best_d2);
  }
  return c;
}

void Assign(const Matrix &x, const Matrix &c, std::vector<int> *a) {
  a->resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      double d = (x.row(i) - c.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    (*a)[static_cast<std::size_t>(i)] = best;
  }
}

void RepairEmpty(const Matrix &x, const Matrix &c, int k, std::vector<int> *a) {
  std::vector<int> sizes(k, 0);
  for (int l : *a) ++sizes[l];
  for (int e = 0; e < k; ++e) {
    if (sizes[e] > 0) continue;
    int largest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if ((*a)[i] != largest) continue;
      double d = (x.row(i) - c.row(largest)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    (*a)[far] = e;
    --sizes[largest];
    ++sizes[e];
  }
}

Matrix Means(const Matrix &x, std::span<const int> a, int k) {
  Matrix c = Matrix::Zero(k, x.cols());
  std::vector<double> counts(k, 0.0);
  // Fixed summation order (point index) keeps centroids reproducible.
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    c.row(a[i]) += x.row(i);
    counts[a[i]] += 1.0;
  }
  for (int j = 0; j < k; ++j)
    if (counts[j] > 0) c.row(j) /= counts[j];
  return c;
}

double Inertia(const Matrix &x, const Matrix &c, std::span<const int> a) {
  double total = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) total += (x.row(i) - c.row(a[i])).squaredNorm();
  return total;
}

struct Run {
  std::vector<int> assignments;
  Matrix centroids;
  double inertia = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  int iterations = 0;
};

Run Lloyd(const Matrix &x, int k, Rng &rng, int max_iters, int candidates) {
  Run run;
  Matrix c = SeedPlusPlus(x, k, rng, candidates);
  std::vector<int> prev, a;
  for (int it = 0; it < max_iters; ++it) {
    Assign(x, c, &a);
    RepairEmpty(x, c, k, &a);
    if (a == prev) break;
    c = Means(x, a, k);
    run.trace.push_back(Inertia(x, c, a));
    prev = a;
    run.iterations = it + 1;
  }
  run.assignments = std::move(prev);
  run.centroids = std::move(c);
  run.inertia = run.trace.back();
  return run;
}

}  // namespace

KmeansResult Kmeans(std::span<const Tensor> points, int k, Rng &rng,
                    const KmeansOptions &opts) {
  if (points.empty()) Fail(Errc::kEmptyInput, "k-means needs points");
  if (k < 1) Fail(Errc::kInvalidConfig, "k must be >= 1");
  if (opts.max_iters < 1 || opts.restarts < 1)
    Fail(Errc::kInvalidConfig, "max_iters and restarts must be >= 1");
  if (opts.seed_candidates < 0) Fail(Errc::kInvalidConfig, "seed_candidates must be >= 0");
  const int candidates =
      opts.seed_candidates > 0 ? opts.seed_candidates : 2 + static_cast<int>(std::log(static_cast<double>(k)));
  Matrix x = Stack(points);
  if (CountDistinct(x) < static_cast<std::size_t>(k))
    Fail(Errc::kTooFewDistinctPoints, "k exceeds the number of distinct points");

  Run best;
  for (int r = 0; r < opts.restarts; ++r) {
    Run run = Lloyd(x, k, rng, opts.max_iters, candidates);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  KmeansResult result;
  result.assignments = std::move(best.assignments);
  for (int j = 0; j < k; ++j) result.centroids.push_back(Tensor::FromRow(best.centroids.row(j)));
  result.inertia = best.inertia;
  result.inertia_trace = std::move(best.trace);
  result.iterations = best.iterations;
  return result;
}

double PartitionInertia(std::span<const Tensor> points,
                        std::span<const int> assignments, int k) {
  if (points.size() != assignments.size())
    Fail(Errc::kLengthMismatch, "one assignment per point required");
  Matrix x = Stack(points);
  return Inertia(x, Means(x, assignments, k), assignments);
}

}  // namespace dlglc
