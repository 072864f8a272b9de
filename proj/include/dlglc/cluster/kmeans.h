// include/dlglc/cluster/kmeans.h

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

#ifndef DLGLC_CLUSTER_KMEANS_H_
#define DLGLC_CLUSTER_KMEANS_H_

#include <span>
#include <vector>

#include "dlglc/numkit/rng.h"
#include "dlglc/numkit/tensor.h"

namespace dlglc {

struct KmeansOptions {
  int max_iters = 100;
  int restarts = 3;
  // d^2-weighted draws per seeding step; 0 means 2 + floor(ln k), 1 is
  // plain k-means++.
  int seed_candidates = 0;
};

struct KmeansResult {
  std::vector<int> assignments;
  std::vector<Tensor> centroids;
  // Sum of squared distances from each point to its centroid.
  double inertia = 0.0;
  // Inertia after every Lloyd update of the winning restart.
  std::vector<double> inertia_trace;
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding, best of `restarts` by inertia.
// A cluster left empty by the assignment step takes the point farthest from
// the centroid of the current largest cluster. Stops once assignments stop
// changing, so the returned result is a Lloyd fixed point unless max_iters
// ran out.
KmeansResult Kmeans(std::span<const Tensor> points, int k, Rng &rng,
                    const KmeansOptions &opts = {});

// Squared-distance inertia of an arbitrary assignment (centroids = means).
double PartitionInertia(std::span<const Tensor> points,
                        std::span<const int> assignments, int k);

}  // namespace dlglc

#endif  // DLGLC_CLUSTER_KMEANS_H_
