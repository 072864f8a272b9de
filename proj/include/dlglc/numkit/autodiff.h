// include/dlglc/numkit/autodiff.h

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

#ifndef DLGLC_NUMKIT_AUTODIFF_H_
#define DLGLC_NUMKIT_AUTODIFF_H_

#include <functional>
#include <span>
#include <vector>

#include "dlglc/numkit/tensor.h"

namespace dlglc::ad {

// Handle to a node on a Tape. Only meaningful for the tape that created it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode differentiation over an explicitly recorded operation list.
// Every node holds a matrix value; rank-1 parameters appear as 1 x n rows.
// Nodes built only from constants carry no gradient and record no backward
// step, so a network evaluated with Constant() leaves never receives one.
class Tape {
 public:
  Var Constant(Matrix value);
  Var Constant(const Tensor &t);
  // Leaf bound to a parameter; Backward() adds its gradient into p.grad.
  Var Leaf(Param &p);

  const Matrix &value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  // Gradient of the last Backward() output with respect to v (zeros if v
  // was not reached).
  Matrix grad(Var v) const;

  // x W^T + b, with b optional (pass Var{} to skip).
  Var Affine(Var x, Var w, Var b);
  Var Relu(Var x);
  // norm_floor > 0 divides rows shorter than the floor by the floor; with
  // the default a zero row is an error.
  Var L2NormalizeRows(Var x, double norm_floor = 0.0);
  // Row i of the result is g_i * v_i / |v_i|; g is a 1 x rows(v) row.
  Var WeightNormRows(Var v, Var g);
  Var Scale(Var x, double c);
  Var AddScalar(Var x, double c);
  Var Add(Var a, Var b);
  Var Mul(Var a, Var b);
  Var SoftmaxRows(Var x, double temperature);
  Var LogSoftmaxRows(Var x, double temperature);
  Var GatherRows(Var x, std::span<const int> rows);
  // out_i = -sum_k target_ik * logq_ik; target is treated as a constant.
  Var CrossEntropyRows(const Matrix &target, Var logq);
  // Row-wise cosine similarity, an n x 1 column.
  Var CosineRows(Var a, Var b, double norm_floor = 0.0);
  // Additive angular margin on a cosine matrix: entry (i, labels[i]) becomes
  // s*cos(acos(c) + m), every other entry s*c.
  Var AamLogits(Var cosines, std::span<const int> labels, double scale,
                double margin);
  Var Sum(Var x);
  // sum_i weights[i] * sum_j x_ij.
  Var WeightedRowSum(Var x, std::span<const double> weights);

  // Seeds d(out)/d(out) = 1 for a 1 x 1 node and propagates backwards.
  void Backward(Var out);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Param *param = nullptr;
    std::function<void()> backward;
  };

  Var Push(Matrix value, bool requires_grad);
  Matrix &GradRef(int id);
  bool Needs(Var v) const { return nodes_[v.id].requires_grad; }

  std::vector<Node> nodes_;
};

}  // namespace dlglc::ad

#endif  // DLGLC_NUMKIT_AUTODIFF_H_
