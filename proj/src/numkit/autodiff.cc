// src/numkit/autodiff.cc

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

#include "dlglc/numkit/autodiff.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dlglc/numkit/error.h"
#include "dlglc/numkit/vector-ops.h"

namespace dlglc::ad {

namespace {

void RequireSameShape(const Matrix &a, const Matrix &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    Fail(Errc::kShapeMismatch, std::string(op) + ": operand shapes differ");
}

// The target-angle term cos(acos(c) + m) and its derivative in c. The square
// root is floored so the derivative stays finite at |c| = 1.
double MarginCos(double c, double margin) {
  double sine = std::sqrt(std::max(1.0 - c * c, 0.0));
  return c * std::cos(margin) - sine * std::sin(margin);
}

double MarginCosDerivative(double c, double margin) {
  double sine = std::sqrt(std::max(1.0 - c * c, 1e-24));
  return std::cos(margin) + c * std::sin(margin) / sine;
}

}  // namespace

Var Tape::Push(Matrix value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix &Tape::GradRef(int id) {
  Node &n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::Constant(Matrix value) { return Push(std::move(value), false); }

Var Tape::Constant(const Tensor &t) { return Push(Matrix(t.AsMatrix()), false); }

Var Tape::Leaf(Param &p) {
  if (!p.value.SameShape(p.grad))
    Fail(Errc::kShapeMismatch, "param value/grad shapes differ");
  Var v = Push(Matrix(p.value.AsMatrix()), true);
  nodes_[v.id].param = &p;
  return v;
}

double Tape::scalar(Var v) const {
  const Matrix &m = nodes_[v.id].value;
  if (m.rows() != 1 || m.cols() != 1)
    Fail(Errc::kShapeMismatch, "scalar() on a non-scalar node");
  return m(0, 0);
}

Matrix Tape::grad(Var v) const {
  const Node &n = nodes_[v.id];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::Affine(Var x, Var w, Var b) {
  const Matrix &xv = value(x);
  const Matrix &wv = value(w);
  if (xv.cols() != wv.cols())
    Fail(Errc::kShapeMismatch, "affine: input width != weight columns");
  Matrix out = xv * wv.transpose();
  bool has_bias = b.valid();
  if (has_bias) {
    const Matrix &bv = value(b);
    if (bv.rows() != 1 || bv.cols() != wv.rows())
      Fail(Errc::kShapeMismatch, "affine: bias width != weight rows");
    out.rowwise() += bv.row(0);
  }
  bool rg = Needs(x) || Needs(w) || (has_bias && Needs(b));
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, x, w, b, y, has_bias] {
      const Matrix &dy = nodes_[y.id].grad;
      if (Needs(x)) GradRef(x.id).noalias() += dy * value(w);
      if (Needs(w)) GradRef(w.id).noalias() += dy.transpose() * value(x);
      if (has_bias && Needs(b)) GradRef(b.id).row(0) += dy.colwise().sum();
    };
  }
  return y;
}

Var Tape::Relu(Var x) {
  Matrix out = value(x).cwiseMax(0.0);
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, x, y] {
      const Matrix &dy = nodes_[y.id].grad;
      GradRef(x.id).array() +=
          dy.array() * (value(x).array() > 0.0).cast<double>();
    };
  }
  return y;
}

Var Tape::L2NormalizeRows(Var x, double norm_floor) {
  const Matrix &xv = value(x);
  Eigen::VectorXd norms = xv.rowwise().norm();
  // Rows below the floor are divided by the floor instead (a plain scaling).
  Eigen::Array<bool, Eigen::Dynamic, 1> floored(norms.size());
  for (Eigen::Index r = 0; r < norms.size(); ++r) {
    floored(r) = norm_floor > 0.0 && norms(r) < norm_floor;
    if (floored(r)) norms(r) = norm_floor;
    if (!(norms(r) > 0.0)) Fail(Errc::kZeroVector, "l2-normalize of a zero row");
  }
  Matrix out = norms.cwiseInverse().asDiagonal() * xv;
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, x, y, norms, floored] {
      const Matrix &dy = nodes_[y.id].grad;
      const Matrix &yv = value(y);
      Eigen::VectorXd proj = (dy.array() * yv.array()).rowwise().sum();
      for (Eigen::Index r = 0; r < proj.size(); ++r)
        if (floored(r)) proj(r) = 0.0;
      Matrix dx = dy - proj.asDiagonal() * yv;
      GradRef(x.id) += norms.cwiseInverse().asDiagonal() * dx;
    };
  }
  return y;
}

Var Tape::WeightNormRows(Var v, Var g) {
  const Matrix &vv = value(v);
  const Matrix &gv = value(g);
  if (gv.rows() != 1 || gv.cols() != vv.rows())
    Fail(Errc::kShapeMismatch, "weight norm: gain width != rows of v");
  Eigen::VectorXd norms = vv.rowwise().norm();
  for (Eigen::Index r = 0; r < norms.size(); ++r)
    if (!(norms(r) > 0.0)) Fail(Errc::kZeroVector, "weight norm of a zero row");
  Matrix unit = norms.cwiseInverse().asDiagonal() * vv;
  Matrix out = gv.row(0).transpose().asDiagonal() * unit;
  bool rg = Needs(v) || Needs(g);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, v, g, y, norms, unit] {
      const Matrix &dy = nodes_[y.id].grad;
      Eigen::VectorXd dot = (dy.array() * unit.array()).rowwise().sum();
      if (Needs(g)) GradRef(g.id).row(0) += dot.transpose();
      if (Needs(v)) {
        Eigen::VectorXd coef =
            value(g).row(0).transpose().cwiseQuotient(norms);
        Matrix dv = dy - dot.asDiagonal() * unit;
        GradRef(v.id) += coef.asDiagonal() * dv;
      }
    };
  }
  return y;
}

Var Tape::Scale(Var x, double c) {
  Matrix out = value(x) * c;
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, x, y, c] {
      GradRef(x.id) += nodes_[y.id].grad * c;
    };
  }
  return y;
}

Var Tape::AddScalar(Var x, double c) {
  Matrix out = value(x).array() + c;
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, x, y] { GradRef(x.id) += nodes_[y.id].grad; };
  }
  return y;
}

Var Tape::Add(Var a, Var b) {
  RequireSameShape(value(a), value(b), "add");
  Matrix out = value(a) + value(b);
  bool rg = Needs(a) || Needs(b);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, a, b, y] {
      const Matrix &dy = nodes_[y.id].grad;
      if (Needs(a)) GradRef(a.id) += dy;
      if (Needs(b)) GradRef(b.id) += dy;
    };
  }
  return y;
}

Var Tape::Mul(Var a, Var b) {
  RequireSameShape(value(a), value(b), "mul");
  Matrix out = value(a).cwiseProduct(value(b));
  bool rg = Needs(a) || Needs(b);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, a, b, y] {
      const Matrix &dy = nodes_[y.id].grad;
      if (Needs(a)) GradRef(a.id) += dy.cwiseProduct(value(b));
      if (Needs(b)) GradRef(b.id) += dy.cwiseProduct(value(a));
    };
  }
  return y;
}

Var Tape::SoftmaxRows(Var x, double temperature) {
  Matrix out;
  kernels::SoftmaxRows(value(x), temperature, &out);
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, x, y, temperature] {
      const Matrix &dy = nodes_[y.id].grad;
      const Matrix &p = value(y);
      Eigen::VectorXd inner = (dy.array() * p.array()).rowwise().sum();
      Matrix dz = p.cwiseProduct(dy - inner.replicate(1, dy.cols()));
      GradRef(x.id) += dz / temperature;
    };
  }
  return y;
}

Var Tape::LogSoftmaxRows(Var x, double temperature) {
  Matrix out;
  kernels::LogSoftmaxRows(value(x), temperature, &out);
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, x, y, temperature] {
      const Matrix &dy = nodes_[y.id].grad;
      Matrix p = value(y).array().exp();
      Eigen::VectorXd total = dy.rowwise().sum();
      Matrix dz = dy - total.asDiagonal() * p;
      GradRef(x.id) += dz / temperature;
    };
  }
  return y;
}

Var Tape::GatherRows(Var x, std::span<const int> rows) {
  const Matrix &xv = value(x);
  Matrix out(static_cast<Eigen::Index>(rows.size()), xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= xv.rows())
      Fail(Errc::kShapeMismatch, "gather: row index out of range");
    out.row(static_cast<Eigen::Index>(i)) = xv.row(rows[i]);
  }
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    std::vector<int> idx(rows.begin(), rows.end());
    nodes_[y.id].backward = [this, x, y, idx = std::move(idx)] {
      const Matrix &dy = nodes_[y.id].grad;
      Matrix &dx = GradRef(x.id);
      for (std::size_t i = 0; i < idx.size(); ++i)
        dx.row(idx[i]) += dy.row(static_cast<Eigen::Index>(i));
    };
  }
  return y;
}

Var Tape::CrossEntropyRows(const Matrix &target, Var logq) {
  RequireSameShape(target, value(logq), "cross entropy");
  Eigen::VectorXd ce = -(target.array() * value(logq).array()).rowwise().sum();
  Matrix out = ce;
  bool rg = Needs(logq);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, logq, y, target] {
      const Matrix &dy = nodes_[y.id].grad;
      GradRef(logq.id) -= dy.col(0).asDiagonal() * target;
    };
  }
  return y;
}

Var Tape::CosineRows(Var a, Var b, double norm_floor) {
  const Matrix &av = value(a);
  const Matrix &bv = value(b);
  RequireSameShape(av, bv, "cosine");
  Eigen::VectorXd na = av.rowwise().norm();
  Eigen::VectorXd nb = bv.rowwise().norm();
  // A floored norm is a constant, so its row loses the projection term.
  Eigen::VectorXd keep_a = Eigen::VectorXd::Ones(na.size());
  Eigen::VectorXd keep_b = Eigen::VectorXd::Ones(nb.size());
  for (Eigen::Index r = 0; r < na.size(); ++r) {
    if (norm_floor > 0.0 && na(r) < norm_floor) {
      na(r) = norm_floor;
      keep_a(r) = 0.0;
    }
    if (norm_floor > 0.0 && nb(r) < norm_floor) {
      nb(r) = norm_floor;
      keep_b(r) = 0.0;
    }
    if (!(na(r) > 0.0) || !(nb(r) > 0.0))
      Fail(Errc::kZeroVector, "cosine with a zero row");
  }
  Eigen::VectorXd dots = (av.array() * bv.array()).rowwise().sum();
  Eigen::VectorXd cosv = dots.array() / (na.array() * nb.array());
  Matrix out = cosv;
  bool rg = Needs(a) || Needs(b);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, a, b, y, na, nb, cosv, keep_a, keep_b] {
      const Eigen::VectorXd dc = nodes_[y.id].grad.col(0);
      const Matrix &av = value(a);
      const Matrix &bv = value(b);
      Eigen::VectorXd inv_ab = (na.array() * nb.array()).inverse();
      if (Needs(a)) {
        Eigen::VectorXd ca = keep_a.array() * cosv.array() / na.array().square();
        GradRef(a.id) += dc.asDiagonal() *
                         (inv_ab.asDiagonal() * bv - ca.asDiagonal() * av);
      }
      if (Needs(b)) {
        Eigen::VectorXd cb = keep_b.array() * cosv.array() / nb.array().square();
        GradRef(b.id) += dc.asDiagonal() *
                         (inv_ab.asDiagonal() * av - cb.asDiagonal() * bv);
      }
    };
  }
  return y;
}

Var Tape::AamLogits(Var cosines, std::span<const int> labels, double scale,
                    double margin) {
  const Matrix &cv = value(cosines);
  if (static_cast<Eigen::Index>(labels.size()) != cv.rows())
    Fail(Errc::kShapeMismatch, "aam: one label per row required");
  Matrix out = cv * scale;
  for (Eigen::Index r = 0; r < cv.rows(); ++r) {
    int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= cv.cols()) Fail(Errc::kInvalidLabel, "aam label out of range");
    out(r, y) = scale * MarginCos(cv(r, y), margin);
  }
  bool rg = Needs(cosines);
  Var y = Push(std::move(out), rg);
  if (rg) {
    std::vector<int> lab(labels.begin(), labels.end());
    nodes_[y.id].backward = [this, cosines, y, lab = std::move(lab), scale,
                             margin] {
      const Matrix &dy = nodes_[y.id].grad;
      const Matrix &cv = value(cosines);
      Matrix d = dy * scale;
      for (Eigen::Index r = 0; r < cv.rows(); ++r) {
        int t = lab[static_cast<std::size_t>(r)];
        d(r, t) = dy(r, t) * scale * MarginCosDerivative(cv(r, t), margin);
      }
      GradRef(cosines.id) += d;
    };
  }
  return y;
}

Var Tape::Sum(Var x) {
  Matrix out(1, 1);
  out(0, 0) = value(x).sum();
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    nodes_[y.id].backward = [this, x, y] {
      GradRef(x.id).array() += nodes_[y.id].grad(0, 0);
    };
  }
  return y;
}

Var Tape::WeightedRowSum(Var x, std::span<const double> weights) {
  const Matrix &xv = value(x);
  if (static_cast<Eigen::Index>(weights.size()) != xv.rows())
    Fail(Errc::kShapeMismatch, "weighted sum: one weight per row required");
  Eigen::Map<const Eigen::VectorXd> w(weights.data(), xv.rows());
  Matrix out(1, 1);
  out(0, 0) = w.dot(xv.rowwise().sum());
  bool rg = Needs(x);
  Var y = Push(std::move(out), rg);
  if (rg) {
    Eigen::VectorXd wc = w;
    nodes_[y.id].backward = [this, x, y, wc] {
      double g = nodes_[y.id].grad(0, 0);
      GradRef(x.id) += (wc * g).replicate(1, value(x).cols());
    };
  }
  return y;
}

void Tape::Backward(Var out) {
  const Matrix &ov = value(out);
  if (ov.rows() != 1 || ov.cols() != 1)
    Fail(Errc::kShapeMismatch, "backward needs a scalar output");
  if (!std::isfinite(ov(0, 0))) Fail(Errc::kNonFiniteLoss, "loss is not finite");
  for (Node &n : nodes_) n.grad.resize(0, 0);
  if (!Needs(out)) return;
  GradRef(out.id)(0, 0) = 1.0;
  for (int i = out.id; i >= 0; --i) {
    Node &n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward();
    if (n.param != nullptr) {
      auto pg = n.param->grad.AsMatrix();
      pg += n.grad;
    }
  }
}

}  // namespace dlglc::ad
