// Copyright 2026 The z3sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "z3sim/operator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace z3sim {
namespace {

void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": layout mismatch");
}

}  // namespace

double max_abs(const SparseMat& m) {
  double best = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
  }
  return best;
}

double hermiticity_residual(const SparseMat& m) {
  if (m.rows() != m.cols()) return INFINITY;
  SparseMat diff = m - SparseMat(m.adjoint());
  return max_abs(diff);
}

SparseOperator::SparseOperator(SpaceLayout layout, SparseMat matrix, bool hermitian)
    : layout_(std::move(layout)), matrix_(std::move(matrix)), hermitian_(hermitian) {
  if (matrix_.rows() != layout_.total_dim() || matrix_.cols() != layout_.total_dim()) {
    throw std::invalid_argument("operator dimension " + std::to_string(matrix_.rows()) + "x" +
                                std::to_string(matrix_.cols()) + " does not match layout dimension " +
                                std::to_string(layout_.total_dim()));
  }
  matrix_.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return std::abs(v) > kPruneTol; });
  matrix_.makeCompressed();
  if (hermitian_) {
    double res = hermiticity_residual(matrix_);
    if (res > kHermitianTol) {
      throw std::invalid_argument("operator flagged hermitian has residual " + std::to_string(res));
    }
  }
}

SparseOperator SparseOperator::identity(const SpaceLayout& layout) {
  SparseMat m(layout.total_dim(), layout.total_dim());
  m.setIdentity();
  return SparseOperator(layout, std::move(m), true);
}

SparseOperator SparseOperator::zero(const SpaceLayout& layout) {
  return SparseOperator(layout, SparseMat(layout.total_dim(), layout.total_dim()), true);
}

SparseOperator SparseOperator::from_dense(const SpaceLayout& layout, const DenseMat& m, bool hermitian) {
  return SparseOperator(layout, m.sparseView(1.0, kPruneTol), hermitian);
}

StateVector::StateVector(SpaceLayout layout, DenseVec amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.total_dim()) {
    throw std::invalid_argument("state dimension does not match layout");
  }
}

StateVector StateVector::basis(const SpaceLayout& layout, std::span<const int> digits) {
  if (digits.size() != layout.num_factors()) throw std::invalid_argument("basis: wrong digit count");
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= layout.factor(i).dim) {
      throw std::invalid_argument("basis: digit out of range for '" + layout.factor(i).label + "'");
    }
  }
  DenseVec v = DenseVec::Zero(layout.total_dim());
  v(layout.encode(digits)) = 1.0;
  return StateVector(layout, std::move(v));
}

StateVector StateVector::product(const SpaceLayout& layout, const std::vector<DenseVec>& parts) {
  if (parts.size() != layout.num_factors()) throw std::invalid_argument("product: wrong part count");
  DenseVec v = DenseVec::Ones(1);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].size() != layout.factor(i).dim) {
      throw std::invalid_argument("product: part dimension mismatch for '" + layout.factor(i).label + "'");
    }
    DenseVec next(v.size() * parts[i].size());
    for (Eigen::Index a = 0; a < v.size(); ++a) {
      next.segment(a * parts[i].size(), parts[i].size()) = v(a) * parts[i];
    }
    v = std::move(next);
  }
  return StateVector(layout, std::move(v));
}

StateVector StateVector::normalized() const {
  double n = norm();
  if (n == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
  return StateVector(layout_, amplitudes_ / n);
}

SparseOperator adjoint(const SparseOperator& op) {
  return SparseOperator(op.layout(), SparseMat(op.matrix().adjoint()), op.hermitian());
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  require_same_layout(a.layout(), b.layout(), "add");
  return SparseOperator(a.layout(), a.matrix() + b.matrix(), a.hermitian() && b.hermitian());
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  require_same_layout(a.layout(), b.layout(), "subtract");
  return SparseOperator(a.layout(), a.matrix() - b.matrix(), a.hermitian() && b.hermitian());
}

SparseOperator operator*(cplx s, const SparseOperator& op) {
  return SparseOperator(op.layout(), s * op.matrix(), op.hermitian() && s.imag() == 0.0);
}

SparseOperator operator*(double s, const SparseOperator& op) {
  return SparseOperator(op.layout(), cplx(s) * op.matrix(), op.hermitian());
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  require_same_layout(a.layout(), b.layout(), "matmul");
  return SparseOperator(a.layout(), SparseMat(a.matrix() * b.matrix()), false);
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
  require_same_layout(a.layout(), b.layout(), "commutator");
  SparseMat ab = a.matrix() * b.matrix();
  SparseMat ba = b.matrix() * a.matrix();
  return SparseOperator(a.layout(), ab - ba, false);
}

StateVector apply(const SparseOperator& op, const StateVector& state) {
  require_same_layout(op.layout(), state.layout(), "apply");
  return StateVector(state.layout(), op.matrix() * state.amplitudes());
}

cplx expectation(const StateVector& state, const SparseOperator& op) {
  require_same_layout(op.layout(), state.layout(), "expectation");
  DenseVec hv = op.matrix() * state.amplitudes();
  return state.amplitudes().dot(hv);
}

cplx inner(const StateVector& bra, const StateVector& ket) {
  require_same_layout(bra.layout(), ket.layout(), "inner");
  return bra.amplitudes().dot(ket.amplitudes());
}

double max_abs(const SparseOperator& op) { return max_abs(op.matrix()); }

double max_abs_diff(const SparseOperator& a, const SparseOperator& b) {
  require_same_layout(a.layout(), b.layout(), "max_abs_diff");
  SparseMat d = a.matrix() - b.matrix();
  return max_abs(d);
}

SparseOperator power(const SparseOperator& op, int exponent) {
  if (exponent < 0) throw std::invalid_argument("power: negative exponent");
  SparseOperator result = SparseOperator::identity(op.layout());
  for (int i = 0; i < exponent; ++i) result = result * op;
  return result;
}

}  // namespace z3sim
