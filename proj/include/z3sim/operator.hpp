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


#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <vector>

#include "z3sim/layout.hpp"

namespace z3sim {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx>;
using DenseMat = Eigen::MatrixXcd;
using DenseVec = Eigen::VectorXcd;

inline constexpr double kPruneTol = 1e-15;
inline constexpr double kHermitianTol = 1e-12;

/// Sparse complex matrix bound to the layout it acts on.
///
/// Immutable after construction. Entries with modulus <= kPruneTol are
/// dropped. When the hermitian flag is requested the constructor verifies
/// max|M - M^dagger| <= kHermitianTol and throws std::invalid_argument
/// otherwise.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(SpaceLayout layout, SparseMat matrix, bool hermitian = false);

  static SparseOperator identity(const SpaceLayout& layout);
  static SparseOperator zero(const SpaceLayout& layout);
  static SparseOperator from_dense(const SpaceLayout& layout, const DenseMat& m, bool hermitian = false);

  const SpaceLayout& layout() const { return layout_; }
  const SparseMat& matrix() const { return matrix_; }
  bool hermitian() const { return hermitian_; }
  std::int64_t dim() const { return matrix_.rows(); }
  DenseMat dense() const { return DenseMat(matrix_); }

 private:
  SpaceLayout layout_;
  SparseMat matrix_;
  bool hermitian_ = false;
};

class StateVector {
 public:
  StateVector() = default;
  StateVector(SpaceLayout layout, DenseVec amplitudes);

  /// Computational basis state with the given factor digits.
  static StateVector basis(const SpaceLayout& layout, std::span<const int> digits);
  /// Kronecker product of per-factor vectors, in layout order.
  static StateVector product(const SpaceLayout& layout, const std::vector<DenseVec>& parts);

  const SpaceLayout& layout() const { return layout_; }
  const DenseVec& amplitudes() const { return amplitudes_; }
  std::int64_t dim() const { return amplitudes_.size(); }
  double norm() const { return amplitudes_.norm(); }
  StateVector normalized() const;

 private:
  SpaceLayout layout_;
  DenseVec amplitudes_;
};

SparseOperator adjoint(const SparseOperator& op);
SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator*(cplx s, const SparseOperator& op);
SparseOperator operator*(double s, const SparseOperator& op);
SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

StateVector apply(const SparseOperator& op, const StateVector& state);
cplx expectation(const StateVector& state, const SparseOperator& op);
cplx inner(const StateVector& bra, const StateVector& ket);

/// max_ij |M_ij|
double max_abs(const SparseMat& m);
double max_abs(const SparseOperator& op);
double max_abs_diff(const SparseOperator& a, const SparseOperator& b);
double hermiticity_residual(const SparseMat& m);

/// Power with exponent >= 0 by repeated multiplication.
SparseOperator power(const SparseOperator& op, int exponent);

}  // namespace z3sim
