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

#include <numbers>
#include <string>

#include "z3sim/errors.hpp"
#include "z3sim/operator.hpp"
#include "z3sim/term_sum.hpp"

namespace z3sim {

inline const cplx kOmega = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);

/// Extra Fock levels used when exponentiating the coordinate operator.
inline constexpr int kExpPadding = 24;

// Local matrices. Qubit index 0 is spin up (sigma^z = +1).
SparseMat shift_matrix();  // X|j> = |j+1 mod 3>
SparseMat clock_matrix();  // Z = diag(1, w, w^2)
SparseMat sigma_plus_matrix();
SparseMat sigma_minus_matrix();
SparseMat sigma_z_matrix();
SparseMat sigma_x_matrix();
SparseMat projector_matrix(int dim, int level);
SparseMat identity_matrix(int dim);
SparseMat annihilation_matrix(int cutoff);
SparseMat number_matrix(int cutoff);
SparseMat position_matrix(int cutoff, double eta);  // eta (b + b^dag) / sqrt 2
SparseMat momentum_matrix(int cutoff, double eta);  // i (b^dag - b) / (sqrt 2 eta)

/// exp(i t h) for Hermitian h.
DenseMat exp_i_hermitian(const DenseMat& h, double t);

/// Upper-left cutoff block of exp(i theta x) evaluated on cutoff + pad levels.
DenseMat exp_i_position(int cutoff, double eta, double theta, int pad = kExpPadding);

struct ClockShift {
  SparseOperator X;
  SparseOperator Z;
};

ClockShift clock_shift();

struct BosonOps {
  SparseOperator a;
  SparseOperator a_dag;
  SparseOperator n;
  SparseOperator x;
  SparseOperator p;
};

/// Single-mode operators on a boson layout labelled "b".
BosonOps boson_ops(int cutoff, double eta = 1.0);

/// Normalized truncated coherent amplitudes. Throws TruncationError when
/// |alpha|^2 > cutoff / 4.
DenseVec coherent_amplitudes(cplx alpha, int cutoff);
/// Probability weight of a coherent state above the cutoff.
double coherent_tail_weight(cplx alpha, int cutoff);
StateVector coherent_state(cplx alpha, int cutoff);

/// Kronecker embedding of a single-factor operator into `layout`.
SparseOperator embed(const SparseOperator& op, const std::string& label, const SpaceLayout& layout);
SparseOperator embed(const SparseMat& op, const std::string& label, const SpaceLayout& layout, bool hermitian = false);

}  // namespace z3sim
