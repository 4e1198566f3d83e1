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


#include "z3sim/opalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace z3sim {
namespace {

SparseMat from_triplets(int dim, const std::vector<Eigen::Triplet<cplx>>& t) {
  SparseMat m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void require_cutoff(int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("boson cutoff must be >= 2, got " + std::to_string(cutoff));
}

}  // namespace

SparseMat shift_matrix() { return from_triplets(3, {{1, 0, 1.0}, {2, 1, 1.0}, {0, 2, 1.0}}); }

SparseMat clock_matrix() {
  return from_triplets(3, {{0, 0, 1.0}, {1, 1, kOmega}, {2, 2, kOmega * kOmega}});
}

SparseMat sigma_plus_matrix() { return from_triplets(2, {{0, 1, 1.0}}); }
SparseMat sigma_minus_matrix() { return from_triplets(2, {{1, 0, 1.0}}); }
SparseMat sigma_z_matrix() { return from_triplets(2, {{0, 0, 1.0}, {1, 1, -1.0}}); }
SparseMat sigma_x_matrix() { return from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}}); }

SparseMat projector_matrix(int dim, int level) { return from_triplets(dim, {{level, level, 1.0}}); }

SparseMat identity_matrix(int dim) {
  SparseMat m(dim, dim);
  m.setIdentity();
  return m;
}

SparseMat annihilation_matrix(int cutoff) {
  require_cutoff(cutoff);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 1; k < cutoff; ++k) t.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
  return from_triplets(cutoff, t);
}

SparseMat number_matrix(int cutoff) {
  require_cutoff(cutoff);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 1; k < cutoff; ++k) t.emplace_back(k, k, static_cast<double>(k));
  return from_triplets(cutoff, t);
}

SparseMat position_matrix(int cutoff, double eta) {
  SparseMat a = annihilation_matrix(cutoff);
  SparseMat ad = a.adjoint();
  return SparseMat((eta / std::sqrt(2.0)) * (a + ad));
}

SparseMat momentum_matrix(int cutoff, double eta) {
  SparseMat a = annihilation_matrix(cutoff);
  SparseMat ad = a.adjoint();
  return SparseMat(cplx(0.0, 1.0 / (std::sqrt(2.0) * eta)) * (ad - a));
}

DenseMat exp_i_hermitian(const DenseMat& h, double t) {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(h);
  Eigen::VectorXcd phases = (cplx(0.0, t) * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DenseMat exp_i_position(int cutoff, double eta, double theta, int pad) {
  require_cutoff(cutoff);
  if (pad < 0) throw std::invalid_argument("padding must be non-negative");
  DenseMat x = DenseMat(position_matrix(cutoff + pad, eta));
  return exp_i_hermitian(x, theta).topLeftCorner(cutoff, cutoff);
}

ClockShift clock_shift() {
  SpaceLayout q = SpaceLayout::qutrit("q");
  return {SparseOperator(q, shift_matrix()), SparseOperator(q, clock_matrix())};
}

BosonOps boson_ops(int cutoff, double eta) {
  require_cutoff(cutoff);
  SpaceLayout b = SpaceLayout::boson(cutoff, "b");
  SparseMat a = annihilation_matrix(cutoff);
  return {SparseOperator(b, a), SparseOperator(b, SparseMat(a.adjoint())),
          SparseOperator(b, number_matrix(cutoff), true), SparseOperator(b, position_matrix(cutoff, eta), true),
          SparseOperator(b, momentum_matrix(cutoff, eta), true)};
}

namespace {

DenseVec raw_coherent(cplx alpha, int cutoff) {
  DenseVec c(cutoff);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < cutoff; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

}  // namespace

double coherent_tail_weight(cplx alpha, int cutoff) {
  require_cutoff(cutoff);
  return std::max(0.0, 1.0 - raw_coherent(alpha, cutoff).squaredNorm());
}

DenseVec coherent_amplitudes(cplx alpha, int cutoff) {
  require_cutoff(cutoff);
  DenseVec c = raw_coherent(alpha, cutoff);
  if (std::norm(alpha) > cutoff / 4.0) {
    throw TruncationError("coherent amplitude |alpha|^2 = " + std::to_string(std::norm(alpha)) +
                              " exceeds cutoff/4 = " + std::to_string(cutoff / 4.0),
                          std::max(0.0, 1.0 - c.squaredNorm()));
  }
  return c / c.norm();
}

StateVector coherent_state(cplx alpha, int cutoff) {
  return StateVector(SpaceLayout::boson(cutoff, "b"), coherent_amplitudes(alpha, cutoff));
}

SparseOperator embed(const SparseMat& op, const std::string& label, const SpaceLayout& layout, bool hermitian) {
  TermSum ts(layout);
  ts.add(1.0, label, op);
  return SparseOperator(layout, ts.assemble(), hermitian);
}

SparseOperator embed(const SparseOperator& op, const std::string& label, const SpaceLayout& layout) {
  if (op.layout().num_factors() != 1) throw std::invalid_argument("embed: operator must act on one factor");
  return embed(op.matrix(), label, layout, op.hermitian());
}

}  // namespace z3sim
