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

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "z3sim/models.hpp"

namespace z3sim {

struct StageRecord {
  std::string name;
  double unitarity_residual = 0.0;
  double form_residual = 0.0;  // vs. the directly built form of this stage
  std::string note;
};

struct MappingReport {
  std::vector<StageRecord> stages;
  int cutoff = 0;
  int levels = 0;
  double translation_constant = 0.0;        // derived: 3 eta^2 Omega / 8
  double translation_constant_reference = 0.0;  // 3 eta^2 Omega / 4
  double boost_constant = 0.0;              // -eta^2 Omega / 24
  double constant_offset = 0.0;             // total scalar, derived convention
  RabiParams extracted;
  RabiParams expected;  // map_qb_to_rabi
  double parameter_deviation = 0.0;
  std::vector<double> sector_levels;   // S^z = -1 block of H_QB
  std::vector<double> reduced_levels;  // constant + H_R levels + Omega n0
  double spectral_deviation = 0.0;
  double cutoff_drift = 0.0;

  double max_unitarity_residual() const;
  nlohmann::json to_json() const;
};

/// S_j = exp(i sigma^z_j x_j / 2) for one qubit-boson pair, 2c x 2c with
/// the qubit as the slow index.
DenseMat site_translation(int cutoff, double eta);
/// S = prod_j S_j on qb_ring_layout(cutoff).
SparseOperator momentum_translation_unitary(const SpaceLayout& layout, double eta);
/// Ring terms conjugated site by site with S_j on cutoff + pad levels.
std::vector<RingTerm> translate_ring_terms(const std::vector<RingTerm>& terms, double eta);
/// Ring terms conjugated with the truncated S_j, i.e. exactly S^dag H S.
std::vector<RingTerm> conjugate_ring_terms(const std::vector<RingTerm>& terms, double eta, int cutoff);
/// eps sum sz + Omega sum n + (eta^2 Omega / 2) sum p sz + g sum A sp sm + 3 eta^2 Omega / 8.
SparseOperator translated_ring_direct(const QBRingParams& p);

/// Fock-space unitary G on three boson factors with G^dag b_j G = sum_k M_jk b_k.
/// Exact on states with total number <= cutoff - 1 in those modes, identity
/// elsewhere.
SparseOperator mode_mixing_unitary(const SpaceLayout& layout, const std::array<std::string, 3>& labels,
                                   const Matrix3c& m);
/// M_jk = w^{jk} / sqrt 3, so b_j = sum_k M_jk b(k); `inverse` uses M^dag.
Matrix3c ring_fourier_matrix(bool inverse = false);
SparseOperator fourier_ring_unitary(const SpaceLayout& layout, bool inverse = false,
                                    const std::array<std::string, 3>& labels = {"b0", "b1", "b2"});
/// Translated ring written in momentum modes (factors b0 b1 b2 = k 0 1 2).
SparseOperator momentum_ring_direct(const QBRingParams& p);

struct Isometry {
  SparseMat V;  // full x sector
  SpaceLayout sector_layout;
};

/// Columns |q> = qubit q up, others down; sector layout is (q, remaining factors).
Isometry single_excitation_isometry(const SpaceLayout& layout);
/// Momentum form restricted to S^z = -1 on (q, b0, b1, b2).
SparseOperator sector_direct(const QBRingParams& p);
/// exp(beta b^dag - beta^* b) from the truncated generator.
DenseMat displacement_matrix(int cutoff, cplx beta);
SparseOperator boosted_sector_direct(const QBRingParams& p);

struct ReductionOptions {
  int levels = 15;  // 0 skips the spectral certification
  bool cutoff_check = true;
  int cutoff_step = 8;
  double drift_tol = 1e-8;
};

struct Reduction {
  SparseOperator rabi;    // on rabi_layout(cutoff)
  SparseOperator staged;  // final stage on (q, b0, b1, b2)
  MappingReport report;
};

/// Translation, Fourier, restriction, k = 0 boost, qutrit and boson phase
/// rotation. Throws ConvergenceError if the cutoff check fails.
Reduction reduce_qb_to_rabi(const QBRingParams& p, const ReductionOptions& opts = {});

/// Lowest levels of the S^z = -1 block of H_QB.
std::vector<double> sector_levels(const QBRingParams& p, int k);
/// Lowest levels of constant + H_R + Omega n0.
std::vector<double> reduced_levels(const RabiParams& r, double constant, int cutoff, int k);

struct ParafermionOps {
  int L = 0;
  std::vector<SparseOperator> gamma;
  std::vector<SparseOperator> delta;
};

inline constexpr int kMaxParafermionSites = 8;

ParafermionOps fk_transform(int L);

struct ParafermionRelations {
  double gamma_gamma = 0.0;
  double delta_delta = 0.0;
  double gamma_delta = 0.0;  // same site ordered as Gamma before Delta
  double cubes = 0.0;
  double max() const;
};

ParafermionRelations check_parafermion_relations(const ParafermionOps& ops);

struct ParafermionFormCheck {
  double residual = 0.0;            // ||H_cl - H_chP||_max
  double relabeled_residual = 0.0;  // vs H_cl(f, -phi, J, theta + 2pi/3)
  double spectral_residual = 0.0;
};

inline constexpr int kMaxParafermionFormSites = 6;

SparseOperator parafermion_chain(const ParafermionOps& ops, const PottsParams& p);
ParafermionFormCheck verify_parafermion_form(const PottsParams& p);

}  // namespace z3sim
