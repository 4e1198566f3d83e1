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
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "z3sim/opalg.hpp"

namespace z3sim {

using Matrix3c = Eigen::Matrix3cd;
using Matrix2c = Eigen::Matrix2cd;

/// 4 * ceil(alpha^2) + 12.
int default_cutoff(double alpha);

struct RabiParams {
  double omega_R = 1.0;
  double B = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
  int cutoff = 0;  // per mode; 0 selects default_cutoff(lambda / omega_R)

  double alpha() const { return lambda / omega_R; }
  int resolved_cutoff() const;
  void validate() const;
};

struct QBRingParams {
  double epsilon = 0.0;
  double omega_QB = 1.0;
  double g = 0.0;
  double eta = 1.0;
  int cutoff = 12;
  Matrix3c A = default_interaction();

  static Matrix3c default_interaction();  // X + X^dag
  static Matrix3c optomechanical_interaction();  // -iX + iX^dag
  void validate() const;
};

struct PottsParams {
  int L = 1;
  double f_P = 0.0;
  double phi = 0.0;
  double J_P = 0.0;
  double theta = 0.0;

  void validate() const;
};

struct RabiChainParams {
  int L = 2;
  RabiParams site;
  double J = 0.0;

  void validate() const;
};

struct DisorderParams {
  enum class Kind { SigmaX, SiteParams };
  Kind kind = Kind::SigmaX;
  std::array<double, 3> delta{};  // sigma^x fields
  std::array<double, 3> d_epsilon{};
  std::array<double, 3> d_omega{};
  std::array<double, 3> d_g{};  // bond (j, j+1)

  /// Independent N(0, sigma) fields from a stream derived from (seed, realization).
  static DisorderParams sample_sigma_x(double sigma, std::uint64_t seed, std::uint64_t realization);
  void validate() const;
};

struct CircuitParams {
  double L_B = 0.0;  // H
  double C_B = 0.0;  // F
  double C_Q = 0.0;  // F
  double I_R = 0.0;  // A
  double n_off = 0.0;
  double C_P = 0.0;  // F

  void validate() const;
};

namespace si {
inline constexpr double e = 1.602176634e-19;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double h = 6.62607015e-34;
inline constexpr double phi0 = h / (2.0 * e);
}  // namespace si

// Layouts. Factor order: qutrit first, then bosons ascending.
SpaceLayout rabi_layout(int cutoff);
SpaceLayout qb_ring_layout(int cutoff);  // s0 s1 s2 b0 b1 b2
SpaceLayout potts_layout(int L);         // q1 .. qL
SpaceLayout rabi_chain_layout(int L, int cutoff);  // m1.q m1.a1 m1.a2 m2.q ...

SparseOperator build_z3_rabi(const RabiParams& p);
SparseOperator symmetry_generator_rabi(int cutoff);
/// (l + n1 - n2) mod 3 for digits (l, n1, n2).
int rabi_charge(std::span<const int> digits);
Sector rabi_charge_sector(int cutoff, int charge);

/// B (e^{i phi} Z + e^{-i phi} Z^dag)
Matrix3c magnetic_matrix(double B, double phi);

SparseOperator build_potts(const PottsParams& p);
SparseOperator potts_charge_operator(int L);  // prod_m Z_m

TermSum rabi_chain_terms(const RabiChainParams& p);
SparseOperator build_rabi_chain(const RabiChainParams& p);
SparseOperator chain_symmetry_generator(int L, int cutoff);
int chain_charge(std::span<const int> digits);
Sector chain_charge_sector(int L, int cutoff, int charge);

inline constexpr std::int64_t kChainDimLimit = 25'000'000;

/// One qubit-boson pair factor of a ring term. The boson matrix is given on
/// a padded Fock space; builders truncate it to the cutoff.
struct SiteFactor {
  int site;
  Matrix2c qubit;
  DenseMat boson;
};

struct RingTerm {
  cplx coef;
  std::vector<SiteFactor> factors;  // distinct sites
};

/// Ring Hamiltonian as local terms with boson factors on cutoff + pad levels.
std::vector<RingTerm> qb_ring_terms(const QBRingParams& p, int pad = kExpPadding);
std::vector<RingTerm> disordered_qb_ring_terms(const QBRingParams& p, const DisorderParams& d,
                                               int pad = kExpPadding);
/// Truncates boson factors to `cutoff` and assembles on qb_ring_layout(cutoff).
TermSum ring_terms_to_sum(const std::vector<RingTerm>& terms, int cutoff);

SparseOperator build_qb_ring(const QBRingParams& p);
SparseOperator build_disordered_qb_ring(const QBRingParams& p, const DisorderParams& d);
SparseOperator total_sz(int cutoff);
/// States with exactly one qubit up.
Sector single_excitation_sector(int cutoff);

struct RabiMapping {
  RabiParams rabi;
  Matrix3c magnetic;       // g U A U^dag in the final qutrit basis
  double magnetic_shift;   // identity part of `magnetic`
  double constant_offset;  // total scalar dropped from the reduced model
  bool phase_determined;
};

/// Final qutrit basis change U = X^dag F^dag, F_jk = w^{jk} / sqrt 3.
Matrix3c qutrit_fourier_unitary();
/// Maps QB-ring parameters onto the two-mode Rabi model. Throws
/// NotReducibleError when ||X^dag A X - A||_max > 1e-10.
RabiMapping map_qb_to_rabi(const QBRingParams& p);

QBRingParams map_circuit_to_qb(const CircuitParams& c);
/// hbar * Omega_QB in joules.
double circuit_energy_unit(const CircuitParams& c);

struct RegimeFlag {
  std::string name;
  double value;
  double threshold;
  bool satisfied;
};

struct PottsMapping {
  PottsParams potts;
  std::vector<RegimeFlag> regime;
  std::vector<std::string> warnings;
};

inline constexpr double kExtremeCouplingThreshold = 1.5;

PottsMapping map_chain_to_potts(const RabiChainParams& p);
/// f_P = g e^{-eta^2/2}, J_P = eta^2 J / 3.
PottsParams potts_from_qb(const QBRingParams& p, double J, int L = 2);
PottsMapping map_circuit_to_potts(const CircuitParams& c, int L = 2);

struct CovarianceCheck {
  bool covariant;
  double residual;  // min_q ||Z M Z^dag - w^q M||_max
  int phase_power;
};

CovarianceCheck z3_covariance_check(const Matrix3c& m);
Matrix3c spin1_sx();
Matrix3c truncated_anharmonic_coordinate();

}  // namespace z3sim
