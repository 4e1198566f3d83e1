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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "z3sim/eigensolver.hpp"
#include "z3sim/models.hpp"

namespace z3sim {

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  DenseMat vectors;                 // columns on `layout`, empty when not requested
  SpaceLayout layout;
  std::vector<int> charges;  // empty until resolved
  std::vector<double> residuals;
  std::string method;
  int cutoff = 0;

  std::size_t size() const { return eigenvalues.size(); }
  bool has_vectors() const { return vectors.cols() > 0; }
  StateVector state(std::size_t i) const;

  nlohmann::json to_json() const;
  /// index,energy,charge,residual
  void write_csv(std::ostream& os) const;
};

/// Pairs whose residual exceeds this raise ConvergenceError.
inline constexpr double kSpectrumResidualTol = 1e-8;

/// k lowest eigenpairs via lowest_eigenpairs.
Spectrum eigs(const SparseOperator& h, int k, bool want_vectors, const LanczosOptions& opts = {});
/// Same on a sector of `terms`; vectors are expanded to the full layout.
Spectrum eigs(const TermSum& terms, const Sector& sector, int k, bool want_vectors, const LanczosOptions& opts = {});

inline constexpr double kClusterTol = 1e-8;
inline constexpr double kChargeTol = 1e-4;

/// Labels each state by q with <v|P|v> closest to w^q, after diagonalizing P
/// inside energy clusters (|dE| <= kClusterTol max(1, |E|)). Vectors are
/// rotated in place. Throws ChargeResolutionError.
Spectrum resolve_charges(const Spectrum& spec, const SparseOperator& generator);

/// (1/sqrt 3) sum_l w^{lk} |w^{-l} a>|w^{l} a>|chi_l>, a = lambda / omega_R and
/// chi_l = (1, w^{-l}, w^{-2l}) / sqrt 3. Charge under P_R is k.
StateVector cat_state(int k, const RabiParams& p);
int cat_charge(int k);
/// 2B e^{-3 a^2} cos(2 pi k / 3 + phi) - 2 lambda^2 / omega_R
double cat_energy_analytic(int k, const RabiParams& p);

struct CatFidelityReport {
  int cutoff = 0;
  double alpha = 0.0;
  std::array<double, 3> fidelity{};  // charge-matched
  std::array<double, 3> ed_energy{};
  std::array<double, 3> analytic_energy{};
  std::array<int, 3> charge{};
  bool one_per_charge = true;  // lowest three levels lie in distinct sectors
  double subspace_overlap = 0.0;  // smallest squared cosine of principal angles
  std::vector<std::string> warnings;

  double min_fidelity() const;
  nlohmann::json to_json() const;
};

/// Compares the cats with the lowest state of each charge sector.
CatFidelityReport cat_fidelity(const RabiParams& p);

/// Lowest levels of H_R, each with its charge, from per-sector dense solves.
struct ChargedLevel {
  double energy;
  int charge;
};
std::vector<ChargedLevel> rabi_lowest_levels(const RabiParams& p, int per_sector);

struct OperatorAction {
  std::string name;
  Matrix3c matrix;  // <psi_i| op |psi_j>
  Matrix3c expected;
  double residual;          // ||matrix - expected||_max
  double swapped_residual;  // against the X <-> X^dag assignment
  double perp_norm;         // max_k ||(1 - Pi) op psi_k||
};

struct CatActionReport {
  double alpha = 0.0;
  int cutoff = 0;
  std::vector<OperatorAction> ops;  // a1, a2, a1^dag, a2^dag
  double gram_residual = 0.0;       // ||<psi_i|psi_j> - delta_ij||_max
  nlohmann::json to_json() const;
};

/// Projections of the mode operators onto the cat span. Expected: a1 -> a X^dag,
/// a2 -> a X, a1^dag -> a X, a2^dag -> a X^dag.
CatActionReport cat_subspace_action(const RabiParams& p);

struct PottsFit {
  PottsParams fitted;
  PottsParams predicted;
  std::vector<double> levels;         // 9 lowest, mean removed
  std::vector<double> fitted_levels;  // mean removed
  double bandwidth = 0.0;
  double deviation = 0.0;  // max |level - fit| / bandwidth
  double gap_to_next = 0.0;
  double f_relative_error = 0.0;
  double J_relative_error = 0.0;
  std::vector<std::string> warnings;
  nlohmann::json to_json() const;
};

/// Sorted levels of build_potts(L = 2) with the mean removed.
std::vector<double> potts_levels_centered(double f_P, double phi, double J_P, double theta = 0.0);

/// Fits the 9 lowest L = 2 chain levels to a two-site Potts spectrum over
/// (f_P, J_P) at fixed phi. Throws RegimeError when the 10th level is closer
/// than three bandwidths.
PottsFit fit_effective_potts(const RabiChainParams& chain, const LanczosOptions& opts = {});
/// Fit on given levels (at least 10, ascending).
PottsFit fit_potts_levels(const std::vector<double>& levels, const RabiChainParams& chain);

}  // namespace z3sim
