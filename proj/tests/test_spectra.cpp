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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "z3sim/errors.hpp"
#include "z3sim/spectra.hpp"

using namespace z3sim;
using std::numbers::pi;

namespace {

RabiParams rabi(double lambda, double B, double phi, int cutoff) {
  RabiParams p;
  p.lambda = lambda;
  p.B = B;
  p.phi = phi;
  p.cutoff = cutoff;
  return p;
}

std::vector<double> free_potts_levels(double f, double phi, double J) { return potts_levels_centered(f, phi, J); }

}  // namespace

TEST(Eigs, DiagonalMatrix) {
  DenseMat d = DenseMat::Zero(3, 3);
  d.diagonal() << 3.0, 1.0, 2.0;
  Spectrum s = eigs(SparseOperator::from_dense(SpaceLayout::qutrit(), d, true), 3, true);
  EXPECT_NEAR(s.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[1], 2.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[2], 3.0, 1e-14);
  EXPECT_EQ(s.method, "dense");
}

TEST(Eigs, FreeBosons) {
  SpaceLayout l;
  l.add_boson("a1", 6).add_boson("a2", 6);
  TermSum ts(l);
  ts.add(1.0, "a1", number_matrix(6)).add(1.0, "a2", number_matrix(6));
  Spectrum s = eigs(ts.build(true), 6, false);
  std::vector<double> want{0, 1, 1, 2, 2, 2};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.eigenvalues[i], want[i], 1e-12);

  // With the qutrit every level is threefold.
  Spectrum r = eigs(build_z3_rabi(rabi(0.0, 0.0, 0.0, 6)), 9, false);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(r.eigenvalues[i], i < 3 ? 0.0 : 1.0, 1e-12);
}

TEST(Eigs, DenseAndIterativeAgree) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const int n = 500;
  DenseMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(nd(rng), nd(rng));
  DenseMat h = 0.5 * (a + a.adjoint());
  EigenPairs dense = dense_eigh(h, 6, false);
  EigenPairs it = lanczos_eigh(h.sparseView(), 6);
  EXPECT_EQ(it.method, "lanczos");
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(dense.values(i), it.values(i), 1e-9);
}

TEST(Eigs, RequiresHermitianFlag) {
  SparseOperator h(SpaceLayout::qutrit(), identity_matrix(3), false);
  EXPECT_THROW(eigs(h, 1, false), std::invalid_argument);
  SparseOperator g(SpaceLayout::qutrit(), identity_matrix(3), true);
  EXPECT_THROW(eigs(g, 4, false), std::invalid_argument);
}

TEST(Eigs, ResidualsWithinBound) {
  Spectrum s = eigs(build_z3_rabi(rabi(1.0, 0.1, 0.3, 12)), 8, true);
  ASSERT_EQ(s.residuals.size(), 8u);
  for (double r : s.residuals) EXPECT_LE(r, kSpectrumResidualTol);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(s.eigenvalues[i - 1], s.eigenvalues[i]);
}

TEST(Eigs, SectorMatchesFullSpectrum) {
  RabiChainParams ch;
  ch.L = 2;
  ch.site = rabi(0.8, 0.1, 0.4, 4);
  ch.J = 0.05;
  TermSum terms = rabi_chain_terms(ch);
  std::vector<double> merged;
  for (int q = 0; q < 3; ++q) {
    Spectrum s = eigs(terms, chain_charge_sector(2, 4, q), 5, true);
    EXPECT_EQ(s.vectors.rows(), terms.layout().total_dim());
    SparseOperator h = terms.build(true);
    for (int i = 0; i < 5; ++i) {
      DenseVec v = s.vectors.col(i);
      EXPECT_LE((h.matrix() * v - s.eigenvalues[i] * v).norm(), 1e-9);
    }
    merged.insert(merged.end(), s.eigenvalues.begin(), s.eigenvalues.end());
  }
  std::sort(merged.begin(), merged.end());
  Spectrum full = eigs(terms.build(true), 5, false);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(merged[i], full.eigenvalues[i], 1e-10);
}

TEST(Spectrum, CsvAndJson) {
  Spectrum s = eigs(build_z3_rabi(rabi(0.5, 0.1, 0.0, 6)), 3, true);
  s = resolve_charges(s, symmetry_generator_rabi(6));
  std::ostringstream os;
  s.write_csv(os);
  std::string csv = os.str();
  EXPECT_EQ(csv.rfind("index,energy,charge,residual\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  auto j = s.to_json();
  EXPECT_EQ(j["charges"].size(), 3u);
  EXPECT_EQ(j["method"], "dense");
}

TEST(ResolveCharges, CatsInEnergyOrder) {
  RabiParams p = rabi(1.5, 0.02, 2.0 * pi / 3.0, 40);
  Spectrum s;
  s.layout = rabi_layout(40);
  s.vectors.resize(s.layout.total_dim(), 3);
  for (int k = 0; k < 3; ++k) {
    s.eigenvalues.push_back(cat_energy_analytic(k, p));
    s.vectors.col(k) = cat_state(k, p).amplitudes();
  }
  // k = 0, 1 are degenerate at phi = 2 pi / 3.
  EXPECT_NEAR(s.eigenvalues[0], s.eigenvalues[1], 1e-15);
  EXPECT_LT(s.eigenvalues[1], s.eigenvalues[2]);
  Spectrum r = resolve_charges(s, symmetry_generator_rabi(40));
  EXPECT_EQ(r.charges, (std::vector<int>{0, 1, 2}));
}

TEST(ResolveCharges, EdLowestLevelsAtTwoPiOverThree) {
  RabiParams p = rabi(2.0, 0.02, 2.0 * pi / 3.0, 32);
  Spectrum s = resolve_charges(eigs(build_z3_rabi(p), 3, true), symmetry_generator_rabi(32));
  std::vector<int> c = s.charges;
  EXPECT_EQ(c[2], 2);
  std::sort(c.begin(), c.end());
  EXPECT_EQ(c, (std::vector<int>{0, 1, 2}));
}

TEST(ResolveCharges, DegenerateQutritManifold) {
  Spectrum s = eigs(build_z3_rabi(rabi(0.0, 0.0, 0.0, 5)), 3, true);
  Spectrum r = resolve_charges(s, symmetry_generator_rabi(5));
  EXPECT_EQ(r.charges, (std::vector<int>{0, 1, 2}));
  for (int i = 0; i < 3; ++i) {
    std::vector<int> d{i, 0, 0};
    DenseVec e = StateVector::basis(r.layout, d).amplitudes();
    EXPECT_NEAR(std::abs(e.dot(r.vectors.col(i))), 1.0, 1e-10);
  }
}

TEST(ResolveCharges, IdentityGenerator) {
  Spectrum s = eigs(build_z3_rabi(rabi(0.7, 0.1, 0.2, 6)), 4, true);
  Spectrum r = resolve_charges(s, SparseOperator::identity(s.layout));
  EXPECT_EQ(r.charges, (std::vector<int>(4, 0)));
}

TEST(ResolveCharges, NonSymmetryFails) {
  DenseMat d = DenseMat::Zero(3, 3);
  d.diagonal() << 0.0, 1.0, 2.0;
  Spectrum s = eigs(SparseOperator::from_dense(SpaceLayout::qutrit(), d, true), 3, true);
  EXPECT_THROW(resolve_charges(s, SparseOperator(SpaceLayout::qutrit(), shift_matrix())), ChargeResolutionError);
  Spectrum bare = eigs(SparseOperator::from_dense(SpaceLayout::qutrit(), d, true), 3, false);
  EXPECT_THROW(resolve_charges(bare, SparseOperator::identity(SpaceLayout::qutrit())), std::invalid_argument);
}

TEST(CatState, NormalizedAndNearlyOrthogonal) {
  RabiParams p = rabi(1.5, 0.0, 0.0, 40);
  StateVector s0 = cat_state(0, p), s1 = cat_state(1, p), s2 = cat_state(2, p);
  EXPECT_NEAR(s0.norm(), 1.0, 1e-8);
  EXPECT_NEAR(s2.norm(), 1.0, 1e-8);
  EXPECT_LE(std::abs(inner(s0, s1)), 1e-6);
  EXPECT_LE(std::abs(inner(s1, s2)), 1e-6);
}

TEST(CatState, ChargeAssignmentFrozen) {
  RabiParams p = rabi(1.5, 0.0, 0.0, 40);
  SparseOperator pr = symmetry_generator_rabi(40);
  for (int k = 0; k < 3; ++k) {
    StateVector s = cat_state(k, p);
    EXPECT_EQ(cat_charge(k), k);
    DenseVec d = apply(pr, s).amplitudes() - std::pow(kOmega, cat_charge(k)) * s.amplitudes();
    EXPECT_LE(d.norm(), 1e-6);
  }
}

TEST(CatState, RejectsBadIndexAndTruncation) {
  EXPECT_THROW(cat_state(3, rabi(1.0, 0.0, 0.0, 20)), std::invalid_argument);
  EXPECT_THROW(cat_state(0, rabi(3.0, 0.0, 0.0, 20)), TruncationError);
}

TEST(CatEnergy, ZeroFieldIsDegenerate) {
  RabiParams p = rabi(2.0, 0.0, 0.7, 0);
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(cat_energy_analytic(k, p), -8.0);
}

TEST(CatEnergy, CosinePattern) {
  RabiParams p = rabi(1.2, 0.3, 2.0 * pi / 3.0, 0);
  double e0 = cat_energy_analytic(0, p), e1 = cat_energy_analytic(1, p), e2 = cat_energy_analytic(2, p);
  EXPECT_NEAR(e0, e1, 1e-15);
  EXPECT_GT(std::abs(e2 - e0), 1e-6);
}

TEST(CatEnergy, ReferenceValue) {
  RabiParams p = rabi(2.0, 0.05, 0.0, 0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(cat_energy_analytic(k, p), 0.1 * std::exp(-12.0) * std::cos(2.0 * pi * k / 3.0) - 8.0, 1e-15);
  }
}

TEST(CatEnergy, EdSplittingFollowsCosinePattern) {
  RabiParams p = rabi(2.0, 0.02, 0.4, 0);
  auto lv = rabi_lowest_levels(p, 1);
  ASSERT_EQ(lv.size(), 3u);
  std::array<double, 3> ed{}, an{};
  for (const auto& l : lv) {
    ed[l.charge] = l.energy;
    an[l.charge] = cat_energy_analytic(l.charge, p);
  }
  std::array<int, 3> ord{0, 1, 2};
  std::sort(ord.begin(), ord.end(), [&](int a, int b) { return an[a] < an[b]; });
  double r_ed = (ed[ord[2]] - ed[ord[1]]) / (ed[ord[1]] - ed[ord[0]]);
  double r_an = (an[ord[2]] - an[ord[1]]) / (an[ord[1]] - an[ord[0]]);
  EXPECT_NEAR(r_ed / r_an, 1.0, 0.1);
}

TEST(CatFidelity, ExtremeCoupling) {
  CatFidelityReport r = cat_fidelity(rabi(2.0, 0.02, 2.0 * pi / 3.0, 40));
  EXPECT_GE(r.min_fidelity(), 0.99);
  EXPECT_TRUE(r.one_per_charge);
  EXPECT_GE(r.subspace_overlap, 0.99);
  EXPECT_TRUE(r.warnings.empty());
  for (int k = 0; k < 3; ++k) EXPECT_EQ(r.charge[k], k);
}

TEST(CatFidelity, ZeroFieldSubspace) {
  CatFidelityReport r = cat_fidelity(rabi(2.0, 0.0, 0.0, 32));
  EXPECT_GE(r.subspace_overlap, 0.99);
}

TEST(CatFidelity, NoCouplingStrongField) {
  // lambda = 0 with B = Omega: a dressed level undercuts |0>|00> in the charge-0 sector.
  CatFidelityReport r = cat_fidelity(rabi(0.0, 1.0, 0.0, 8));
  EXPECT_LT(r.min_fidelity(), 0.1);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(CatAction, ExtremeCoupling) {
  CatActionReport r = cat_subspace_action(rabi(2.5, 0.0, 0.0, 50));
  ASSERT_EQ(r.ops.size(), 4u);
  for (const auto& o : r.ops) {
    EXPECT_LE(o.residual, 1e-3) << o.name;
    EXPECT_NEAR(o.swapped_residual, 2.5, 1e-3) << o.name;
  }
}

TEST(CatAction, AnnihilationExactOnIdealCats) {
  CatActionReport r = cat_subspace_action(rabi(1.0, 0.0, 0.0, 30));
  EXPECT_LE(r.ops[0].residual, 1e-10);
  EXPECT_LE(r.ops[1].residual, 1e-10);
  EXPECT_LE(r.ops[0].perp_norm, 1e-10);
  EXPECT_LE(r.ops[1].perp_norm, 1e-10);
}

TEST(CatAction, CreationLeavesSubspace) {
  CatActionReport r = cat_subspace_action(rabi(2.0, 0.0, 0.0, 40));
  EXPECT_NEAR(r.ops[2].perp_norm, 1.0, 1e-6);
  EXPECT_NEAR(r.ops[3].perp_norm, 1.0, 1e-6);
  EXPECT_EQ(r.ops[2].name, "a1_dag");
}

TEST(PottsFit, RecoversSyntheticLevels) {
  RabiChainParams ch;
  ch.site = rabi(2.0, 0.01, 0.0, 12);
  ch.J = 0.002;
  auto lv = free_potts_levels(3e-3, 0.0, 1.2e-2);
  for (double& e : lv) e += 5.0;
  lv.push_back(10.0);
  PottsFit f = fit_potts_levels(lv, ch);
  EXPECT_NEAR(f.fitted.f_P, 3e-3, 1e-9);
  EXPECT_NEAR(f.fitted.J_P, 1.2e-2, 1e-9);
  EXPECT_LE(f.deviation, 1e-6);
}

TEST(PottsFit, RegimeError) {
  RabiChainParams ch;
  ch.site = rabi(2.0, 0.01, 0.0, 12);
  auto lv = free_potts_levels(3e-3, 0.0, 1.2e-2);
  lv.push_back(lv.back() + 0.01);
  EXPECT_THROW(fit_potts_levels(lv, ch), RegimeError);
  lv.pop_back();
  EXPECT_THROW(fit_potts_levels(lv, ch), std::invalid_argument);
  ch.L = 3;
  EXPECT_THROW(fit_effective_potts(ch), std::invalid_argument);
}

TEST(PottsFit, DecoupledChain) {
  RabiChainParams ch;
  ch.site = rabi(1.5, 0.05, 0.0, 10);
  ch.J = 0.0;
  PottsFit f = fit_effective_potts(ch);
  EXPECT_LE(std::abs(f.fitted.J_P), 1e-6 * f.fitted.f_P);
  // Single-site splitting from ED: e_j - mean = 2 f cos(phi + 2 pi j / 3).
  auto lv = rabi_lowest_levels(ch.site, 1);
  double spread = lv.back().energy - lv.front().energy;
  EXPECT_NEAR(f.fitted.f_P, spread / 3.0, 1e-6 * spread);
  EXPECT_LE(f.deviation, 1e-6);
}

TEST(PottsFit, CoupledChainSmallCutoff) {
  RabiChainParams ch;
  ch.site = rabi(1.5, 0.05, 0.0, 10);
  ch.J = 0.002;
  PottsFit f = fit_effective_potts(ch);
  EXPECT_LE(f.deviation, 0.05);
  EXPECT_LE(f.J_relative_error, 0.15);
  EXPECT_LE(f.f_relative_error, 0.15);
  EXPECT_GT(f.gap_to_next, 3.0 * f.bandwidth);
}
