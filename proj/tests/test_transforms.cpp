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

#include <cmath>
#include <numbers>

#include "z3sim/eigensolver.hpp"
#include "z3sim/transforms.hpp"

using namespace z3sim;
using std::numbers::pi;

namespace {

QBRingParams ring_params(int cutoff) {
  QBRingParams p;
  p.epsilon = 0.2;
  p.omega_QB = 1.0;
  p.g = 0.3;
  p.eta = 1.0;
  p.cutoff = cutoff;
  return p;
}

std::vector<double> lowest(const SparseMat& h, int k) {
  EigenPairs e = dense_eigh(DenseMat(h), k, false);
  return std::vector<double>(e.values.data(), e.values.data() + k);
}

SpaceLayout three_modes(int c) {
  SpaceLayout l;
  l.add_boson("b0", c).add_boson("b1", c).add_boson("b2", c);
  return l;
}

std::vector<char> total_at_most(const SpaceLayout& l, const std::vector<std::size_t>& f, int limit) {
  std::vector<char> keep(l.total_dim());
  for (std::int64_t s = 0; s < l.total_dim(); ++s) {
    std::vector<int> d = l.decode(s);
    int t = 0;
    for (std::size_t i : f) t += d[i];
    keep[s] = t <= limit;
  }
  return keep;
}

double masked(const SparseMat& a, const SparseMat& b, const std::vector<char>& rows, const std::vector<char>& cols) {
  DenseMat d = DenseMat(a) - DenseMat(b);
  double m = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      if (rows[i] && cols[j]) m = std::max(m, std::abs(d(i, j)));
  return m;
}

}  // namespace

TEST(Translation, UnitaryIsUnitary) {
  SparseOperator s = momentum_translation_unitary(qb_ring_layout(5), 1.3);
  EXPECT_LT(max_abs_diff(s * adjoint(s), SparseOperator::identity(s.layout())), 1e-10);
  DenseMat site = site_translation(9, 0.7);
  EXPECT_LT((site * site.adjoint() - DenseMat::Identity(18, 18)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(momentum_translation_unitary(rabi_layout(5), 1.0), std::invalid_argument);
}

TEST(Translation, SiteConjugationMatchesProduct) {
  QBRingParams p = ring_params(4);
  SparseOperator h = build_qb_ring(p);
  SparseOperator s = momentum_translation_unitary(h.layout(), p.eta);
  SparseOperator literal = adjoint(s) * h * s;
  SparseMat sites = ring_terms_to_sum(conjugate_ring_terms(qb_ring_terms(p), p.eta, p.cutoff), p.cutoff).assemble();
  EXPECT_LT(max_abs(SparseMat(literal.matrix() - sites)), 1e-12);
}

TEST(Translation, RemovesExponentials) {
  QBRingParams p = ring_params(12);
  SparseMat h1 = ring_terms_to_sum(translate_ring_terms(qb_ring_terms(p), p.eta), 12).assemble();
  EXPECT_LE(max_abs(SparseMat(h1 - translated_ring_direct(p).matrix())), 1e-8);
}

TEST(Translation, SpectrumInvariant) {
  QBRingParams p = ring_params(6);
  SparseMat h = build_qb_ring(p).matrix();
  SparseMat h1 = ring_terms_to_sum(conjugate_ring_terms(qb_ring_terms(p), p.eta, 6), 6).assemble();
  std::vector<double> a = lowest(h, 20), b = lowest(h1, 20);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(Fourier, LadderOperatorsTransform) {
  const int c = 6;
  SpaceLayout l = three_modes(c);
  SparseMat g = fourier_ring_unitary(l).matrix();
  Matrix3c m = ring_fourier_matrix();
  std::vector<char> rows = total_at_most(l, {0, 1, 2}, c - 1), cols = total_at_most(l, {0, 1, 2}, c - 1);
  for (int j = 0; j < 3; ++j) {
    SparseMat bj = embed(annihilation_matrix(c), "b" + std::to_string(j), l).matrix();
    SparseMat want(l.total_dim(), l.total_dim());
    for (int k = 0; k < 3; ++k) want += m(j, k) * embed(annihilation_matrix(c), "b" + std::to_string(k), l).matrix();
    EXPECT_LT(masked(SparseMat(g.adjoint()) * bj * g, want, rows, cols), 1e-12);
  }
}

TEST(Fourier, UnitaryAndInverse) {
  SpaceLayout l = three_modes(7);
  SparseOperator g = fourier_ring_unitary(l);
  SparseOperator gi = fourier_ring_unitary(l, true);
  SparseOperator id = SparseOperator::identity(l);
  EXPECT_LT(max_abs_diff(adjoint(g) * g, id), 1e-12);
  EXPECT_LT(max_abs_diff(gi * g, id), 1e-10);
  EXPECT_LT(max_abs_diff(g * gi, id), 1e-10);
}

TEST(Fourier, TotalNumberInvariant) {
  SpaceLayout l = three_modes(6);
  SparseOperator g = fourier_ring_unitary(l);
  TermSum ts(l);
  for (const char* b : {"b0", "b1", "b2"}) ts.add(1.0, b, number_matrix(6));
  SparseOperator n = ts.build(true);
  EXPECT_LT(max_abs_diff(adjoint(g) * n * g, n), 1e-12);
}

TEST(Fourier, HoppingKeepsItsForm) {
  const int c = 4;
  SpaceLayout l;
  for (int m = 1; m <= 2; ++m)
    for (int j = 0; j < 3; ++j) l.add_boson("m" + std::to_string(m) + ".b" + std::to_string(j), c);
  SparseMat a = annihilation_matrix(c);
  SparseMat ad = a.adjoint();
  TermSum hop(l);
  for (int j = 0; j < 3; ++j) {
    std::string s = "m1.b" + std::to_string(j), t = "m2.b" + std::to_string(j);
    hop.add(1.0, {{s, ad}, {t, a}});
    hop.add(1.0, {{t, ad}, {s, a}});
  }
  SparseOperator h = hop.build(true);
  SparseOperator g = fourier_ring_unitary(l, false, {"m1.b0", "m1.b1", "m1.b2"}) *
                     fourier_ring_unitary(l, false, {"m2.b0", "m2.b1", "m2.b2"});
  SparseOperator hk = adjoint(g) * h * g;
  std::vector<char> keep(l.total_dim());
  for (std::int64_t s = 0; s < l.total_dim(); ++s) {
    std::vector<int> d = l.decode(s);
    keep[s] = d[0] + d[1] + d[2] <= c - 2 && d[3] + d[4] + d[5] <= c - 2;
  }
  EXPECT_LT(masked(hk.matrix(), h.matrix(), keep, keep), 1e-10);
}

TEST(Fourier, MomentumFormOfTranslatedRing) {
  QBRingParams p = ring_params(5);
  SpaceLayout l = qb_ring_layout(5);
  SparseMat h1 = translated_ring_direct(p).matrix();
  SparseMat g = fourier_ring_unitary(l).matrix();
  std::vector<char> keep = total_at_most(l, {3, 4, 5}, 3);
  EXPECT_LT(masked(SparseMat(g.adjoint()) * h1 * g, momentum_ring_direct(p).matrix(), keep, keep), 1e-12);
}

TEST(Isometry, SingleExcitationSector) {
  QBRingParams p = ring_params(4);
  SpaceLayout l = qb_ring_layout(4);
  Isometry iso = single_excitation_isometry(l);
  EXPECT_EQ(iso.sector_layout.total_dim(), 3 * 64);
  EXPECT_EQ(iso.sector_layout.factor(0).label, "q");
  SparseMat vtv = SparseMat(iso.V.adjoint()) * iso.V;
  EXPECT_LT((DenseMat(vtv) - DenseMat::Identity(192, 192)).cwiseAbs().maxCoeff(), 1e-12);
  SparseMat sz = SparseMat(iso.V.adjoint()) * total_sz(4).matrix() * iso.V;
  EXPECT_LT((DenseMat(sz) + DenseMat::Identity(192, 192)).cwiseAbs().maxCoeff(), 1e-12);
  // |q = 1> is |down up down>.
  std::vector<int> digits{1, 0, 0, 0};
  std::vector<int> full{1, 0, 1, 0, 0, 0};
  EXPECT_EQ(iso.V.coeff(l.encode(full), iso.sector_layout.encode(digits)), cplx(1.0));
  SparseMat proj = iso.V * SparseMat(iso.V.adjoint());
  SparseMat h = build_qb_ring(p).matrix();
  EXPECT_LT(max_abs(SparseMat(proj * h - h * proj)), 1e-11);
}

TEST(Reduction, StagesAndParameters) {
  QBRingParams p = ring_params(10);
  ReductionOptions o;
  o.cutoff_check = false;
  o.levels = 8;
  Reduction r = reduce_qb_to_rabi(p, o);
  const MappingReport& rep = r.report;
  ASSERT_EQ(rep.stages.size(), 5u);
  EXPECT_LE(rep.max_unitarity_residual(), 1e-10);
  for (const auto& s : rep.stages) EXPECT_LT(s.form_residual, 1e-10) << s.name;
  EXPECT_LT(rep.parameter_deviation, 1e-10);
  EXPECT_NEAR(rep.extracted.lambda, 1.0 / std::sqrt(6.0), 1e-10);
  EXPECT_NEAR(rep.extracted.B, 0.3, 1e-10);
  EXPECT_NEAR(rep.extracted.phi, 2 * pi / 3, 1e-10);
  EXPECT_NEAR(rep.translation_constant, 0.375, 1e-15);
  EXPECT_NEAR(rep.translation_constant_reference, 0.75, 1e-15);
  EXPECT_NEAR(rep.constant_offset, -0.2 + 1.0 / 3.0, 1e-10);
  EXPECT_LT(rep.spectral_deviation, 1e-7);
  EXPECT_EQ(r.rabi.layout(), rabi_layout(10));
  nlohmann::json j = rep.to_json();
  EXPECT_EQ(j["stages"].size(), 5u);
  EXPECT_EQ(j["stages"][3]["name"], "k0_boost");
}

TEST(Reduction, DecoupledLimitIsFreeBosons) {
  QBRingParams p = ring_params(10);
  p.g = 0.0;
  p.eta = 0.0;
  p.epsilon = 0.0;
  ReductionOptions o;
  o.cutoff_check = false;
  o.levels = 6;
  Reduction r = reduce_qb_to_rabi(p, o);
  EXPECT_EQ(r.report.extracted.B, 0.0);
  EXPECT_NEAR(r.report.extracted.lambda, 0.0, 1e-14);
  std::vector<double> e = lowest(r.rabi.matrix(), 9);
  // 3 qutrit states times {0, 1, 1, ...}
  std::vector<double> want{0, 0, 0, 1, 1, 1, 1, 1, 1};
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(e[i], want[i], 1e-12);
}

TEST(Reduction, OptomechanicalInteraction) {
  QBRingParams p = ring_params(10);
  p.A = QBRingParams::optomechanical_interaction();
  p.g = -0.2;
  ReductionOptions o;
  o.cutoff_check = false;
  o.levels = 6;
  Reduction r = reduce_qb_to_rabi(p, o);
  EXPECT_LT(r.report.parameter_deviation, 1e-10);
  EXPECT_LT(r.report.spectral_deviation, 1e-7);
}

TEST(Reduction, ParametersOnly) {
  ReductionOptions o;
  o.cutoff_check = false;
  o.levels = 0;
  Reduction r = reduce_qb_to_rabi(ring_params(10), o);
  EXPECT_LT(r.report.parameter_deviation, 1e-10);
  EXPECT_TRUE(r.report.sector_levels.empty());
  EXPECT_EQ(r.report.spectral_deviation, 0.0);
  o.levels = -1;
  EXPECT_THROW(reduce_qb_to_rabi(ring_params(10), o), std::invalid_argument);
}

TEST(Reduction, ReducedLevelsLadder) {
  RabiParams r{1.0, 0.0, 0.0, 0.0, 4};
  std::vector<double> lv = reduced_levels(r, 0.5, 4, 6);
  std::vector<double> want{0.5, 0.5, 0.5, 1.5, 1.5, 1.5};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(lv[i], want[i], 1e-12);
}

TEST(Parafermion, Definitions) {
  ParafermionOps ops = fk_transform(3);
  SpaceLayout l = potts_layout(3);
  EXPECT_LT(max_abs_diff(ops.gamma[0], embed(shift_matrix(), "q1", l)), 1e-15);
  SparseOperator z1 = embed(clock_matrix(), "q1", l);
  SparseOperator zx2 = embed(SparseMat(clock_matrix() * shift_matrix()), "q2", l);
  EXPECT_LT(max_abs_diff(ops.delta[1], z1 * zx2), 1e-15);
  EXPECT_THROW(fk_transform(9), std::invalid_argument);
  EXPECT_THROW(fk_transform(0), std::invalid_argument);
}

TEST(Parafermion, Relations) {
  for (int L : {1, 2, 3, 4}) {
    ParafermionRelations r = check_parafermion_relations(fk_transform(L));
    EXPECT_LT(r.max(), 1e-12) << "L=" << L;
  }
}

TEST(Parafermion, SameSiteOrderingIsNotCommuting) {
  ParafermionOps ops = fk_transform(2);
  // Gamma_m Delta_m = w^{-1} Delta_m Gamma_m; sgn(0) = 0 would claim they commute.
  EXPECT_GT(max_abs(ops.gamma[0] * ops.delta[0] - ops.delta[0] * ops.gamma[0]), 1.0);
  EXPECT_LT(max_abs(ops.gamma[0] * ops.delta[0] - std::conj(kOmega) * (ops.delta[0] * ops.gamma[0])), 1e-12);
}

TEST(Parafermion, ChainFormAgainstClockModel) {
  PottsParams p{3, 1.0, 0.3, 0.7, 0.2};
  ParafermionFormCheck c = verify_parafermion_form(p);
  // Literal operator identity fails; the chain equals the clock model with
  // phi -> -phi and theta -> theta + 2 pi / 3, and the spectra coincide.
  EXPECT_GT(c.residual, 1.0);
  EXPECT_LT(c.relabeled_residual, 1e-12);
  EXPECT_LT(c.spectral_residual, 1e-12);

  ParafermionFormCheck one = verify_parafermion_form(PottsParams{1, 1.0, 0.3, 0.0, 0.0});
  EXPECT_LT(one.relabeled_residual, 1e-12);
  EXPECT_LT(one.spectral_residual, 1e-12);
  ParafermionFormCheck plain = verify_parafermion_form(PottsParams{3, 1.0, 0.0, 0.7, 0.0});
  EXPECT_GT(plain.residual, 0.5);
  EXPECT_LT(plain.relabeled_residual, 1e-12);
  EXPECT_THROW(verify_parafermion_form(PottsParams{7, 1.0, 0.0, 1.0, 0.0}), std::invalid_argument);
}

TEST(Parafermion, SingleSiteOnlyOnSiteTerm) {
  ParafermionOps ops = fk_transform(1);
  SparseOperator h = parafermion_chain(ops, PottsParams{1, 1.0, 0.0, 5.0, 0.4});
  EXPECT_LT(max_abs_diff(h, build_potts(PottsParams{1, 1.0, 0.0, 0.0, 0.0})), 1e-12);
}
