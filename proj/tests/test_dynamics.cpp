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
#include <sstream>

#include "z3sim/dynamics.hpp"
#include "z3sim/errors.hpp"

using namespace z3sim;

namespace {

QBRingParams small_ring(int cutoff) {
  QBRingParams p = disorder_baseline();
  p.cutoff = cutoff;
  return p;
}

}  // namespace

TEST(Evolve, DiagonalPhases) {
  DenseMat d = DenseMat::Zero(3, 3);
  d.diagonal() << 0.5, -1.0, 2.0;
  SparseOperator h = SparseOperator::from_dense(SpaceLayout::qutrit(), d, true);
  DenseVec a(3);
  a << 0.6, cplx(0.0, 0.64), 0.48;
  StateVector psi(SpaceLayout::qutrit(), a);
  SparseOperator z(SpaceLayout::qutrit(), projector_matrix(3, 1), true);
  StateVector fin;
  Trajectory tr = evolve(h, psi, uniform_grid(3.0, 31), {{"p1", z}}, {}, &fin);
  for (const auto& v : tr.series("p1")) EXPECT_NEAR(v.real(), 0.4096, 1e-12);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(std::abs(fin.amplitudes()(j) - a(j) * std::polar(1.0, -d(j, j).real() * 3.0)), 0.0, 1e-10);
  }
}

TEST(Evolve, CoherentStateOscillates) {
  const int c = 30;
  const double eta = 0.8, omega = 1.3;
  const cplx alpha = std::polar(1.2, 0.3);
  SpaceLayout l = SpaceLayout::boson(c, "b");
  SparseOperator h(l, omega * number_matrix(c), true);
  SparseOperator x(l, position_matrix(c, eta), true);
  StateVector psi(l, coherent_amplitudes(alpha, c));
  Trajectory tr = evolve(h, psi, uniform_grid(10.0, 101), {{"x", x}});
  auto xs = tr.real_series("x");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double want = std::sqrt(2.0) * eta * std::abs(alpha) * std::cos(omega * tr.times[i] - std::arg(alpha));
    EXPECT_NEAR(xs[i], want, 1e-6);
  }
  EXPECT_EQ(tr.method, "krylov");
}

TEST(Evolve, MatchesDenseExponential) {
  QBRingParams p = small_ring(4);
  DisorderParams d = DisorderParams::sample_sigma_x(0.5, 3, 0);
  SparseOperator h = build_disordered_qb_ring(p, d);
  StateVector psi = disorder_initial_state(4);
  StateVector fin;
  evolve(h, psi, {0.0, 7.5}, {}, {}, &fin);
  DenseVec exact = exp_i_hermitian(h.dense(), -7.5) * psi.amplitudes();
  EXPECT_LE((fin.amplitudes() - exact).norm(), 1e-9);
}

TEST(Evolve, EnergyAndNormConserved) {
  QBRingParams p = small_ring(5);
  SparseOperator h = build_disordered_qb_ring(p, DisorderParams::sample_sigma_x(0.3, 1, 0));
  Trajectory tr = evolve(h, disorder_initial_state(5), uniform_grid(20.0, 81), {{"H", h}});
  const auto& e = tr.series("H");
  for (const auto& v : e) EXPECT_NEAR(v.real(), e[0].real(), 1e-8);
  EXPECT_LE(tr.max_norm_drift, 1e-8);
}

TEST(Evolve, SubstepHalvingIsStable) {
  QBRingParams p = small_ring(5);
  SparseOperator h = build_disordered_qb_ring(p, DisorderParams::sample_sigma_x(1.0, 9, 2));
  std::vector<Observable> obs{{"Sz", total_sz(5)}};
  EvolveOptions a, b;
  a.max_substep = 0.1;
  b.max_substep = 0.05;
  auto ta = evolve(h, disorder_initial_state(5), uniform_grid(10.0, 51), obs, a);
  auto tb = evolve(h, disorder_initial_state(5), uniform_grid(10.0, 51), obs, b);
  EXPECT_GT(tb.substeps, ta.substeps);
  for (std::size_t i = 0; i < ta.times.size(); ++i) {
    EXPECT_NEAR(ta.series("Sz")[i].real(), tb.series("Sz")[i].real(), 1e-7);
  }
}

TEST(Evolve, DenseFallback) {
  QBRingParams p = small_ring(3);
  SparseOperator h = build_disordered_qb_ring(p, DisorderParams::sample_sigma_x(0.5, 4, 0));
  EvolveOptions bad;
  bad.krylov_dim = 2;
  bad.step_tol = 0.0;
  StateVector fin;
  Trajectory tr = evolve(h, disorder_initial_state(3), {0.0, 2.0}, {}, bad, &fin);
  EXPECT_EQ(tr.method, "dense");
  DenseVec exact = exp_i_hermitian(h.dense(), -2.0) * disorder_initial_state(3).amplitudes();
  EXPECT_LE((fin.amplitudes() - exact).norm(), 1e-9);
}

TEST(Evolve, FailureAboveDenseLimit) {
  QBRingParams p = small_ring(8);
  SparseOperator h = build_disordered_qb_ring(p, DisorderParams::sample_sigma_x(0.5, 4, 0));
  EvolveOptions bad;
  bad.krylov_dim = 2;
  bad.step_tol = 0.0;
  EXPECT_THROW(evolve(h, disorder_initial_state(8), {0.0, 1.0}, {}, bad), ConvergenceError);
}

TEST(Evolve, RejectsBadInput) {
  SparseOperator h(SpaceLayout::qutrit(), identity_matrix(3), true);
  StateVector psi = StateVector::basis(SpaceLayout::qutrit(), std::vector<int>{0});
  EXPECT_THROW(evolve(h, psi, {1.0, 0.5}, {}), std::invalid_argument);
  EXPECT_THROW(evolve(h, psi, {-1.0}, {}), std::invalid_argument);
  StateVector twice(SpaceLayout::qutrit(), 2.0 * psi.amplitudes());
  EXPECT_THROW(evolve(h, twice, {0.0}, {}), std::invalid_argument);
  SparseOperator nh(SpaceLayout::qutrit(), shift_matrix(), false);
  EXPECT_THROW(evolve(nh, psi, {0.0}, {}), std::invalid_argument);
}

TEST(DisorderExperiment, CleanRingConservesSz) {
  DisorderEnsemble e = disorder_sz_experiment(disorder_baseline(), 0.0, 2, 11, 20.0, 101);
  EXPECT_EQ(e.failures, 0);
  for (const auto& r : e.realizations) {
    for (const auto& v : r.trajectory.series("Sz")) EXPECT_NEAR(v.real(), -1.0, 1e-10);
  }
  EXPECT_LE(e.max_mean_deviation, 1e-10);
}

TEST(DisorderExperiment, Determinism) {
  QBRingParams p = small_ring(5);
  auto a = disorder_sz_experiment(p, 0.3, 3, 42, 5.0, 26);
  auto b = disorder_sz_experiment(p, 0.3, 3, 42, 5.0, 26);
  for (int r = 0; r < 3; ++r) {
    EXPECT_EQ(a.realizations[r].disorder.delta, b.realizations[r].disorder.delta);
    EXPECT_EQ(a.realizations[r].trajectory.values, b.realizations[r].trajectory.values);
  }
  auto c = disorder_sz_experiment(p, 0.3, 3, 43, 5.0, 26);
  EXPECT_NE(a.realizations[0].disorder.delta, c.realizations[0].disorder.delta);
}

TEST(DisorderExperiment, CsvShapeAndSummary) {
  QBRingParams p = small_ring(4);
  auto e = disorder_sz_experiment(p, 0.1, 4, 1, 2.0, 11);
  std::ostringstream os;
  e.write_csv(os);
  std::string csv = os.str();
  EXPECT_EQ(csv.rfind("t,realization_id,Sz\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 11);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  auto s = e.summary();
  EXPECT_EQ(s["n_realizations"], 4);
  EXPECT_EQ(s["realizations"].size(), 4u);
  EXPECT_EQ(e.mean.size(), 11u);
  for (std::size_t i = 0; i < e.mean.size(); ++i) {
    EXPECT_LE(e.min[i], e.mean[i] + 1e-15);
    EXPECT_GE(e.max[i], e.mean[i] - 1e-15);
    EXPECT_LE(std::abs(e.mean[i]), 3.0);
  }
}

TEST(DisorderExperiment, LargeZeemanGapStaysNearSector) {
  QBRingParams p = small_ring(6);
  p.epsilon = 5.0;
  auto e = disorder_sz_experiment(p, 0.1, 4, 2024, 50.0, 500);
  EXPECT_EQ(e.failures, 0);
  for (double m : e.mean) EXPECT_LE(std::abs(m + 1.0), 0.1);
}

TEST(DisorderExperiment, ResponseGrowsWithStrength) {
  QBRingParams p = small_ring(6);
  double prev = -1.0;
  for (double s : {0.1, 0.3, 1.0}) {
    auto e = disorder_sz_experiment(p, s, 6, 7, 20.0, 201);
    EXPECT_GE(e.mean_max_deviation, prev) << s;
    prev = e.mean_max_deviation;
  }
}
