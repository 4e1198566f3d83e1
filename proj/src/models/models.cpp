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


#include "z3sim/models.hpp"

#include "z3sim/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace z3sim {
namespace {

using std::numbers::pi;

SparseMat to_sparse(const DenseMat& m) { return m.sparseView(1.0, kPruneTol); }

Matrix3c dense3(const SparseMat& m) { return Matrix3c(DenseMat(m)); }

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
}

double max_abs3(const Matrix3c& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

int default_cutoff(double alpha) { return 4 * static_cast<int>(std::ceil(alpha * alpha)) + 12; }

int RabiParams::resolved_cutoff() const { return cutoff > 0 ? cutoff : default_cutoff(alpha()); }

void RabiParams::validate() const {
  require_finite(omega_R, "omega_R");
  require_finite(B, "B");
  require_finite(phi, "phi");
  require_finite(lambda, "lambda");
  if (omega_R <= 0.0) throw std::invalid_argument("omega_R must be positive");
  if (cutoff < 0 || (cutoff > 0 && cutoff < 2)) throw std::invalid_argument("cutoff must be >= 2");
}

Matrix3c QBRingParams::default_interaction() {
  Matrix3c x = dense3(shift_matrix());
  return x + x.adjoint();
}

Matrix3c QBRingParams::optomechanical_interaction() {
  Matrix3c x = dense3(shift_matrix());
  const cplx i(0.0, 1.0);
  return -i * x + i * x.adjoint();
}

void QBRingParams::validate() const {
  require_finite(epsilon, "epsilon");
  require_finite(omega_QB, "omega_QB");
  require_finite(g, "g");
  require_finite(eta, "eta");
  if (omega_QB <= 0.0) throw std::invalid_argument("omega_QB must be positive");
  if (eta < 0.0) throw std::invalid_argument("eta must be non-negative");
  if (cutoff < 2) throw std::invalid_argument("cutoff must be >= 2");
  if (max_abs3(A - A.adjoint()) > kHermitianTol) throw std::invalid_argument("interaction matrix A must be Hermitian");
}

void PottsParams::validate() const {
  if (L < 1) throw std::invalid_argument("Potts chain needs L >= 1");
  require_finite(f_P, "f_P");
  require_finite(phi, "phi");
  require_finite(J_P, "J_P");
  require_finite(theta, "theta");
}

void RabiChainParams::validate() const {
  if (L < 1) throw std::invalid_argument("Rabi chain needs L >= 1");
  site.validate();
  require_finite(J, "J");
}

DisorderParams DisorderParams::sample_sigma_x(double sigma, std::uint64_t seed, std::uint64_t realization) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("disorder strength must be non-negative");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(realization), static_cast<std::uint32_t>(realization >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  DisorderParams d;
  d.kind = Kind::SigmaX;
  for (double& v : d.delta) v = sigma * normal(rng);
  return d;
}

void DisorderParams::validate() const {
  if (kind != Kind::SiteParams) return;
  auto sum = [](const std::array<double, 3>& a) { return a[0] + a[1] + a[2]; };
  if (std::abs(sum(d_epsilon)) > 1e-12 || std::abs(sum(d_omega)) > 1e-12 || std::abs(sum(d_g)) > 1e-12) {
    throw std::invalid_argument("site disorder must have zero spatial average");
  }
}

void CircuitParams::validate() const {
  for (double v : {L_B, C_B, C_Q, I_R}) {
    require_finite(v, "circuit value");
    if (v <= 0.0) throw std::invalid_argument("circuit values L_B, C_B, C_Q, I_R must be positive");
  }
  require_finite(n_off, "n_off");
  require_finite(C_P, "C_P");
  if (n_off < 0.0 || C_P < 0.0) throw std::invalid_argument("n_off and C_P must be non-negative");
}

SpaceLayout rabi_layout(int cutoff) {
  SpaceLayout l;
  l.add_qutrit("q").add_boson("a1", cutoff).add_boson("a2", cutoff);
  return l;
}

SpaceLayout qb_ring_layout(int cutoff) {
  SpaceLayout l;
  for (int j = 0; j < 3; ++j) l.add_qubit("s" + std::to_string(j));
  for (int j = 0; j < 3; ++j) l.add_boson("b" + std::to_string(j), cutoff);
  return l;
}

SpaceLayout potts_layout(int L) {
  SpaceLayout l;
  for (int m = 1; m <= L; ++m) l.add_qutrit("q" + std::to_string(m));
  return l;
}

SpaceLayout rabi_chain_layout(int L, int cutoff) {
  std::vector<Factor> f;
  for (int m = 1; m <= L; ++m) {
    std::string s = "m" + std::to_string(m) + ".";
    f.push_back({s + "q", FactorKind::Qutrit, 3});
    f.push_back({s + "a1", FactorKind::Boson, cutoff});
    f.push_back({s + "a2", FactorKind::Boson, cutoff});
  }
  return SpaceLayout(std::move(f));
}

Matrix3c magnetic_matrix(double B, double phi) {
  Matrix3c m = Matrix3c::Zero();
  for (int q = 0; q < 3; ++q) m(q, q) = 2.0 * B * std::cos(phi + 2.0 * pi * q / 3.0);
  return m;
}

namespace {

void add_rabi_site(TermSum& ts, const RabiParams& p, int cutoff, const std::string& prefix) {
  const std::string q = prefix + "q", a1 = prefix + "a1", a2 = prefix + "a2";
  SparseMat a = annihilation_matrix(cutoff);
  SparseMat ad = a.adjoint();
  SparseMat n = number_matrix(cutoff);
  SparseMat x = shift_matrix();
  SparseMat xd = x.adjoint();
  ts.add(p.omega_R, a1, n);
  ts.add(p.omega_R, a2, n);
  if (p.B != 0.0) ts.add(1.0, q, to_sparse(magnetic_matrix(p.B, p.phi)));
  if (p.lambda != 0.0) {
    ts.add(-p.lambda, {{a1, a}, {q, x}});
    ts.add(-p.lambda, {{a2, ad}, {q, x}});
    ts.add(-p.lambda, {{a1, ad}, {q, xd}});
    ts.add(-p.lambda, {{a2, a}, {q, xd}});
  }
}

}  // namespace

SparseOperator build_z3_rabi(const RabiParams& p) {
  p.validate();
  const int c = p.resolved_cutoff();
  TermSum ts(rabi_layout(c));
  add_rabi_site(ts, p, c, "");
  return ts.build(true);
}

int rabi_charge(std::span<const int> d) { return ((d[0] + d[1] - d[2]) % 3 + 3) % 3; }

SparseOperator symmetry_generator_rabi(int cutoff) {
  SpaceLayout l = rabi_layout(cutoff);
  SparseMat m(l.total_dim(), l.total_dim());
  m.reserve(Eigen::VectorXi::Constant(l.total_dim(), 1));
  std::vector<int> d(3);
  const cplx w[3] = {1.0, kOmega, kOmega * kOmega};
  for (std::int64_t s = 0; s < l.total_dim(); ++s) {
    l.decode(s, d);
    m.insert(s, s) = w[rabi_charge(d)];
  }
  return SparseOperator(l, std::move(m));
}

Sector rabi_charge_sector(int cutoff, int charge) {
  return Sector::where(rabi_layout(cutoff), [charge](std::span<const int> d) { return rabi_charge(d) == charge; });
}

SparseOperator build_potts(const PottsParams& p) {
  p.validate();
  SpaceLayout l = potts_layout(p.L);
  TermSum ts(l);
  SparseMat z = clock_matrix();
  SparseMat x = shift_matrix();
  SparseMat xd = x.adjoint();
  const cplx ef = std::polar(1.0, p.phi);
  const cplx et = std::polar(1.0, p.theta);
  for (int m = 1; m <= p.L; ++m) {
    std::string s = "q" + std::to_string(m);
    ts.add(p.f_P * ef, s, z);
    ts.add(p.f_P * std::conj(ef), s, SparseMat(z.adjoint()));
  }
  for (int m = 1; m < p.L; ++m) {
    std::string s = "q" + std::to_string(m), t = "q" + std::to_string(m + 1);
    ts.add(p.J_P * et, {{s, x}, {t, xd}});
    ts.add(p.J_P * std::conj(et), {{t, x}, {s, xd}});
  }
  return ts.build(true);
}

SparseOperator potts_charge_operator(int L) {
  SpaceLayout l = potts_layout(L);
  TermSum ts(l);
  std::vector<std::pair<std::string, SparseMat>> ops;
  for (int m = 1; m <= L; ++m) ops.emplace_back("q" + std::to_string(m), clock_matrix());
  ts.add(1.0, ops);
  return ts.build(false);
}

TermSum rabi_chain_terms(const RabiChainParams& p) {
  p.validate();
  const int c = p.site.resolved_cutoff();
  const double dim = std::pow(3.0 * c * c, p.L);
  if (dim > static_cast<double>(kChainDimLimit)) {
    throw DimensionError("Rabi chain dimension " + std::to_string(static_cast<long long>(dim)) +
                         " exceeds the limit " + std::to_string(kChainDimLimit));
  }
  TermSum ts(rabi_chain_layout(p.L, c));
  for (int m = 1; m <= p.L; ++m) add_rabi_site(ts, p.site, c, "m" + std::to_string(m) + ".");
  if (p.J != 0.0) {
    SparseMat a = annihilation_matrix(c);
    SparseMat ad = a.adjoint();
    for (int m = 1; m < p.L; ++m) {
      for (const char* k : {"a1", "a2"}) {
        std::string s = "m" + std::to_string(m) + "." + k;
        std::string t = "m" + std::to_string(m + 1) + "." + k;
        ts.add(p.J, {{s, ad}, {t, a}});
        ts.add(p.J, {{t, ad}, {s, a}});
      }
    }
  }
  return ts;
}

SparseOperator build_rabi_chain(const RabiChainParams& p) { return rabi_chain_terms(p).build(true); }

int chain_charge(std::span<const int> d) {
  int q = 0;
  for (std::size_t i = 0; i + 2 < d.size(); i += 3) q += d[i] + d[i + 1] - d[i + 2];
  return ((q % 3) + 3) % 3;
}

SparseOperator chain_symmetry_generator(int L, int cutoff) {
  SpaceLayout l = rabi_chain_layout(L, cutoff);
  SparseMat m(l.total_dim(), l.total_dim());
  m.reserve(Eigen::VectorXi::Constant(l.total_dim(), 1));
  std::vector<int> d(l.num_factors());
  const cplx w[3] = {1.0, kOmega, kOmega * kOmega};
  for (std::int64_t s = 0; s < l.total_dim(); ++s) {
    l.decode(s, d);
    m.insert(s, s) = w[chain_charge(d)];
  }
  return SparseOperator(l, std::move(m));
}

Sector chain_charge_sector(int L, int cutoff, int charge) {
  return Sector::where(rabi_chain_layout(L, cutoff),
                       [charge](std::span<const int> d) { return chain_charge(d) == charge; });
}

namespace {

Matrix2c qubit_matrix(const SparseMat& m) { return Matrix2c(DenseMat(m)); }

}  // namespace

std::vector<RingTerm> disordered_qb_ring_terms(const QBRingParams& p, const DisorderParams& d, int pad) {
  p.validate();
  d.validate();
  const int n = p.cutoff + pad;
  const Matrix2c sz = qubit_matrix(sigma_z_matrix());
  const Matrix2c sp = qubit_matrix(sigma_plus_matrix());
  const Matrix2c sm = qubit_matrix(sigma_minus_matrix());
  const Matrix2c sx = qubit_matrix(sigma_x_matrix());
  const Matrix2c up = qubit_matrix(projector_matrix(2, 0));
  const Matrix2c id2 = Matrix2c::Identity();
  const DenseMat num = DenseMat(number_matrix(n));
  const DenseMat e_plus = exp_i_hermitian(DenseMat(position_matrix(n, p.eta)), 1.0);
  const DenseMat e_minus = e_plus.adjoint();
  const bool site = d.kind == DisorderParams::Kind::SiteParams;

  std::vector<RingTerm> terms;
  for (int j = 0; j < 3; ++j) {
    double eps = p.epsilon + (site ? d.d_epsilon[j] : 0.0);
    double om = p.omega_QB + (site ? d.d_omega[j] : 0.0);
    if (eps != 0.0) terms.push_back({eps, {{j, sz, DenseMat()}}});
    terms.push_back({om, {{j, id2, num}}});
    if (!site && d.delta[j] != 0.0) terms.push_back({d.delta[j], {{j, sx, DenseMat()}}});
  }
  if (site) {
    for (int j = 0; j < 3; ++j) {
      int k = (j + 1) % 3;
      double gb = p.g + d.d_g[j];
      if (gb == 0.0) continue;
      terms.push_back({gb, {{j, sp, e_plus}, {k, sm, e_minus}}});
      terms.push_back({gb, {{j, sm, e_minus}, {k, sp, e_plus}}});
    }
    return terms;
  }
  if (p.g == 0.0) return terms;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      cplx a = p.A(j, k);
      if (std::abs(a) <= kPruneTol) continue;
      if (j == k) {
        terms.push_back({p.g * a, {{j, up, DenseMat()}}});
      } else {
        terms.push_back({p.g * a, {{j, sp, e_plus}, {k, sm, e_minus}}});
      }
    }
  }
  return terms;
}

std::vector<RingTerm> qb_ring_terms(const QBRingParams& p, int pad) {
  return disordered_qb_ring_terms(p, DisorderParams{}, pad);
}

TermSum ring_terms_to_sum(const std::vector<RingTerm>& terms, int cutoff) {
  TermSum ts(qb_ring_layout(cutoff));
  for (const auto& t : terms) {
    std::vector<std::pair<std::string, SparseMat>> ops;
    for (const auto& f : t.factors) {
      std::string j = std::to_string(f.site);
      ops.emplace_back("s" + j, to_sparse(f.qubit));
      if (f.boson.size() > 0) {
        if (f.boson.rows() < cutoff) throw std::invalid_argument("ring term boson factor smaller than cutoff");
        ops.emplace_back("b" + j, to_sparse(f.boson.topLeftCorner(cutoff, cutoff)));
      }
    }
    ts.add(t.coef, ops);
  }
  return ts;
}

SparseOperator build_qb_ring(const QBRingParams& p) { return ring_terms_to_sum(qb_ring_terms(p), p.cutoff).build(true); }

SparseOperator build_disordered_qb_ring(const QBRingParams& p, const DisorderParams& d) {
  return ring_terms_to_sum(disordered_qb_ring_terms(p, d), p.cutoff).build(true);
}

SparseOperator total_sz(int cutoff) {
  TermSum ts(qb_ring_layout(cutoff));
  for (int j = 0; j < 3; ++j) ts.add(1.0, "s" + std::to_string(j), sigma_z_matrix());
  return ts.build(true);
}

Sector single_excitation_sector(int cutoff) {
  return Sector::where(qb_ring_layout(cutoff), [](std::span<const int> d) {
    return (d[0] == 0) + (d[1] == 0) + (d[2] == 0) == 1;
  });
}

Matrix3c qutrit_fourier_unitary() {
  Matrix3c f;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) f(j, k) = std::pow(kOmega, j * k) / std::sqrt(3.0);
  }
  Matrix3c x = dense3(shift_matrix());
  return x.adjoint() * f.adjoint();
}

RabiMapping map_qb_to_rabi(const QBRingParams& p) {
  p.validate();
  Matrix3c x = dense3(shift_matrix());
  double cov = max_abs3(x.adjoint() * p.A * x - p.A);
  if (cov > 1e-10) {
    throw NotReducibleError("interaction matrix is not Z3 covariant, ||X^dag A X - A|| = " + std::to_string(cov), cov);
  }
  Matrix3c u = qutrit_fourier_unitary();
  Matrix3c m = p.g * (u * p.A * u.adjoint());
  Matrix3c off = m;
  off.diagonal().setZero();
  if (max_abs3(off) > 1e-10) throw NotReducibleError("reduced magnetic term is not diagonal", max_abs3(off));
  m = Matrix3c(m.diagonal().real().cast<cplx>().asDiagonal());

  RabiMapping out;
  out.magnetic = m;
  out.magnetic_shift = m.trace().real() / 3.0;
  cplx c1 = 0.0;
  for (int q = 0; q < 3; ++q) c1 += m(q, q) * std::pow(kOmega, -q);
  c1 /= 3.0;
  out.phase_determined = std::abs(c1) > 1e-14;
  out.rabi.omega_R = p.omega_QB;
  out.rabi.B = out.phase_determined ? std::abs(c1) : 0.0;
  out.rabi.phi = out.phase_determined ? std::arg(c1) : 0.0;
  out.rabi.lambda = p.eta * p.omega_QB / std::sqrt(6.0);
  out.rabi.cutoff = p.cutoff;
  out.constant_offset = -p.epsilon + p.eta * p.eta * p.omega_QB / 3.0 + out.magnetic_shift;
  return out;
}

double circuit_energy_unit(const CircuitParams& c) {
  c.validate();
  return si::hbar / std::sqrt(c.L_B * c.C_B);
}

QBRingParams map_circuit_to_qb(const CircuitParams& c) {
  const double unit = circuit_energy_unit(c);
  QBRingParams p;
  p.epsilon = 4.0 * si::e * si::e * c.n_off / c.C_Q / unit;
  p.omega_QB = 1.0;
  p.eta = std::sqrt(4.0 * si::e * si::e / si::hbar) * std::pow(c.L_B / c.C_B, 0.25);
  p.g = si::phi0 * c.I_R / (4.0 * pi) / unit;
  return p;
}

PottsMapping map_chain_to_potts(const RabiChainParams& p) {
  p.validate();
  const double alpha = p.site.alpha();
  PottsMapping out;
  out.potts.L = p.L;
  out.potts.f_P = p.site.B * std::exp(-3.0 * alpha * alpha);
  out.potts.phi = p.site.phi;
  out.potts.J_P = 2.0 * alpha * alpha * p.J;
  out.regime.push_back({"extreme_coupling", alpha, kExtremeCouplingThreshold, alpha >= kExtremeCouplingThreshold});
  if (alpha < kExtremeCouplingThreshold) {
    out.warnings.push_back("lambda/omega_R = " + std::to_string(alpha) + " is below the extreme-coupling threshold " +
                           std::to_string(kExtremeCouplingThreshold));
  }
  return out;
}

PottsParams potts_from_qb(const QBRingParams& p, double J, int L) {
  PottsParams out;
  out.L = L;
  out.f_P = p.g * std::exp(-0.5 * p.eta * p.eta);
  out.phi = 2.0 * pi / 3.0;
  out.J_P = p.eta * p.eta * J / 3.0;
  return out;
}

PottsMapping map_circuit_to_potts(const CircuitParams& c, int L) {
  QBRingParams qb = map_circuit_to_qb(c);
  const double unit = circuit_energy_unit(c);
  PottsMapping out;
  out.potts.L = L;
  out.potts.f_P = qb.g * std::exp(-(2.0 * si::e * si::e / si::hbar) * std::sqrt(c.L_B / c.C_B));
  out.potts.phi = 2.0 * pi / 3.0;
  out.potts.J_P = si::e * si::e * c.C_P / (3.0 * c.C_B * c.C_B) / unit;
  double coupling = qb.eta / std::sqrt(6.0);
  out.regime.push_back({"extreme_coupling", coupling, kExtremeCouplingThreshold, coupling >= kExtremeCouplingThreshold});
  out.regime.push_back({"weak_potts_coupling", out.potts.J_P, 0.1, out.potts.J_P <= 0.1});
  double ratio = c.C_P / c.C_B;
  out.regime.push_back({"small_coupling_capacitance", ratio, 0.1, ratio <= 0.1});
  for (const auto& f : out.regime) {
    if (!f.satisfied) out.warnings.push_back("regime condition '" + f.name + "' violated");
  }
  if (c.n_off > 0.1) out.warnings.push_back("n_off = " + std::to_string(c.n_off) + " is not small");
  return out;
}

CovarianceCheck z3_covariance_check(const Matrix3c& m) {
  Matrix3c z = dense3(clock_matrix());
  Matrix3c zm = z * m * z.adjoint();
  CovarianceCheck out{false, INFINITY, 0};
  for (int q = 0; q < 3; ++q) {
    double r = max_abs3(zm - std::pow(kOmega, q) * m);
    if (r < out.residual) {
      out.residual = r;
      out.phase_power = q;
    }
  }
  out.covariant = out.residual <= 1e-10;
  return out;
}

Matrix3c spin1_sx() {
  Matrix3c s = Matrix3c::Zero();
  s(0, 1) = s(1, 0) = s(1, 2) = s(2, 1) = 1.0 / std::sqrt(2.0);
  return s;
}

Matrix3c truncated_anharmonic_coordinate() { return dense3(position_matrix(3, 1.0)); }

}  // namespace z3sim
