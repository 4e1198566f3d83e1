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


#include "z3sim/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "z3sim/eigensolver.hpp"
#include "z3sim/errors.hpp"

namespace z3sim {
namespace {

using std::numbers::pi;

SparseMat to_sparse(const DenseMat& m) { return m.sparseView(1.0, kPruneTol); }

// eta * p = i (b^dag - b) / sqrt 2, finite at eta = 0.
SparseMat scaled_momentum(int cutoff) {
  SparseMat a = annihilation_matrix(cutoff);
  SparseMat ad = a.adjoint();
  return SparseMat(cplx(0.0, 1.0 / std::sqrt(2.0)) * (ad - a));
}

double identity_residual(const DenseMat& u) {
  return (u.adjoint() * u - DenseMat::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

double identity_residual(const SparseMat& u) {
  SparseMat d = SparseMat(u.adjoint()) * u;
  SparseMat id(d.rows(), d.cols());
  id.setIdentity();
  return max_abs(SparseMat(d - id));
}

// left * h * right with products pruned at kPruneTol.
SparseMat sandwich(const SparseMat& left, const SparseMat& h, const SparseMat& right) {
  SparseMat t = (left * h).pruned(1.0, kPruneTol);
  return (t * right).pruned(1.0, kPruneTol);
}

// Max |a_ij - b_ij| over rows and columns with keep(index) true.
double masked_max_diff(const SparseMat& a, const SparseMat& b, const std::vector<char>& keep) {
  SparseMat d = a - b;
  double m = 0.0;
  for (int k = 0; k < d.outerSize(); ++k) {
    if (!keep[k]) continue;
    for (SparseMat::InnerIterator it(d, k); it; ++it) {
      if (keep[it.row()]) m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

std::vector<char> mask(const SpaceLayout& l, const std::function<bool(std::span<const int>)>& keep) {
  std::vector<char> out(l.total_dim());
  std::vector<int> d(l.num_factors());
  for (std::int64_t s = 0; s < l.total_dim(); ++s) {
    l.decode(s, d);
    out[s] = keep(d);
  }
  return out;
}

// Conjugates each site factor by exp(i sigma^z x / 2) on `dim` levels and
// splits it into |s><s'| (x) boson blocks.
std::vector<RingTerm> conjugate_terms(const std::vector<RingTerm>& terms, double eta, int dim) {
  const DenseMat x = DenseMat(position_matrix(dim, eta));
  const DenseMat ep = exp_i_hermitian(x, 0.5);
  const std::array<DenseMat, 2> e{ep, ep.adjoint()};  // index 0 is spin up
  const DenseMat id = DenseMat::Identity(dim, dim);

  std::vector<RingTerm> out;
  for (const auto& t : terms) {
    std::vector<std::vector<SiteFactor>> options;
    for (const auto& f : t.factors) {
      const bool ident = f.boson.size() == 0;
      if (!ident && f.boson.rows() < dim) throw std::invalid_argument("boson factor smaller than conjugation space");
      DenseMat b = ident ? id : DenseMat(f.boson.topLeftCorner(dim, dim));
      std::vector<SiteFactor> opts;
      for (int s = 0; s < 2; ++s) {
        for (int r = 0; r < 2; ++r) {
          if (f.qubit(s, r) == cplx(0.0)) continue;
          Matrix2c q = Matrix2c::Zero();
          q(s, r) = f.qubit(s, r);
          DenseMat blk = (ident && s == r) ? DenseMat() : DenseMat(e[s].adjoint() * b * e[r]);
          opts.push_back({f.site, q, blk});
        }
      }
      options.push_back(std::move(opts));
    }
    std::vector<std::size_t> pick(options.size(), 0);
    while (true) {
      RingTerm nt{t.coef, {}};
      for (std::size_t i = 0; i < options.size(); ++i) nt.factors.push_back(options[i][pick[i]]);
      out.push_back(std::move(nt));
      std::size_t i = 0;
      for (; i < options.size(); ++i) {
        if (++pick[i] < options[i].size()) break;
        pick[i] = 0;
      }
      if (i == options.size()) break;
    }
  }
  return out;
}

int padded_dim(const std::vector<RingTerm>& terms) {
  for (const auto& t : terms)
    for (const auto& f : t.factors)
      if (f.boson.size() > 0) return static_cast<int>(f.boson.rows());
  throw std::invalid_argument("ring terms carry no boson factor");
}

void add_ring_common(TermSum& ts, const QBRingParams& p) {
  for (int j = 0; j < 3; ++j) {
    std::string s = "s" + std::to_string(j);
    if (p.epsilon != 0.0) ts.add(p.epsilon, s, sigma_z_matrix());
  }
  if (p.g == 0.0) return;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      cplx a = p.g * p.A(j, k);
      if (std::abs(a) <= kPruneTol) continue;
      std::string sj = "s" + std::to_string(j), sk = "s" + std::to_string(k);
      if (j == k) {
        ts.add(a, sj, projector_matrix(2, 0));
      } else {
        ts.add(a, {{sj, sigma_plus_matrix()}, {sk, sigma_minus_matrix()}});
      }
    }
  }
}

double translation_constant(const QBRingParams& p) { return 3.0 * p.eta * p.eta * p.omega_QB / 8.0; }
double boost_constant(const QBRingParams& p) { return -p.eta * p.eta * p.omega_QB / 24.0; }

SpaceLayout sector_layout(int cutoff) {
  SpaceLayout l;
  l.add_qutrit("q").add_boson("b0", cutoff).add_boson("b1", cutoff).add_boson("b2", cutoff);
  return l;
}

void add_sector_common(TermSum& ts, const QBRingParams& p) {
  const int c = p.cutoff;
  const double eo = p.eta * p.omega_QB;
  SparseMat a = annihilation_matrix(c);
  SparseMat ad = a.adjoint();
  SparseMat z = clock_matrix();
  SparseMat z2 = z * z;
  const cplx ic(0.0, 1.0 / std::sqrt(2.0));
  for (const char* b : {"b0", "b1", "b2"}) ts.add(p.omega_QB, b, number_matrix(c));
  // (eta^2 Omega / sqrt 3) P(k) Z^k, eta P(k) = i (b(-k)^dag - b(k)) / sqrt 2.
  const double cz = eo / std::sqrt(3.0);
  ts.add(cz * ic, {{"b2", ad}, {"q", z}});
  ts.add(-cz * ic, {{"b1", a}, {"q", z}});
  ts.add(cz * ic, {{"b1", ad}, {"q", z2}});
  ts.add(-cz * ic, {{"b2", a}, {"q", z2}});
  ts.add(-p.epsilon * cplx(1.0), "q", identity_matrix(3));
  if (p.g != 0.0) ts.add(p.g, "q", to_sparse(DenseMat(p.A)));
}

}  // namespace

double MappingReport::max_unitarity_residual() const {
  double m = 0.0;
  for (const auto& s : stages) m = std::max(m, s.unitarity_residual);
  return m;
}

nlohmann::json MappingReport::to_json() const {
  auto rabi = [](const RabiParams& r) {
    return nlohmann::json{{"omega_R", r.omega_R}, {"B", r.B}, {"phi", r.phi}, {"lambda", r.lambda}, {"cutoff", r.cutoff}};
  };
  nlohmann::json j;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : stages) {
    j["stages"].push_back({{"name", s.name},
                           {"unitarity_residual", s.unitarity_residual},
                           {"form_residual", s.form_residual},
                           {"note", s.note}});
  }
  j["cutoff"] = cutoff;
  j["levels"] = levels;
  j["translation_constant"] = translation_constant;
  j["translation_constant_reference"] = translation_constant_reference;
  j["boost_constant"] = boost_constant;
  j["constant_offset"] = constant_offset;
  j["extracted"] = rabi(extracted);
  j["expected"] = rabi(expected);
  j["parameter_deviation"] = parameter_deviation;
  j["sector_levels"] = sector_levels;
  j["reduced_levels"] = reduced_levels;
  j["spectral_deviation"] = spectral_deviation;
  j["cutoff_drift"] = cutoff_drift;
  return j;
}

DenseMat site_translation(int cutoff, double eta) {
  DenseMat ep = exp_i_hermitian(DenseMat(position_matrix(cutoff, eta)), 0.5);
  DenseMat s = DenseMat::Zero(2 * cutoff, 2 * cutoff);
  s.topLeftCorner(cutoff, cutoff) = ep;
  s.bottomRightCorner(cutoff, cutoff) = ep.adjoint();
  return s;
}

SparseOperator momentum_translation_unitary(const SpaceLayout& layout, double eta) {
  const int c = layout.has("b0") ? layout.factor(layout.index_of("b0")).dim : 0;
  if (c < 2 || !(layout == qb_ring_layout(c))) throw std::invalid_argument("translation needs the qubit-boson ring layout");
  DenseMat ep = exp_i_hermitian(DenseMat(position_matrix(c, eta)), 0.5);
  const std::array<SparseMat, 2> e{to_sparse(ep), to_sparse(ep.adjoint())};
  TermSum ts(layout);
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<std::pair<std::string, SparseMat>> ops;
    for (int j = 0; j < 3; ++j) {
      int s = (mask >> j) & 1;
      ops.emplace_back("s" + std::to_string(j), projector_matrix(2, s));
      ops.emplace_back("b" + std::to_string(j), e[s]);
    }
    ts.add(1.0, ops);
  }
  return ts.build(false);
}

std::vector<RingTerm> translate_ring_terms(const std::vector<RingTerm>& terms, double eta) {
  return conjugate_terms(terms, eta, padded_dim(terms));
}

std::vector<RingTerm> conjugate_ring_terms(const std::vector<RingTerm>& terms, double eta, int cutoff) {
  return conjugate_terms(terms, eta, cutoff);
}

SparseOperator translated_ring_direct(const QBRingParams& p) {
  p.validate();
  const int c = p.cutoff;
  TermSum ts(qb_ring_layout(c));
  add_ring_common(ts, p);
  SparseMat ip = scaled_momentum(c);
  for (int j = 0; j < 3; ++j) {
    std::string s = "s" + std::to_string(j), b = "b" + std::to_string(j);
    ts.add(p.omega_QB, b, number_matrix(c));
    if (p.eta != 0.0) ts.add(0.5 * p.eta * p.omega_QB, {{s, sigma_z_matrix()}, {b, ip}});
  }
  ts.add_identity(translation_constant(p));
  return ts.build(true);
}

Matrix3c ring_fourier_matrix(bool inverse) {
  Matrix3c m;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) m(j, k) = std::pow(kOmega, j * k) / std::sqrt(3.0);
  return inverse ? Matrix3c(m.adjoint()) : m;
}

SparseOperator mode_mixing_unitary(const SpaceLayout& layout, const std::array<std::string, 3>& labels,
                                   const Matrix3c& m) {
  std::array<std::size_t, 3> f;
  for (int i = 0; i < 3; ++i) {
    f[i] = layout.index_of(labels[i]);
    if (layout.factor(f[i]).kind != FactorKind::Boson) throw std::invalid_argument("mode mixing acts on boson factors");
  }
  const int c = layout.factor(f[0]).dim;
  if (layout.factor(f[1]).dim != c || layout.factor(f[2]).dim != c) {
    throw std::invalid_argument("mode mixing needs equal cutoffs");
  }
  auto flat = [c](int a, int b, int d) { return (a * c + b) * c + d; };

  // Column images of |n0 n1 n2> for total <= c - 1.
  std::vector<std::vector<std::pair<int, cplx>>> image(static_cast<std::size_t>(c) * c * c);
  std::vector<cplx> cur(c * c * c), nxt(c * c * c);
  for (int n0 = 0; n0 < c; ++n0) {
    for (int n1 = 0; n0 + n1 < c; ++n1) {
      for (int n2 = 0; n0 + n1 + n2 < c; ++n2) {
        std::fill(cur.begin(), cur.end(), cplx(0.0));
        cur[0] = 1.0;
        const std::array<int, 3> n{n0, n1, n2};
        double norm = 1.0;
        int total = 0;
        for (int k = 0; k < 3; ++k) {
          for (int rep = 0; rep < n[k]; ++rep) {
            std::fill(nxt.begin(), nxt.end(), cplx(0.0));
            for (int a = 0; a <= total; ++a) {
              for (int b = 0; a + b <= total; ++b) {
                int d = total - a - b;
                cplx v = cur[flat(a, b, d)];
                if (v == cplx(0.0)) continue;
                nxt[flat(a + 1, b, d)] += m(0, k) * std::sqrt(a + 1.0) * v;
                nxt[flat(a, b + 1, d)] += m(1, k) * std::sqrt(b + 1.0) * v;
                nxt[flat(a, b, d + 1)] += m(2, k) * std::sqrt(d + 1.0) * v;
              }
            }
            std::swap(cur, nxt);
            ++total;
            norm *= rep + 1;
          }
        }
        auto& col = image[flat(n0, n1, n2)];
        const double s = 1.0 / std::sqrt(norm);
        for (int a = 0; a <= total; ++a) {
          for (int b = 0; a + b <= total; ++b) {
            cplx v = s * cur[flat(a, b, total - a - b)];
            if (std::abs(v) > kPruneTol) col.emplace_back(flat(a, b, total - a - b), v);
          }
        }
      }
    }
  }

  const std::int64_t dim = layout.total_dim();
  std::vector<Eigen::Triplet<cplx>> trip;
  std::vector<int> d(layout.num_factors());
  for (std::int64_t s = 0; s < dim; ++s) {
    layout.decode(s, d);
    const int n0 = d[f[0]], n1 = d[f[1]], n2 = d[f[2]];
    if (n0 + n1 + n2 >= c) {
      trip.emplace_back(static_cast<int>(s), static_cast<int>(s), 1.0);
      continue;
    }
    const std::int64_t base = s - n0 * layout.stride(f[0]) - n1 * layout.stride(f[1]) - n2 * layout.stride(f[2]);
    for (const auto& [idx, v] : image[flat(n0, n1, n2)]) {
      const int a = idx / (c * c), b = (idx / c) % c, e = idx % c;
      std::int64_t row = base + a * layout.stride(f[0]) + b * layout.stride(f[1]) + e * layout.stride(f[2]);
      trip.emplace_back(static_cast<int>(row), static_cast<int>(s), v);
    }
  }
  SparseMat u(dim, dim);
  u.setFromTriplets(trip.begin(), trip.end());
  return SparseOperator(layout, std::move(u));
}

SparseOperator fourier_ring_unitary(const SpaceLayout& layout, bool inverse, const std::array<std::string, 3>& labels) {
  return mode_mixing_unitary(layout, labels, ring_fourier_matrix(inverse));
}

SparseOperator momentum_ring_direct(const QBRingParams& p) {
  p.validate();
  const int c = p.cutoff;
  TermSum ts(qb_ring_layout(c));
  add_ring_common(ts, p);
  SparseMat a = annihilation_matrix(c);
  SparseMat ad = a.adjoint();
  Matrix3c m = ring_fourier_matrix();
  const cplx ic(0.0, 1.0 / std::sqrt(2.0));
  for (int k = 0; k < 3; ++k) ts.add(p.omega_QB, "b" + std::to_string(k), number_matrix(c));
  if (p.eta != 0.0) {
    const double coef = 0.5 * p.eta * p.omega_QB;
    for (int j = 0; j < 3; ++j) {
      std::string s = "s" + std::to_string(j);
      for (int k = 0; k < 3; ++k) {
        std::string b = "b" + std::to_string(k);
        ts.add(coef * ic * std::conj(m(j, k)), {{s, sigma_z_matrix()}, {b, ad}});
        ts.add(-coef * ic * m(j, k), {{s, sigma_z_matrix()}, {b, a}});
      }
    }
  }
  ts.add_identity(translation_constant(p));
  return ts.build(true);
}

Isometry single_excitation_isometry(const SpaceLayout& layout) {
  std::array<std::size_t, 3> q;
  for (int j = 0; j < 3; ++j) q[j] = layout.index_of("s" + std::to_string(j));
  std::vector<Factor> rest{{"q", FactorKind::Qutrit, 3}};
  std::vector<std::size_t> rest_idx;
  for (std::size_t i = 0; i < layout.num_factors(); ++i) {
    if (i == q[0] || i == q[1] || i == q[2]) continue;
    rest.push_back(layout.factor(i));
    rest_idx.push_back(i);
  }
  Isometry out{SparseMat(), SpaceLayout(std::move(rest))};
  const std::int64_t n = out.sector_layout.total_dim();
  SparseMat v(layout.total_dim(), n);
  v.reserve(Eigen::VectorXi::Constant(n, 1));
  std::vector<int> sd(out.sector_layout.num_factors()), fd(layout.num_factors());
  for (std::int64_t t = 0; t < n; ++t) {
    out.sector_layout.decode(t, sd);
    for (int j = 0; j < 3; ++j) fd[q[j]] = sd[0] == j ? 0 : 1;
    for (std::size_t r = 0; r < rest_idx.size(); ++r) fd[rest_idx[r]] = sd[r + 1];
    v.insert(layout.encode(fd), t) = 1.0;
  }
  out.V = std::move(v);
  return out;
}

SparseOperator sector_direct(const QBRingParams& p) {
  p.validate();
  TermSum ts(sector_layout(p.cutoff));
  add_sector_common(ts, p);
  // -(eta^2 Omega / (2 sqrt 3)) P(0)
  ts.add(-p.eta * p.omega_QB / (2.0 * std::sqrt(3.0)), "b0", scaled_momentum(p.cutoff));
  ts.add_identity(translation_constant(p));
  return ts.build(true);
}

DenseMat displacement_matrix(int cutoff, cplx beta) {
  DenseMat a = DenseMat(annihilation_matrix(cutoff));
  DenseMat gen = beta * a.adjoint() - std::conj(beta) * a;
  return exp_i_hermitian(cplx(0.0, -1.0) * gen, 1.0);
}

SparseOperator boosted_sector_direct(const QBRingParams& p) {
  p.validate();
  TermSum ts(sector_layout(p.cutoff));
  add_sector_common(ts, p);
  ts.add_identity(translation_constant(p) + boost_constant(p));
  return ts.build(true);
}

std::vector<double> sector_levels(const QBRingParams& p, int k) {
  TermSum ts = ring_terms_to_sum(qb_ring_terms(p), p.cutoff);
  SparseMat h = ts.assemble(single_excitation_sector(p.cutoff));
  EigenPairs e = lowest_eigenpairs(h, k, false);
  return std::vector<double>(e.values.data(), e.values.data() + e.values.size());
}

std::vector<double> reduced_levels(const RabiParams& r, double constant, int cutoff, int k) {
  RabiParams rc = r;
  rc.cutoff = cutoff;
  EigenPairs e = dense_eigh(build_z3_rabi(rc).dense(), std::min<int>(k, 3 * cutoff * cutoff), false);
  std::vector<double> all;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    for (int n0 = 0; n0 < k; ++n0) all.push_back(constant + e.values(i) + r.omega_R * n0);
  }
  std::sort(all.begin(), all.end());
  all.resize(std::min<std::size_t>(all.size(), k));
  return all;
}

Reduction reduce_qb_to_rabi(const QBRingParams& p, const ReductionOptions& opts) {
  p.validate();
  const int c = p.cutoff;
  if (c < 10) throw std::invalid_argument("reduction needs cutoff >= 10");
  if (opts.levels < 0) throw std::invalid_argument("levels must be non-negative");
  Reduction out;
  MappingReport& rep = out.report;
  rep.cutoff = c;
  rep.levels = opts.levels;
  rep.translation_constant = translation_constant(p);
  rep.translation_constant_reference = 0.75 * p.eta * p.eta * p.omega_QB;
  rep.boost_constant = boost_constant(p);
  const RabiMapping expected = map_qb_to_rabi(p);
  rep.expected = expected.rabi;
  const SpaceLayout ring = qb_ring_layout(c);

  // Translation.
  SparseMat h1 = ring_terms_to_sum(translate_ring_terms(qb_ring_terms(p), p.eta), c).assemble();
  rep.stages.push_back({"translation", identity_residual(site_translation(c, p.eta)),
                        max_abs(SparseMat(h1 - translated_ring_direct(p).matrix())),
                        "per-site exp(i sz x / 2); constant 3 eta^2 Omega / 8"});

  // Fourier.
  SparseMat gam = fourier_ring_unitary(ring).matrix();
  SparseMat h2 = sandwich(SparseMat(gam.adjoint()), h1, gam);
  auto low_total = [c](std::span<const int> d) { return d[3] + d[4] + d[5] <= c - 2; };
  {
    SpaceLayout modes;
    modes.add_boson("b0", c).add_boson("b1", c).add_boson("b2", c);
    rep.stages.push_back({"fourier", identity_residual(fourier_ring_unitary(modes).matrix()),
                          masked_max_diff(h2, momentum_ring_direct(p).matrix(), mask(ring, low_total)),
                          "compared on total boson number <= cutoff - 2"});
  }

  // Restriction to S^z = -1.
  Isometry iso = single_excitation_isometry(ring);
  SparseMat h3 = sandwich(SparseMat(iso.V.adjoint()), h2, iso.V);
  const SpaceLayout sec = iso.sector_layout;
  auto sec_low = [c](std::span<const int> d) { return d[1] + d[2] + d[3] <= c - 2; };
  rep.stages.push_back({"restriction", identity_residual(iso.V),
                        masked_max_diff(h3, sector_direct(p).matrix(), mask(sec, sec_low)),
                        "qutrit |j> = qubit j up"});

  // k = 0 boost.
  const cplx beta(0.0, -p.eta / (2.0 * std::sqrt(6.0)));
  DenseMat dmat = displacement_matrix(c, beta);
  SparseOperator dop = embed(to_sparse(dmat), "b0", sec);
  SparseMat h4 = sandwich(dop.matrix(), h3, SparseMat(dop.matrix().adjoint()));
  auto boost_low = [c](std::span<const int> d) { return d[1] + d[2] + d[3] <= c - 10; };
  const std::vector<char> keep = mask(sec, boost_low);
  rep.stages.push_back({"k0_boost", identity_residual(dmat), masked_max_diff(h4, boosted_sector_direct(p).matrix(), keep),
                        "constant -eta^2 Omega / 24; compared on total boson number <= cutoff - 10"});

  // Qutrit basis change and boson phase rotation.
  Matrix3c u = qutrit_fourier_unitary();
  SparseMat phase(c, c);
  for (int n = 0; n < c; ++n) phase.insert(n, n) = std::pow(cplx(0.0, 1.0), n);
  TermSum qs(sec);
  qs.add(1.0, {{"q", to_sparse(DenseMat(u))}, {"b1", phase}, {"b2", phase}});
  SparseMat qm = qs.assemble();
  SparseMat h5 = sandwich(qm, h4, SparseMat(qm.adjoint()));

  // Read the Rabi couplings off the final matrix.
  auto elem = [&](std::array<int, 4> r, std::array<int, 4> col) {
    return h5.coeff(sec.encode(r), sec.encode(col));
  };
  std::array<double, 3> e;
  for (int q = 0; q < 3; ++q) e[q] = elem({q, 0, 0, 0}, {q, 0, 0, 0}).real();
  cplx c1 = 0.0;
  for (int q = 0; q < 3; ++q) c1 += e[q] * std::pow(kOmega, -q);
  c1 /= 3.0;
  RabiParams ext;
  ext.omega_R = (elem({0, 0, 1, 0}, {0, 0, 1, 0}) - elem({0, 0, 0, 0}, {0, 0, 0, 0})).real();
  ext.lambda = -elem({1, 0, 0, 0}, {0, 0, 1, 0}).real();
  const bool phased = std::abs(c1) > 1e-12;
  ext.B = phased ? std::abs(c1) : 0.0;
  ext.phi = phased ? std::arg(c1) : 0.0;
  ext.cutoff = c;
  rep.extracted = ext;
  rep.constant_offset = (e[0] + e[1] + e[2]) / 3.0;

  double dev = std::max({std::abs(ext.omega_R - expected.rabi.omega_R), std::abs(ext.lambda - expected.rabi.lambda),
                         std::abs(ext.B - expected.rabi.B), std::abs(rep.constant_offset - expected.constant_offset)});
  if (phased && expected.phase_determined) {
    dev = std::max(dev, std::abs(std::remainder(ext.phi - expected.rabi.phi, 2.0 * pi)));
  }
  rep.parameter_deviation = dev;

  {
    TermSum ts(sec);
    ts.add_identity(rep.constant_offset);
    for (const char* b : {"b0", "b1", "b2"}) ts.add(ext.omega_R, b, number_matrix(c));
    ts.add(1.0, "q", to_sparse(DenseMat(magnetic_matrix(ext.B, ext.phi))));
    SparseMat a = annihilation_matrix(c);
    SparseMat ad = a.adjoint();
    SparseMat x = shift_matrix();
    SparseMat xd = x.adjoint();
    ts.add(-ext.lambda, {{"b1", a}, {"q", x}});
    ts.add(-ext.lambda, {{"b2", ad}, {"q", x}});
    ts.add(-ext.lambda, {{"b1", ad}, {"q", xd}});
    ts.add(-ext.lambda, {{"b2", a}, {"q", xd}});
    rep.stages.push_back({"qutrit_phase", identity_residual(DenseMat(u)), masked_max_diff(h5, ts.assemble(), keep),
                          "U = X^dag F^dag on the qutrit, i^n on k = 1, 2"});
  }
  out.staged = SparseOperator(sec, std::move(h5));
  out.rabi = build_z3_rabi(ext);

  // Spectral certification.
  const int k = opts.levels;
  if (k == 0) return out;
  rep.sector_levels = sector_levels(p, k);
  rep.reduced_levels = reduced_levels(ext, rep.constant_offset, c, k);
  for (int i = 0; i < k; ++i) {
    rep.spectral_deviation = std::max(rep.spectral_deviation, std::abs(rep.sector_levels[i] - rep.reduced_levels[i]));
  }
  if (opts.cutoff_check) {
    QBRingParams big = p;
    big.cutoff = c + opts.cutoff_step;
    std::vector<double> s2 = sector_levels(big, k);
    std::vector<double> r2 = reduced_levels(ext, rep.constant_offset, big.cutoff, k);
    for (int i = 0; i < k; ++i) {
      rep.cutoff_drift = std::max({rep.cutoff_drift, std::abs(s2[i] - rep.sector_levels[i]),
                                   std::abs(r2[i] - rep.reduced_levels[i])});
    }
    if (rep.cutoff_drift > opts.drift_tol) {
      throw ConvergenceError("low levels drift by " + std::to_string(rep.cutoff_drift) + " when the cutoff is raised",
                             rep.cutoff_drift);
    }
  }
  return out;
}

ParafermionOps fk_transform(int L) {
  if (L < 1 || L > kMaxParafermionSites) {
    throw std::invalid_argument("fk_transform supports 1 <= L <= " + std::to_string(kMaxParafermionSites));
  }
  SpaceLayout l = potts_layout(L);
  ParafermionOps ops;
  ops.L = L;
  SparseMat z = clock_matrix();
  SparseMat x = shift_matrix();
  SparseMat zx = z * x;
  for (int m = 1; m <= L; ++m) {
    std::vector<std::pair<std::string, SparseMat>> g, d;
    for (int mp = 1; mp < m; ++mp) {
      g.emplace_back("q" + std::to_string(mp), z);
      d.emplace_back("q" + std::to_string(mp), z);
    }
    g.emplace_back("q" + std::to_string(m), x);
    d.emplace_back("q" + std::to_string(m), zx);
    ops.gamma.push_back(TermSum(l).add(1.0, g).build(false));
    ops.delta.push_back(TermSum(l).add(1.0, d).build(false));
  }
  return ops;
}

double ParafermionRelations::max() const { return std::max({gamma_gamma, delta_delta, gamma_delta, cubes}); }

ParafermionRelations check_parafermion_relations(const ParafermionOps& ops) {
  ParafermionRelations r;
  auto sgn = [](int v) { return (v > 0) - (v < 0); };
  auto rel = [](const SparseOperator& a, const SparseOperator& b, int power) {
    return max_abs(a * b - std::pow(kOmega, power) * (b * a));
  };
  for (int m = 0; m < ops.L; ++m) {
    for (int n = 0; n < ops.L; ++n) {
      r.gamma_gamma = std::max(r.gamma_gamma, rel(ops.gamma[m], ops.gamma[n], sgn(m - n)));
      r.delta_delta = std::max(r.delta_delta, rel(ops.delta[m], ops.delta[n], sgn(m - n)));
      // Gamma_m sits before Delta_m in the interleaved ordering.
      r.gamma_delta = std::max(r.gamma_delta, rel(ops.gamma[m], ops.delta[n], m == n ? -1 : sgn(m - n)));
    }
    SparseOperator id = SparseOperator::identity(ops.gamma[m].layout());
    r.cubes = std::max({r.cubes, max_abs_diff(power(ops.gamma[m], 3), id), max_abs_diff(power(ops.delta[m], 3), id)});
  }
  return r;
}

SparseOperator parafermion_chain(const ParafermionOps& ops, const PottsParams& p) {
  SparseOperator h = SparseOperator::zero(potts_layout(ops.L));
  const cplx ef = std::polar(1.0, p.phi), et = std::polar(1.0, p.theta);
  for (int m = 0; m < ops.L; ++m) {
    h = h + (p.f_P * ef) * (ops.gamma[m] * adjoint(ops.delta[m]));
    h = h + (p.f_P * std::conj(ef)) * (ops.delta[m] * adjoint(ops.gamma[m]));
  }
  for (int m = 0; m + 1 < ops.L; ++m) {
    h = h + (p.J_P * et) * (ops.delta[m] * adjoint(ops.gamma[m + 1]));
    h = h + (p.J_P * std::conj(et)) * (ops.gamma[m + 1] * adjoint(ops.delta[m]));
  }
  return h;
}

ParafermionFormCheck verify_parafermion_form(const PottsParams& p) {
  p.validate();
  if (p.L > kMaxParafermionFormSites) {
    throw std::invalid_argument("verify_parafermion_form supports L <= " + std::to_string(kMaxParafermionFormSites));
  }
  SparseOperator chp = parafermion_chain(fk_transform(p.L), p);
  SparseOperator hcl = build_potts(p);
  PottsParams relabeled = p;
  relabeled.phi = -p.phi;
  relabeled.theta = p.theta + 2.0 * pi / 3.0;
  ParafermionFormCheck out;
  out.residual = max_abs_diff(hcl, chp);
  out.relabeled_residual = max_abs_diff(build_potts(relabeled), chp);
  EigenPairs a = dense_eigh(hcl.dense()), b = dense_eigh(chp.dense());
  out.spectral_residual = (a.values - b.values).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace z3sim
