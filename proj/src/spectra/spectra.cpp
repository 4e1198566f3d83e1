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


#include "z3sim/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>
#include <stdexcept>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "z3sim/errors.hpp"

namespace z3sim {

namespace {

constexpr double pi = std::numbers::pi;

void check_residuals(const std::vector<double>& res) {
  double worst = 0.0;
  for (double r : res) worst = std::max(worst, r);
  if (worst > kSpectrumResidualTol) {
    throw ConvergenceError("eigenpair residual " + std::to_string(worst) + " exceeds tolerance", worst);
  }
}

Spectrum from_pairs(const EigenPairs& ep, const SpaceLayout& layout) {
  Spectrum s;
  s.eigenvalues.assign(ep.values.data(), ep.values.data() + ep.values.size());
  s.vectors = ep.vectors;
  s.layout = layout;
  s.residuals = ep.residuals;
  s.method = ep.method;
  for (const auto& f : layout.factors()) {
    if (f.kind == FactorKind::Boson) s.cutoff = std::max(s.cutoff, f.dim);
  }
  return s;
}

SparseMat restrict_to(const SparseMat& m, const Sector& sector) {
  const auto& idx = sector.indices();
  std::vector<Eigen::Triplet<cplx>> t;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    for (SparseMat::InnerIterator it(m, idx[j]); it; ++it) {
      int i = sector.position(it.row());
      if (i >= 0) t.emplace_back(i, static_cast<int>(j), it.value());
    }
  }
  SparseMat out(sector.size(), sector.size());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

int nearest_charge(cplx v, double& dist) {
  int best = 0;
  dist = INFINITY;
  for (int q = 0; q < 3; ++q) {
    double d = std::abs(v - std::pow(kOmega, q));
    if (d < dist) {
      dist = d;
      best = q;
    }
  }
  return best;
}

struct SectorState {
  double energy;
  int charge;
  DenseVec vec;  // full space
};

// Lowest `per_sector` states of each charge sector of H_R, sorted by energy.
std::vector<SectorState> rabi_sector_states(const RabiParams& p, int per_sector) {
  SparseOperator h = build_z3_rabi(p);
  const int c = p.resolved_cutoff();
  std::vector<SectorState> out;
  for (int q = 0; q < 3; ++q) {
    Sector sec = rabi_charge_sector(c, q);
    SparseMat hs = restrict_to(h.matrix(), sec);
    EigenPairs ep = lowest_eigenpairs(hs, per_sector, true);
    check_residuals(ep.residuals);
    for (int i = 0; i < ep.values.size(); ++i) out.push_back({ep.values(i), q, sec.expand(ep.vectors.col(i))});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  return out;
}

DenseMat cat_matrix(const RabiParams& p) {
  DenseMat m(0, 0);
  for (int k = 0; k < 3; ++k) {
    DenseVec v = cat_state(k, p).amplitudes();
    if (m.cols() == 0) m.resize(v.size(), 3);
    m.col(k) = v;
  }
  return m;
}

DenseMat orthonormal_columns(const DenseMat& m) {
  Eigen::HouseholderQR<DenseMat> qr(m);
  return qr.householderQ() * DenseMat::Identity(m.rows(), m.cols());
}

Matrix3c shift3() { return Matrix3c(DenseMat(shift_matrix())); }

}  // namespace

StateVector Spectrum::state(std::size_t i) const {
  if (!has_vectors()) throw std::logic_error("spectrum has no eigenvectors");
  return StateVector(layout, vectors.col(static_cast<Eigen::Index>(i)));
}

nlohmann::json Spectrum::to_json() const {
  nlohmann::json j;
  j["eigenvalues"] = eigenvalues;
  j["residuals"] = residuals;
  if (!charges.empty()) j["charges"] = charges;
  j["method"] = method;
  j["cutoff"] = cutoff;
  j["dim"] = layout.total_dim();
  return j;
}

void Spectrum::write_csv(std::ostream& os) const {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << "index,energy,charge,residual\n";
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    s << i << ',' << eigenvalues[i] << ',';
    if (!charges.empty()) s << charges[i];
    s << ',';
    if (i < residuals.size()) s << residuals[i];
    s << '\n';
  }
  os << s.str();
}

Spectrum eigs(const SparseOperator& h, int k, bool want_vectors, const LanczosOptions& opts) {
  if (!h.hermitian()) throw std::invalid_argument("eigs: operator is not flagged Hermitian");
  if (k < 1 || k > h.dim()) throw std::invalid_argument("eigs: k must be in [1, dim]");
  EigenPairs ep = lowest_eigenpairs(h.matrix(), k, want_vectors, opts);
  check_residuals(ep.residuals);
  return from_pairs(ep, h.layout());
}

Spectrum eigs(const TermSum& terms, const Sector& sector, int k, bool want_vectors, const LanczosOptions& opts) {
  if (k < 1 || k > sector.size()) throw std::invalid_argument("eigs: k must be in [1, sector size]");
  SparseMat hs = terms.assemble(sector);
  if (hermiticity_residual(hs) > kHermitianTol) throw std::invalid_argument("eigs: sector matrix is not Hermitian");
  EigenPairs ep = lowest_eigenpairs(hs, k, want_vectors, opts);
  check_residuals(ep.residuals);
  Spectrum s = from_pairs(ep, terms.layout());
  if (want_vectors) {
    s.vectors.resize(terms.layout().total_dim(), ep.vectors.cols());
    for (int i = 0; i < ep.vectors.cols(); ++i) s.vectors.col(i) = sector.expand(ep.vectors.col(i));
  }
  return s;
}

Spectrum resolve_charges(const Spectrum& spec, const SparseOperator& generator) {
  if (!spec.has_vectors()) throw std::invalid_argument("resolve_charges: eigenvectors required");
  if (generator.dim() != spec.vectors.rows()) throw std::invalid_argument("resolve_charges: dimension mismatch");
  Spectrum out = spec;
  out.charges.assign(spec.size(), 0);
  const std::size_t n = spec.size();
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n) {
      double e = spec.eigenvalues[end];
      if (std::abs(e - spec.eigenvalues[end - 1]) > kClusterTol * std::max(1.0, std::abs(e))) break;
      ++end;
    }
    const Eigen::Index m = static_cast<Eigen::Index>(end - start);
    DenseMat v = out.vectors.middleCols(static_cast<Eigen::Index>(start), m);
    DenseMat pv = generator.matrix() * v;
    DenseMat pm = v.adjoint() * pv;
    Eigen::ComplexSchur<DenseMat> schur(pm);
    DenseMat rotated = v * schur.matrixU();
    std::vector<std::pair<int, Eigen::Index>> order;
    for (Eigen::Index i = 0; i < m; ++i) {
      cplx ev = schur.matrixT()(i, i);
      double dist;
      int q = nearest_charge(ev, dist);
      if (dist > kChargeTol) {
        throw ChargeResolutionError("state " + std::to_string(start + i) + " has <P> = (" +
                                    std::to_string(ev.real()) + ", " + std::to_string(ev.imag()) +
                                    "), not within tolerance of a cube root of unity");
      }
      order.emplace_back(q, i);
    }
    std::stable_sort(order.begin(), order.end());
    for (Eigen::Index i = 0; i < m; ++i) {
      out.vectors.col(static_cast<Eigen::Index>(start) + i) = rotated.col(order[i].second);
      out.charges[start + i] = order[i].first;
    }
    start = end;
  }
  return out;
}

StateVector cat_state(int k, const RabiParams& p) {
  if (k < 0 || k > 2) throw std::invalid_argument("cat_state: k must be 0, 1 or 2");
  p.validate();
  const int c = p.resolved_cutoff();
  const double alpha = p.alpha();
  SpaceLayout layout = rabi_layout(c);
  DenseVec psi = DenseVec::Zero(layout.total_dim());
  for (int l = 0; l < 3; ++l) {
    cplx wl = std::pow(kOmega, l);
    DenseVec chi(3);
    for (int j = 0; j < 3; ++j) chi(j) = std::pow(std::conj(wl), j) / std::sqrt(3.0);
    DenseVec a1 = coherent_amplitudes(std::conj(wl) * alpha, c);
    DenseVec a2 = coherent_amplitudes(wl * alpha, c);
    psi += std::pow(kOmega, l * k) * StateVector::product(layout, {chi, a1, a2}).amplitudes();
  }
  return StateVector(layout, psi / psi.norm());
}

int cat_charge(int k) { return ((k % 3) + 3) % 3; }

double cat_energy_analytic(int k, const RabiParams& p) {
  const double a = p.alpha();
  return 2.0 * p.B * std::exp(-3.0 * a * a) * std::cos(2.0 * pi * k / 3.0 + p.phi) -
         2.0 * p.lambda * p.lambda / p.omega_R;
}

double CatFidelityReport::min_fidelity() const { return *std::min_element(fidelity.begin(), fidelity.end()); }

nlohmann::json CatFidelityReport::to_json() const {
  return {{"cutoff", cutoff},
          {"alpha", alpha},
          {"fidelity", fidelity},
          {"ed_energy", ed_energy},
          {"analytic_energy", analytic_energy},
          {"charge", charge},
          {"one_per_charge", one_per_charge},
          {"subspace_overlap", subspace_overlap},
          {"warnings", warnings}};
}

std::vector<ChargedLevel> rabi_lowest_levels(const RabiParams& p, int per_sector) {
  std::vector<ChargedLevel> out;
  for (const auto& s : rabi_sector_states(p, per_sector)) out.push_back({s.energy, s.charge});
  return out;
}

CatFidelityReport cat_fidelity(const RabiParams& p) {
  p.validate();
  CatFidelityReport r;
  r.cutoff = p.resolved_cutoff();
  r.alpha = p.alpha();
  if (r.alpha < kExtremeCouplingThreshold) {
    r.warnings.push_back("lambda/omega_R = " + std::to_string(r.alpha) + " is below the extreme-coupling threshold");
  }
  auto states = rabi_sector_states(p, 3);
  DenseMat cats = cat_matrix(p);
  for (int k = 0; k < 3; ++k) {
    const int q = cat_charge(k);
    auto it = std::find_if(states.begin(), states.end(), [q](const auto& s) { return s.charge == q; });
    r.charge[k] = q;
    r.ed_energy[k] = it->energy;
    r.analytic_energy[k] = cat_energy_analytic(k, p);
    r.fidelity[k] = std::norm(cats.col(k).dot(it->vec));
  }
  DenseMat low(cats.rows(), 3);
  std::array<bool, 3> seen{};
  for (int i = 0; i < 3; ++i) {
    low.col(i) = states[i].vec;
    if (seen[states[i].charge]) r.one_per_charge = false;
    seen[states[i].charge] = true;
  }
  if (!r.one_per_charge) r.warnings.push_back("the three lowest levels do not carry distinct charges");
  DenseMat overlap = orthonormal_columns(cats).adjoint() * low;
  Eigen::JacobiSVD<DenseMat> svd(overlap);
  double smin = svd.singularValues().minCoeff();
  r.subspace_overlap = smin * smin;
  return r;
}

nlohmann::json CatActionReport::to_json() const {
  nlohmann::json ops_json = nlohmann::json::array();
  for (const auto& o : ops) {
    ops_json.push_back({{"name", o.name},
                        {"residual", o.residual},
                        {"swapped_residual", o.swapped_residual},
                        {"perp_norm", o.perp_norm}});
  }
  return {{"alpha", alpha}, {"cutoff", cutoff}, {"gram_residual", gram_residual}, {"ops", ops_json}};
}

CatActionReport cat_subspace_action(const RabiParams& p) {
  p.validate();
  CatActionReport r;
  r.cutoff = p.resolved_cutoff();
  r.alpha = p.alpha();
  SpaceLayout layout = rabi_layout(r.cutoff);
  DenseMat cats = cat_matrix(p);
  DenseMat q = orthonormal_columns(cats);
  r.gram_residual = (cats.adjoint() * cats - DenseMat::Identity(3, 3)).cwiseAbs().maxCoeff();

  SparseMat a = annihilation_matrix(r.cutoff);
  SparseMat ad = a.adjoint();
  const Matrix3c x = shift3();
  const Matrix3c xd = x.adjoint();
  struct Spec {
    const char* name;
    const char* label;
    const SparseMat* op;
    Matrix3c expected, swapped;
  };
  const Spec specs[] = {{"a1", "a1", &a, r.alpha * xd, r.alpha * x},
                        {"a2", "a2", &a, r.alpha * x, r.alpha * xd},
                        {"a1_dag", "a1", &ad, r.alpha * x, r.alpha * xd},
                        {"a2_dag", "a2", &ad, r.alpha * xd, r.alpha * x}};
  for (const auto& s : specs) {
    SparseOperator op = embed(*s.op, s.label, layout);
    DenseMat applied = op.matrix() * cats;
    OperatorAction act;
    act.name = s.name;
    act.matrix = Matrix3c(cats.adjoint() * applied);
    act.expected = s.expected;
    act.residual = (act.matrix - s.expected).cwiseAbs().maxCoeff();
    act.swapped_residual = (act.matrix - s.swapped).cwiseAbs().maxCoeff();
    DenseMat perp = applied - q * (q.adjoint() * applied);
    act.perp_norm = perp.colwise().norm().maxCoeff();
    r.ops.push_back(act);
  }
  return r;
}

nlohmann::json PottsFit::to_json() const {
  auto pj = [](const PottsParams& p) { return nlohmann::json{{"f_P", p.f_P}, {"phi", p.phi}, {"J_P", p.J_P}}; };
  return {{"fitted", pj(fitted)},
          {"predicted", pj(predicted)},
          {"levels", levels},
          {"fitted_levels", fitted_levels},
          {"bandwidth", bandwidth},
          {"deviation", deviation},
          {"gap_to_next", gap_to_next},
          {"f_relative_error", f_relative_error},
          {"J_relative_error", J_relative_error},
          {"warnings", warnings}};
}

std::vector<double> potts_levels_centered(double f_P, double phi, double J_P, double theta) {
  PottsParams pp;
  pp.L = 2;
  pp.f_P = f_P;
  pp.phi = phi;
  pp.J_P = J_P;
  pp.theta = theta;
  EigenPairs ep = dense_eigh(build_potts(pp).dense());
  std::vector<double> v(ep.values.data(), ep.values.data() + ep.values.size());
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  for (double& e : v) e -= mean;
  return v;
}

namespace {

struct PottsResidual : Eigen::DenseFunctor<double> {
  std::vector<double> target;
  double phi, f_scale, J_scale;
  PottsResidual(std::vector<double> t, double ph, double fs, double js)
      : Eigen::DenseFunctor<double>(2, 9), target(std::move(t)), phi(ph), f_scale(fs), J_scale(js) {}
  int operator()(const InputType& x, ValueType& fvec) const {
    auto lv = potts_levels_centered(x(0) * f_scale, phi, x(1) * J_scale);
    for (int i = 0; i < 9; ++i) fvec(i) = lv[i] - target[i];
    return 0;
  }
};

double relative_error(double fit, double pred, double scale) {
  if (pred != 0.0) return std::abs(fit - pred) / std::abs(pred);
  return std::abs(fit) / scale;
}

}  // namespace

PottsFit fit_potts_levels(const std::vector<double>& all, const RabiChainParams& chain) {
  if (all.size() < 10) throw std::invalid_argument("fit_potts_levels: at least 10 levels required");
  if (chain.L != 2) throw std::invalid_argument("effective Potts fit requires L = 2");
  PottsMapping map = map_chain_to_potts(chain);
  PottsFit fit;
  fit.predicted = map.potts;
  fit.warnings = map.warnings;
  std::vector<double> lv(all.begin(), all.begin() + 9);
  double mean = std::accumulate(lv.begin(), lv.end(), 0.0) / 9.0;
  for (double& e : lv) e -= mean;
  fit.levels = lv;
  fit.bandwidth = lv.back() - lv.front();
  fit.gap_to_next = all[9] - all[8];
  if (fit.gap_to_next < 3.0 * fit.bandwidth) {
    throw RegimeError("gap to the 10th level (" + std::to_string(fit.gap_to_next) +
                      ") is below three times the 9-level bandwidth (" + std::to_string(fit.bandwidth) + ")");
  }
  const double bw = std::max(fit.bandwidth, 1e-300);
  const double fs = std::abs(map.potts.f_P) > 0.0 ? std::abs(map.potts.f_P) : bw;
  const double js = std::abs(map.potts.J_P) > 0.0 ? std::abs(map.potts.J_P) : bw;
  const double phi = chain.site.phi;

  Eigen::NumericalDiff<PottsResidual, Eigen::Central> functor(PottsResidual(lv, phi, fs, js));
  double best = INFINITY;
  Eigen::VectorXd best_x(2);
  const double starts[][2] = {{1.0, 1.0}, {1.0, -1.0}, {0.1, 1.0}, {1.0, 0.1}, {10.0, 1.0}, {1.0, 10.0}};
  for (const auto& s : starts) {
    Eigen::VectorXd x(2);
    x << (map.potts.f_P < 0 ? -s[0] : s[0]), (map.potts.J_P < 0 ? -s[1] : s[1]);
    Eigen::LevenbergMarquardt<decltype(functor)> lm(functor);
    lm.setMaxfev(2000);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    lm.minimize(x);
    Eigen::VectorXd f(9);
    functor(x, f);
    if (f.squaredNorm() < best) {
      best = f.squaredNorm();
      best_x = x;
    }
  }
  fit.fitted.L = 2;
  fit.fitted.phi = phi;
  fit.fitted.f_P = best_x(0) * fs;
  fit.fitted.J_P = best_x(1) * js;
  fit.fitted_levels = potts_levels_centered(fit.fitted.f_P, phi, fit.fitted.J_P);
  double dev = 0.0;
  for (int i = 0; i < 9; ++i) dev = std::max(dev, std::abs(fit.levels[i] - fit.fitted_levels[i]));
  fit.deviation = dev / bw;
  fit.f_relative_error = relative_error(fit.fitted.f_P, fit.predicted.f_P, bw);
  fit.J_relative_error = relative_error(fit.fitted.J_P, fit.predicted.J_P, bw);
  return fit;
}

PottsFit fit_effective_potts(const RabiChainParams& chain, const LanczosOptions& opts) {
  chain.validate();
  if (chain.L != 2) throw std::invalid_argument("effective Potts fit requires L = 2");
  TermSum terms = rabi_chain_terms(chain);
  const int c = chain.site.resolved_cutoff();
  // Products of single-site states seed the iterative solver.
  RabiParams site = chain.site;
  site.cutoff = c;
  auto singles = rabi_sector_states(site, 2);
  std::vector<double> levels, fourth;
  for (int q = 0; q < 3; ++q) {
    Sector sec = chain_charge_sector(2, c, q);
    SparseMat hs = terms.assemble(sec);
    LanczosOptions o = opts;
    if (o.block_size == 0) o.block_size = 2;
    if (o.converge_count == 0) o.converge_count = 3;
    if (o.start.size() == 0) {
      std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < singles.size(); ++i) {
        for (std::size_t j = 0; j < singles.size(); ++j) {
          if ((singles[i].charge + singles[j].charge) % 3 == q) {
            pairs.emplace_back(singles[i].energy + singles[j].energy, i, j);
          }
        }
      }
      std::sort(pairs.begin(), pairs.end());
      const std::size_t nstart = std::min<std::size_t>(pairs.size(), o.block_size);
      o.start.resize(sec.size(), static_cast<Eigen::Index>(nstart));
      for (std::size_t s = 0; s < nstart; ++s) {
        const DenseVec& u = singles[std::get<1>(pairs[s])].vec;
        const DenseVec& v = singles[std::get<2>(pairs[s])].vec;
        const auto& idx = sec.indices();
        for (std::size_t r = 0; r < idx.size(); ++r) {
          o.start(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = u(idx[r] / v.size()) * v(idx[r] % v.size());
        }
      }
    }
    EigenPairs ep = lowest_eigenpairs(hs, 4, false, o);
    // Only the band levels are held to tolerance; the fourth enters the gap
    // check through its lower bound.
    std::vector<double> band(ep.residuals.begin(), ep.residuals.begin() + std::min<std::size_t>(3, ep.residuals.size()));
    check_residuals(band);
    for (int i = 0; i < 3; ++i) levels.push_back(ep.values(i));
    double r4 = ep.residuals.size() > 3 ? ep.residuals[3] : 0.0;
    fourth.push_back(ep.values(3) - r4);
  }
  std::sort(levels.begin(), levels.end());
  levels.push_back(*std::min_element(fourth.begin(), fourth.end()));
  return fit_potts_levels(levels, chain);
}

}  // namespace z3sim
