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


#include "z3sim/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <locale>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "z3sim/eigensolver.hpp"
#include "z3sim/errors.hpp"

namespace z3sim {

namespace {

// Lanczos basis of the Krylov space of psi; T is tridiagonal.
struct KrylovBasis {
  DenseMat v;
  Eigen::VectorXd theta;  // eigenvalues of T
  Eigen::MatrixXd q;      // eigenvectors of T
  double beta0 = 0.0;
  double beta_next = 0.0;  // coupling to the next basis vector, 0 on breakdown
};

KrylovBasis krylov_basis(const SparseMat& h, const DenseVec& psi, int m) {
  KrylovBasis kb;
  const Eigen::Index n = psi.size();
  m = static_cast<int>(std::min<Eigen::Index>(m, n));
  kb.beta0 = psi.norm();
  kb.v.resize(n, m);
  kb.v.col(0) = psi / kb.beta0;
  Eigen::VectorXd alpha(m), beta(m);
  int used = m;
  for (int j = 0; j < m; ++j) {
    DenseVec w = h * kb.v.col(j);
    alpha(j) = kb.v.col(j).dot(w).real();
    for (int pass = 0; pass < 2; ++pass) w -= kb.v.leftCols(j + 1) * (kb.v.leftCols(j + 1).adjoint() * w);
    beta(j) = w.norm();
    if (beta(j) <= 1e-13 * std::max(1.0, std::abs(alpha(j)))) {
      used = j + 1;
      beta(j) = 0.0;
      break;
    }
    if (j + 1 < m) kb.v.col(j + 1) = w / beta(j);
  }
  kb.v.conservativeResize(n, used);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
  for (int j = 0; j < used; ++j) {
    t(j, j) = alpha(j);
    if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j);
  }
  kb.beta_next = beta(used - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  kb.theta = es.eigenvalues();
  kb.q = es.eigenvectors();
  return kb;
}

// exp(-i T tau) e1 and the a posteriori error estimate.
DenseVec krylov_coeffs(const KrylovBasis& kb, double tau, double& err) {
  const Eigen::Index m = kb.theta.size();
  DenseVec c(m);
  for (Eigen::Index i = 0; i < m; ++i) c(i) = std::polar(kb.q(0, i), -kb.theta(i) * tau);
  DenseVec out = kb.q.cast<cplx>() * c;
  err = kb.beta0 * kb.beta_next * std::abs(out(m - 1));
  return out;
}

struct KrylovFailure {
  std::string what;
  double residual;
};

// Advances through the grid; one Krylov basis serves every grid point
// inside the accepted substep.
struct Propagator {
  const SparseMat& h;
  const EvolveOptions& opts;
  double tau = 0.0;  // last accepted substep
  long substeps = 0;
  double max_err = 0.0;

  template <typename Emit>
  void run(DenseVec& psi, const std::vector<double>& times, Emit emit) {
    double t = 0.0;
    std::size_t next = 0;
    while (next < times.size() && times[next] <= t) emit(next++, psi);
    const double span = times.back();
    while (next < times.size()) {
      KrylovBasis kb = krylov_basis(h, psi, opts.krylov_dim);
      const double left = span - t;
      double step = tau > 0.0 ? std::min(left, 2.0 * tau) : left;
      if (opts.max_substep > 0.0) step = std::min(step, opts.max_substep);
      double err = 0.0;
      DenseVec c = krylov_coeffs(kb, step, err);
      while (err > opts.step_tol) {
        step *= 0.5;
        if (step < 1e-12 * span) throw KrylovFailure{"krylov substep underflow", err};
        c = krylov_coeffs(kb, step, err);
      }
      const bool last = left - step < 1e-14 * span;
      const double t_end = last ? span : t + step;
      while (next < times.size() && times[next] < t_end) {
        double e = 0.0;
        DenseVec ci = krylov_coeffs(kb, times[next] - t, e);
        emit(next++, DenseVec(kb.beta0 * (kb.v * ci)));
      }
      psi = kb.beta0 * (kb.v * c);
      t = t_end;
      while (next < times.size() && times[next] <= t) emit(next++, psi);
      tau = step;
      ++substeps;
      max_err = std::max(max_err, err);
    }
  }
};

void record(Trajectory& tr, const std::vector<Observable>& obs, const DenseVec& psi, std::size_t ti) {
  for (std::size_t o = 0; o < obs.size(); ++o) tr.values[o][ti] = psi.dot(obs[o].op.matrix() * psi);
}

void dense_evolve(Trajectory& tr, const SparseMat& h, const DenseVec& psi0, const std::vector<Observable>& obs,
                  DenseVec& psi) {
  EigenPairs ep = dense_eigh(DenseMat(h));
  DenseVec c0 = ep.vectors.adjoint() * psi0;
  tr.max_norm_drift = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    DenseVec c(c0.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = c0(j) * std::polar(1.0, -ep.values(j) * tr.times[i]);
    psi = ep.vectors * c;
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(psi.norm() - 1.0));
    record(tr, obs, psi, i);
  }
  tr.method = "dense";
}

std::string csv_number(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

const std::vector<cplx>& Trajectory::series(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::out_of_range("no observable named '" + name + "'");
}

std::vector<double> Trajectory::real_series(const std::string& name) const {
  const auto& s = series(name);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i].real();
  return out;
}

nlohmann::json Trajectory::to_json() const {
  nlohmann::json obs = nlohmann::json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::vector<double> re, im;
    for (const auto& v : values[i]) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    obs[names[i]] = {{"re", re}, {"im", im}};
  }
  return {{"times", times},
          {"observables", obs},
          {"seed", seed},
          {"realization", realization},
          {"disorder", disorder},
          {"method", method},
          {"substeps", substeps},
          {"max_step_error", max_step_error},
          {"max_norm_drift", max_norm_drift}};
}

Trajectory evolve(const SparseOperator& h, const StateVector& psi0, const std::vector<double>& times,
                  const std::vector<Observable>& observables, const EvolveOptions& opts) {
  return evolve(h, psi0, times, observables, opts, nullptr);
}

Trajectory evolve(const SparseOperator& h, const StateVector& psi0, const std::vector<double>& times,
                  const std::vector<Observable>& observables, const EvolveOptions& opts, StateVector* final_state) {
  if (!h.hermitian()) throw std::invalid_argument("evolve: Hamiltonian is not flagged Hermitian");
  if (psi0.dim() != h.dim()) throw std::invalid_argument("evolve: state and Hamiltonian dimensions differ");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("evolve: initial state is not normalized");
  if (times.empty() || times.front() < 0.0) throw std::invalid_argument("evolve: time grid must start at t >= 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] >= times[i - 1])) throw std::invalid_argument("evolve: time grid must be ascending");
  }
  for (const auto& o : observables) {
    if (o.op.dim() != h.dim()) throw std::invalid_argument("evolve: observable '" + o.name + "' has wrong dimension");
  }
  if (opts.krylov_dim < 2) throw std::invalid_argument("evolve: krylov_dim must be at least 2");

  Trajectory tr;
  tr.times = times;
  for (const auto& o : observables) tr.names.push_back(o.name);
  tr.values.assign(observables.size(), std::vector<cplx>(times.size()));
  tr.method = "krylov";

  DenseVec psi = psi0.amplitudes();
  Propagator prop{h.matrix(), opts};
  try {
    prop.run(psi, times, [&](std::size_t i, const DenseVec& state) {
      double drift = std::abs(state.norm() - 1.0);
      tr.max_norm_drift = std::max(tr.max_norm_drift, drift);
      if (drift > opts.norm_tol) throw KrylovFailure{"norm drift " + std::to_string(drift), drift};
      record(tr, observables, state, i);
    });
  } catch (const KrylovFailure& f) {
    if (h.dim() > kDenseDimLimit) {
      throw ConvergenceError("krylov propagation failed (" + f.what + ") and dim exceeds the dense limit",
                             f.residual);
    }
    dense_evolve(tr, h.matrix(), psi0.amplitudes(), observables, psi);
  }
  tr.substeps = prop.substeps;
  tr.max_step_error = prop.max_err;
  if (final_state) *final_state = StateVector(h.layout(), psi);
  return tr;
}

std::vector<double> uniform_grid(double t_max, int n) {
  if (n < 1 || !(t_max >= 0.0)) throw std::invalid_argument("uniform_grid: need n >= 1 and t_max >= 0");
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = n == 1 ? 0.0 : t_max * i / (n - 1);
  return t;
}

QBRingParams disorder_baseline() {
  QBRingParams p;
  p.epsilon = 0.2;
  p.omega_QB = 1.0;
  p.g = 0.3;
  p.eta = 1.0;
  p.cutoff = 8;
  return p;
}

StateVector disorder_initial_state(int cutoff) {
  std::vector<int> d{0, 1, 1, 0, 0, 0};
  return StateVector::basis(qb_ring_layout(cutoff), d);
}

nlohmann::json DisorderEnsemble::summary() const {
  nlohmann::json real = nlohmann::json::array();
  for (const auto& r : realizations) {
    nlohmann::json j = {{"realization", r.realization}, {"ok", r.ok}, {"max_deviation", r.max_deviation},
                        {"delta", r.disorder.delta}, {"method", r.trajectory.method},
                        {"max_norm_drift", r.trajectory.max_norm_drift}};
    if (!r.ok) j["error"] = r.error;
    real.push_back(j);
  }
  return {{"epsilon", params.epsilon},
          {"omega_QB", params.omega_QB},
          {"g", params.g},
          {"eta", params.eta},
          {"cutoff", params.cutoff},
          {"sigma_over_omega", sigma_over_omega},
          {"seed", seed},
          {"n_realizations", realizations.size()},
          {"failures", failures},
          {"t_max", times.empty() ? 0.0 : times.back()},
          {"n_points", times.size()},
          {"max_mean_deviation", max_mean_deviation},
          {"mean_max_deviation", mean_max_deviation},
          {"envelope_deviation", envelope_deviation},
          {"mean_min", mean.empty() ? 0.0 : *std::min_element(mean.begin(), mean.end())},
          {"mean_max", mean.empty() ? 0.0 : *std::max_element(mean.begin(), mean.end())},
          {"realizations", real}};
}

void DisorderEnsemble::write_csv(std::ostream& os) const {
  std::string out = "t,realization_id,Sz\n";
  for (const auto& r : realizations) {
    if (!r.ok) continue;
    const auto& sz = r.trajectory.values[0];
    for (std::size_t i = 0; i < times.size(); ++i) {
      out += csv_number(times[i]) + ',' + std::to_string(r.realization) + ',' + csv_number(sz[i].real()) + '\n';
    }
  }
  os << out;
}

DisorderEnsemble disorder_sz_experiment(const QBRingParams& p, double sigma_over_omega, int n_realizations,
                                        std::uint64_t seed, double t_max, int n_points, const EvolveOptions& opts) {
  p.validate();
  if (!(sigma_over_omega >= 0.0)) throw std::invalid_argument("disorder strength must be non-negative");
  if (n_realizations < 1) throw std::invalid_argument("need at least one realization");
  DisorderEnsemble ens;
  ens.params = p;
  ens.sigma_over_omega = sigma_over_omega;
  ens.seed = seed;
  ens.times = uniform_grid(t_max, n_points);
  ens.realizations.resize(n_realizations);

  const StateVector psi0 = disorder_initial_state(p.cutoff);
  const std::vector<Observable> obs{{"Sz", total_sz(p.cutoff)}};
  const double sigma = sigma_over_omega * p.omega_QB;

  std::atomic<int> next{0};
  auto work = [&] {
    for (int r = next++; r < n_realizations; r = next++) {
      RealizationResult& res = ens.realizations[r];
      res.realization = static_cast<std::uint64_t>(r);
      try {
        res.disorder = DisorderParams::sample_sigma_x(sigma, seed, res.realization);
        SparseOperator h = build_disordered_qb_ring(p, res.disorder);
        res.trajectory = evolve(h, psi0, ens.times, obs, opts);
        res.trajectory.seed = seed;
        res.trajectory.realization = res.realization;
        res.trajectory.disorder = {{"kind", "sigma_x"}, {"delta", res.disorder.delta}};
        for (const auto& v : res.trajectory.values[0]) res.max_deviation = std::max(res.max_deviation, std::abs(v.real() + 1.0));
        res.ok = true;
      } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min(worker_count(), n_realizations));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  const std::size_t nt = ens.times.size();
  ens.mean.assign(nt, 0.0);
  ens.min.assign(nt, INFINITY);
  ens.max.assign(nt, -INFINITY);
  int ok = 0;
  for (const auto& r : ens.realizations) {
    if (!r.ok) {
      ++ens.failures;
      continue;
    }
    ++ok;
    for (std::size_t i = 0; i < nt; ++i) {
      double v = r.trajectory.values[0][i].real();
      ens.mean[i] += v;
      ens.min[i] = std::min(ens.min[i], v);
      ens.max[i] = std::max(ens.max[i], v);
    }
    ens.mean_max_deviation += r.max_deviation;
    ens.envelope_deviation = std::max(ens.envelope_deviation, r.max_deviation);
  }
  if (ok == 0) {
    ens.mean.clear();
    ens.min.clear();
    ens.max.clear();
    return ens;
  }
  for (std::size_t i = 0; i < nt; ++i) {
    ens.mean[i] /= ok;
    ens.max_mean_deviation = std::max(ens.max_mean_deviation, std::abs(ens.mean[i] + 1.0));
  }
  ens.mean_max_deviation /= ok;
  return ens;
}

}  // namespace z3sim
