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

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "z3sim/models.hpp"

namespace z3sim {

struct Observable {
  std::string name;
  SparseOperator op;
};

struct EvolveOptions {
  int krylov_dim = 30;
  double step_tol = 1e-12;  // error estimate per substep
  double norm_tol = 1e-8;
  double max_substep = 0.0;  // 0: no cap
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<cplx>> values;  // [observable][time]
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
  nlohmann::json disorder;  // realization record, null when clean
  std::string method;       // krylov | dense
  long substeps = 0;
  double max_step_error = 0.0;
  double max_norm_drift = 0.0;

  const std::vector<cplx>& series(const std::string& name) const;
  std::vector<double> real_series(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// e^{-iHt} psi0 on an ascending grid by Krylov propagation with adaptive
/// substeps. Falls back to dense diagonalization when the Krylov step fails
/// and dim <= kDenseDimLimit; otherwise throws ConvergenceError.
Trajectory evolve(const SparseOperator& h, const StateVector& psi0, const std::vector<double>& times,
                  const std::vector<Observable>& observables, const EvolveOptions& opts = {});
/// Same, also returning the final state.
Trajectory evolve(const SparseOperator& h, const StateVector& psi0, const std::vector<double>& times,
                  const std::vector<Observable>& observables, const EvolveOptions& opts, StateVector* final_state);

/// n points from 0 to t_max inclusive.
std::vector<double> uniform_grid(double t_max, int n);

/// (eps, Omega, g, eta) = (0.2, 1, 0.3, 1.0), cutoff 8.
QBRingParams disorder_baseline();
/// |up down down> (x) |000>.
StateVector disorder_initial_state(int cutoff);

struct RealizationResult {
  std::uint64_t realization = 0;
  DisorderParams disorder;
  Trajectory trajectory;  // observable "Sz"
  bool ok = false;
  std::string error;
  double max_deviation = 0.0;  // max_t |Sz + 1|
};

struct DisorderEnsemble {
  QBRingParams params;
  double sigma_over_omega = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<RealizationResult> realizations;
  std::vector<double> mean, min, max;  // over successful realizations
  double max_mean_deviation = 0.0;     // max_t |mean + 1|
  double mean_max_deviation = 0.0;     // realization average of max_t |Sz + 1|
  double envelope_deviation = 0.0;     // max over realizations and t
  int failures = 0;

  nlohmann::json summary() const;
  /// t,realization_id,Sz
  void write_csv(std::ostream& os) const;
};

/// Sigma^x disorder with N(0, sigma_over_omega * omega_QB) fields. Realization r
/// draws from the stream of (seed, r); failed realizations are recorded and
/// skipped. Runs on worker_count() threads.
DisorderEnsemble disorder_sz_experiment(const QBRingParams& p, double sigma_over_omega, int n_realizations,
                                        std::uint64_t seed, double t_max = 50.0, int n_points = 500,
                                        const EvolveOptions& opts = {});

}  // namespace z3sim
