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


#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <locale>
#include <sstream>

#include "z3sim/cli.hpp"
#include "z3sim/dynamics.hpp"
#include "z3sim/errors.hpp"
#include "z3sim/spectra.hpp"
#include "z3sim/transforms.hpp"

#ifndef Z3SIM_VERSION
#define Z3SIM_VERSION "0.0.0"
#endif

namespace z3sim::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << x;
  return s.str();
}

std::string short_num(double x) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(8);
  s << x;
  return s.str();
}

class Writer {
 public:
  Writer(const OutputConfig& o, CommandResult& r) : out_(o), res_(r) {}

  bool json_on() const { return out_.format != Format::Csv; }
  bool csv_on() const { return out_.format != Format::Json; }

  void json_file(const std::string& name, const json& j) {
    if (json_on()) text(name, j.dump(2) + "\n");
  }
  void csv_file(const std::string& name, const std::string& body) {
    if (csv_on()) text(name, body);
  }
  void text(const std::string& name, const std::string& body) {
    fs::create_directories(out_.dir);
    std::ofstream f(fs::path(out_.dir) / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(out_.dir) / name).string());
    f << body;
    res_.files.push_back(name);
  }

 private:
  const OutputConfig& out_;
  CommandResult& res_;
};

void add(CommandResult& r, const std::string& k, const std::string& v) { r.summary.emplace_back(k, v); }
void add(CommandResult& r, const std::string& k, double v) { r.summary.emplace_back(k, short_num(v)); }
void add(CommandResult& r, const std::string& k, long long v) { r.summary.emplace_back(k, std::to_string(v)); }

LanczosOptions lanczos(const SolverConfig& s) {
  LanczosOptions o;
  o.block_size = s.block_size;
  return o;
}

struct Built {
  SparseOperator h;
  std::optional<SparseOperator> generator;
};

Built build(const ModelConfig& m, int cutoff) {
  switch (m.type) {
    case ModelType::Rabi: {
      RabiParams p = m.rabi;
      p.cutoff = cutoff;
      return {build_z3_rabi(p), symmetry_generator_rabi(cutoff)};
    }
    case ModelType::QBRing: {
      QBRingParams p = m.qb;
      p.cutoff = cutoff;
      return {build_qb_ring(p), std::nullopt};
    }
    case ModelType::Potts:
      return {build_potts(m.potts), potts_charge_operator(m.potts.L)};
    case ModelType::RabiChain: {
      RabiChainParams p = m.chain;
      p.site.cutoff = cutoff;
      return {build_rabi_chain(p), chain_symmetry_generator(p.L, cutoff)};
    }
  }
  throw std::logic_error("unknown model");
}

void cmd_spectrum(const RunConfig& cfg, CommandResult& r, Writer& w) {
  const int cutoff = cfg.solver.cutoff;
  LanczosOptions lo = lanczos(cfg.solver);
  lo.tol = cfg.solver.tol;
  Built b = build(cfg.model, cutoff);
  json warnings = json::array();
  int k = cfg.solver.levels;
  if (k > b.h.dim()) {
    warnings.push_back("levels reduced to the dimension " + std::to_string(b.h.dim()));
    k = static_cast<int>(b.h.dim());
  }
  Spectrum spec = eigs(b.h, k, b.generator.has_value(), lo);
  if (b.generator) {
    try {
      spec = resolve_charges(spec, *b.generator);
    } catch (const ChargeResolutionError& ex) {
      warnings.push_back(std::string("charges unresolved: ") + ex.what());
    }
  }
  spec.cutoff = cutoff;

  json conv = {{"cutoff", cutoff}};
  double drift = NAN;
  if (cfg.model.type == ModelType::Potts) {
    conv["applicable"] = false;
  } else if (cfg.solver.drift_check) {
    const int c2 = cutoff + cfg.solver.drift_step;
    Built b2 = build(cfg.model, c2);
    Spectrum s2 = eigs(b2.h, k, false, lo);
    drift = 0.0;
    for (int i = 0; i < k; ++i) drift = std::max(drift, std::abs(s2.eigenvalues[i] - spec.eigenvalues[i]));
    conv.update({{"applicable", true}, {"cutoff_check", c2}, {"levels_check", s2.eigenvalues}, {"drift", drift}});
  } else {
    conv["applicable"] = true;
    conv["skipped"] = true;
  }

  json j = {{"model", to_string(cfg.model.type)}, {"spectrum", spec.to_json()}, {"convergence", conv},
            {"warnings", warnings}};
  w.json_file("spectrum.json", j);
  std::ostringstream csv;
  spec.write_csv(csv);
  w.csv_file("spectrum.csv", csv.str());

  add(r, "model", to_string(cfg.model.type));
  add(r, "dim", static_cast<long long>(b.h.dim()));
  add(r, "levels", static_cast<long long>(k));
  add(r, "e0", spec.eigenvalues.front());
  if (k >= 4) {
    add(r, "low3_spread", spec.eigenvalues[2] - spec.eigenvalues[0]);
    add(r, "gap3", spec.eigenvalues[3] - spec.eigenvalues[2]);
  }
  if (!std::isnan(drift)) add(r, "drift", drift);
  add(r, "method", spec.method);
}

void cmd_map_verify(const RunConfig& cfg, CommandResult& r, Writer& w) {
  ReductionOptions ro;
  ro.levels = cfg.solver.levels;
  ro.cutoff_check = cfg.solver.drift_check;
  ro.cutoff_step = cfg.solver.drift_step;
  Reduction red;
  try {
    red = reduce_qb_to_rabi(cfg.model.qb, ro);
  } catch (const NotReducibleError& ex) {
    json j = {{"pass", false}, {"not_reducible", true}, {"diagnostic", ex.what()}, {"residual", ex.residual()}};
    w.json_file("mapping_report.json", j);
    add(r, "not_reducible", "true");
    add(r, "covariance_residual", ex.residual());
    r.message = std::string("not reducible: ") + ex.what();
    r.exit_code = kExitMapping;
    return;
  }
  const MappingReport& rep = red.report;
  const bool pass = rep.spectral_deviation <= cfg.solver.tol;
  RabiMapping map = map_qb_to_rabi(cfg.model.qb);
  json mag = json::array();
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int c = 0; c < 3; ++c) row.push_back({map.magnetic(i, c).real(), map.magnetic(i, c).imag()});
    mag.push_back(row);
  }
  json j = rep.to_json();
  j["pass"] = pass;
  j["tolerance"] = cfg.solver.tol;
  j["interaction"] = cfg.model.interaction;
  j["magnetic_matrix"] = mag;
  j["magnetic_phase"] = rep.extracted.phi;
  j["phase_determined"] = map.phase_determined;
  w.json_file("mapping_report.json", j);

  std::string csv = "index,sector_level,reduced_level,deviation\n";
  const std::size_t n = std::min(rep.sector_levels.size(), rep.reduced_levels.size());
  for (std::size_t i = 0; i < n; ++i) {
    csv += std::to_string(i) + ',' + num(rep.sector_levels[i]) + ',' + num(rep.reduced_levels[i]) + ',' +
           num(std::abs(rep.sector_levels[i] - rep.reduced_levels[i])) + '\n';
  }
  w.csv_file("mapping_levels.csv", csv);

  add(r, "pass", pass ? "true" : "false");
  add(r, "spectral_deviation", rep.spectral_deviation);
  add(r, "parameter_deviation", rep.parameter_deviation);
  add(r, "lambda", rep.extracted.lambda);
  add(r, "B", rep.extracted.B);
  add(r, "phi", rep.extracted.phi);
  add(r, "cutoff_drift", rep.cutoff_drift);
  if (!pass) {
    r.exit_code = kExitMapping;
    r.message = "spectral deviation " + short_num(rep.spectral_deviation) + " exceeds " + short_num(cfg.solver.tol);
  }
}

void cmd_cat_fidelity(const RunConfig& cfg, CommandResult& r, Writer& w) {
  CatFidelityReport rep;
  try {
    rep = cat_fidelity(cfg.model.rabi);
  } catch (const ChargeResolutionError& ex) {
    w.json_file("cat_fidelity.json", {{"pass", false}, {"error", ex.what()}});
    r.exit_code = kExitCatFidelity;
    r.message = ex.what();
    add(r, "pass", "false");
    return;
  }
  const bool pass = rep.one_per_charge && rep.min_fidelity() >= 1.0 - cfg.solver.tol;
  json j = rep.to_json();
  j["pass"] = pass;
  j["min_fidelity_required"] = 1.0 - cfg.solver.tol;
  w.json_file("cat_fidelity.json", j);
  std::string csv = "k,charge,fidelity,ed_energy,analytic_energy\n";
  for (int k = 0; k < 3; ++k) {
    csv += std::to_string(k) + ',' + std::to_string(rep.charge[k]) + ',' + num(rep.fidelity[k]) + ',' +
           num(rep.ed_energy[k]) + ',' + num(rep.analytic_energy[k]) + '\n';
  }
  w.csv_file("cat_fidelity.csv", csv);
  add(r, "pass", pass ? "true" : "false");
  add(r, "min_fidelity", rep.min_fidelity());
  add(r, "subspace_overlap", rep.subspace_overlap);
  add(r, "cutoff", static_cast<long long>(rep.cutoff));
  if (!pass) {
    r.exit_code = kExitCatFidelity;
    r.message = "minimum fidelity " + short_num(rep.min_fidelity()) + " below " + short_num(1.0 - cfg.solver.tol);
  }
}

void cmd_potts_compare(const RunConfig& cfg, CommandResult& r, Writer& w) {
  PottsFit fit;
  try {
    fit = fit_effective_potts(cfg.model.chain, lanczos(cfg.solver));
  } catch (const RegimeError& ex) {
    w.json_file("potts_compare.json", {{"pass", false}, {"regime_error", ex.what()}});
    r.exit_code = kExitPottsCompare;
    r.message = ex.what();
    add(r, "pass", "false");
    add(r, "regime", "violated");
    return;
  }
  constexpr double kParamTol = 0.15;
  const bool pass = fit.deviation <= cfg.solver.tol && fit.f_relative_error <= kParamTol &&
                    fit.J_relative_error <= kParamTol;
  json j = fit.to_json();
  j["pass"] = pass;
  j["deviation_tolerance"] = cfg.solver.tol;
  j["parameter_tolerance"] = kParamTol;
  w.json_file("potts_compare.json", j);
  std::string csv = "index,level,fitted_level\n";
  for (std::size_t i = 0; i < fit.levels.size(); ++i) {
    csv += std::to_string(i) + ',' + num(fit.levels[i]) + ',' + num(fit.fitted_levels[i]) + '\n';
  }
  w.csv_file("potts_compare.csv", csv);
  add(r, "pass", pass ? "true" : "false");
  add(r, "deviation", fit.deviation);
  add(r, "f_P", fit.fitted.f_P);
  add(r, "J_P", fit.fitted.J_P);
  add(r, "f_relative_error", fit.f_relative_error);
  add(r, "J_relative_error", fit.J_relative_error);
  if (!pass) {
    r.exit_code = kExitPottsCompare;
    r.message = "Potts fit outside tolerance";
  }
}

void cmd_fk_verify(const RunConfig& cfg, CommandResult& r, Writer& w) {
  const PottsParams& p = cfg.model.potts;
  ParafermionFormCheck form = verify_parafermion_form(p);
  ParafermionRelations rel = check_parafermion_relations(fk_transform(p.L));
  const bool literal = cfg.solver.fk_identity == "literal";
  const double identity = literal ? form.residual : form.relabeled_residual;
  const bool pass = identity <= cfg.solver.tol && rel.max() <= cfg.solver.tol;
  json j = {{"L", p.L},
            {"f_P", p.f_P},
            {"phi", p.phi},
            {"J_P", p.J_P},
            {"theta", p.theta},
            {"residual", form.residual},
            {"relabeled_residual", form.relabeled_residual},
            {"spectral_residual", form.spectral_residual},
            {"relations",
             {{"gamma_gamma", rel.gamma_gamma},
              {"delta_delta", rel.delta_delta},
              {"gamma_delta", rel.gamma_delta},
              {"cubes", rel.cubes}}},
            {"identity", cfg.solver.fk_identity},
            {"tolerance", cfg.solver.tol},
            {"pass", pass}};
  w.json_file("fk_verify.json", j);
  std::string csv = "check,residual\n";
  for (auto [k, v] : std::vector<std::pair<std::string, double>>{{"literal", form.residual},
                                                                  {"relabeled", form.relabeled_residual},
                                                                  {"spectral", form.spectral_residual},
                                                                  {"gamma_gamma", rel.gamma_gamma},
                                                                  {"delta_delta", rel.delta_delta},
                                                                  {"gamma_delta", rel.gamma_delta},
                                                                  {"cubes", rel.cubes}}) {
    csv += k + ',' + num(v) + '\n';
  }
  w.csv_file("fk_verify.csv", csv);
  add(r, "pass", pass ? "true" : "false");
  add(r, "residual", form.residual);
  add(r, "relabeled_residual", form.relabeled_residual);
  add(r, "spectral_residual", form.spectral_residual);
  add(r, "relations_residual", rel.max());
  if (!pass) {
    r.exit_code = kExitFkVerify;
    r.message = std::string(literal ? "literal" : "relabeled") + " identity residual " + short_num(identity) +
                " or relation residual " + short_num(rel.max()) + " exceeds " + short_num(cfg.solver.tol);
  }
}

void cmd_disorder(const RunConfig& cfg, CommandResult& r, Writer& w) {
  EvolveOptions eo;
  eo.step_tol = cfg.solver.tol;
  const auto& e = cfg.experiment;
  DisorderEnsemble ens =
      disorder_sz_experiment(cfg.model.qb, e.sigma_over_omega, e.realizations, e.seed, e.t_max, e.n_points, eo);
  json s = ens.summary();
  s["mean"] = ens.mean;
  s["times"] = ens.times;
  w.json_file("disorder.json", s);
  std::ostringstream csv;
  ens.write_csv(csv);
  w.csv_file("disorder.csv", csv.str());
  add(r, "realizations", static_cast<long long>(ens.realizations.size()));
  add(r, "failures", static_cast<long long>(ens.failures));
  add(r, "max_mean_deviation", ens.max_mean_deviation);
  add(r, "mean_max_deviation", ens.mean_max_deviation);
  add(r, "seed", std::to_string(e.seed));
  if (ens.failures > 0) {
    r.exit_code = kExitDisorder;
    r.message = std::to_string(ens.failures) + " realizations failed";
  }
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

json versions() {
  return {{"z3sim", version()},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

}  // namespace

std::string version() { return Z3SIM_VERSION; }

std::string summary_line(const CommandResult& r) {
  std::string s;
  for (const auto& [k, v] : r.summary) {
    if (!s.empty()) s += ' ';
    std::string val = v;
    std::replace(val.begin(), val.end(), ' ', '_');
    s += k + '=' + val;
  }
  return s;
}

CommandResult run_command(const RunConfig& cfg) {
  CommandResult r;
  Writer w(cfg.output, r);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.command) {
      case Command::Spectrum:
        cmd_spectrum(cfg, r, w);
        break;
      case Command::MapVerify:
        cmd_map_verify(cfg, r, w);
        break;
      case Command::CatFidelity:
        cmd_cat_fidelity(cfg, r, w);
        break;
      case Command::PottsCompare:
        cmd_potts_compare(cfg, r, w);
        break;
      case Command::FkVerify:
        cmd_fk_verify(cfg, r, w);
        break;
      case Command::Disorder:
        cmd_disorder(cfg, r, w);
        break;
    }
  } catch (const ConvergenceError& ex) {
    r.exit_code = kExitNonConvergence;
    r.message = ex.what();
  } catch (const TruncationError& ex) {
    r.exit_code = kExitNonConvergence;
    r.message = ex.what();
  } catch (const DimensionError& ex) {
    r.exit_code = kExitConfig;
    r.message = ex.what();
  } catch (const std::invalid_argument& ex) {
    r.exit_code = kExitConfig;
    r.message = ex.what();
  } catch (const std::exception& ex) {
    r.exit_code = kExitInternal;
    r.message = ex.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest = {{"manifest_version", 1},
                   {"command", to_string(cfg.command)},
                   {"config", cfg.to_json()},
                   {"seed", cfg.experiment.seed},
                   {"versions", versions()},
                   {"threads", worker_count()},
                   {"started_utc", started},
                   {"wall_time_s", wall},
                   {"exit_code", r.exit_code},
                   {"message", r.message},
                   {"files", r.files}};
  w.text("manifest.json", manifest.dump(2) + "\n");

  r.summary.insert(r.summary.begin(), {{"command", to_string(cfg.command)}, {"exit", std::to_string(r.exit_code)}});
  r.summary.emplace_back("wall_s", short_num(wall));
  return r;
}

}  // namespace z3sim::cli
