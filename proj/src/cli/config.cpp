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


#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "z3sim/cli.hpp"
#include "z3sim/transforms.hpp"

namespace z3sim::cli {

using nlohmann::json;

namespace {

const std::map<Command, std::string> kCommandNames = {
    {Command::Spectrum, "spectrum"},          {Command::MapVerify, "map-verify"},
    {Command::CatFidelity, "cat-fidelity"},   {Command::PottsCompare, "potts-compare"},
    {Command::FkVerify, "fk-verify"},         {Command::Disorder, "disorder"},
};

const std::map<ModelType, std::string> kModelNames = {
    {ModelType::Rabi, "rabi"},
    {ModelType::QBRing, "qb_ring"},
    {ModelType::Potts, "potts"},
    {ModelType::RabiChain, "rabi_chain"},
};

void check_keys(const json& block, const std::string& where, const std::set<std::string>& allowed) {
  if (!block.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : block.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& block, const std::string& where, const std::string& key, double fallback) {
  if (!block.contains(key)) return fallback;
  const json& v = block.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": not finite");
  return x;
}

long long get_int(const json& block, const std::string& where, const std::string& key, long long fallback) {
  if (!block.contains(key)) return fallback;
  const json& v = block.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<long long>();
}

std::string get_string(const json& block, const std::string& where, const std::string& key,
                       const std::string& fallback) {
  if (!block.contains(key)) return fallback;
  const json& v = block.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& block, const std::string& where, const std::string& key, bool fallback) {
  if (!block.contains(key)) return fallback;
  const json& v = block.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
  return v.get<bool>();
}

ModelType default_model(Command c) {
  switch (c) {
    case Command::MapVerify:
    case Command::Disorder:
      return ModelType::QBRing;
    case Command::PottsCompare:
      return ModelType::RabiChain;
    case Command::FkVerify:
      return ModelType::Potts;
    default:
      return ModelType::Rabi;
  }
}

double default_tol(Command c) {
  switch (c) {
    case Command::Spectrum:
      return 1e-10;
    case Command::MapVerify:
      return 1e-7;
    case Command::CatFidelity:
      return 0.01;
    case Command::PottsCompare:
      return 0.05;
    case Command::FkVerify:
      return 1e-12;
    case Command::Disorder:
      return 1e-12;
  }
  return 1e-10;
}

int default_levels(Command c) { return c == Command::MapVerify ? 15 : 10; }

int default_cutoff(Command c, const ModelConfig& m) {
  switch (m.type) {
    case ModelType::Rabi:
      return ::z3sim::default_cutoff(m.rabi.alpha());
    case ModelType::QBRing:
      return c == Command::MapVerify ? 14 : 8;
    case ModelType::RabiChain:
      return c == Command::PottsCompare ? 24 : 6;
    case ModelType::Potts:
      return 0;
  }
  return 0;
}

Matrix3c read_matrix(const json& j, const std::string& where) {
  check_keys(j, where, {"re", "im"});
  Matrix3c m = Matrix3c::Zero();
  for (const char* part : {"re", "im"}) {
    if (!j.contains(part)) continue;
    const json& a = j.at(part);
    if (!a.is_array() || a.size() != 3) throw ConfigError(where + "." + part + ": expected a 3x3 array");
    for (int r = 0; r < 3; ++r) {
      if (!a[r].is_array() || a[r].size() != 3) throw ConfigError(where + "." + part + ": expected a 3x3 array");
      for (int c = 0; c < 3; ++c) {
        if (!a[r][c].is_number()) throw ConfigError(where + "." + part + ": expected numbers");
        double x = a[r][c].get<double>();
        if (part[0] == 'r') {
          m(r, c) += x;
        } else {
          m(r, c) += cplx(0.0, x);
        }
      }
    }
  }
  return m;
}

json write_matrix(const Matrix3c& m) {
  json re = json::array(), im = json::array();
  for (int r = 0; r < 3; ++r) {
    re.push_back({m(r, 0).real(), m(r, 1).real(), m(r, 2).real()});
    im.push_back({m(r, 0).imag(), m(r, 1).imag(), m(r, 2).imag()});
  }
  return {{"re", re}, {"im", im}};
}

ModelConfig parse_model(const json& j, Command c) {
  const std::string w = "model";
  ModelConfig m;
  m.type = default_model(c);
  if (!j.is_null()) {
    if (!j.is_object()) throw ConfigError("model: expected an object");
    if (j.contains("type")) {
      std::string t = get_string(j, w, "type", "");
      bool found = false;
      for (const auto& [k, v] : kModelNames) {
        if (v == t) {
          m.type = k;
          found = true;
        }
      }
      if (!found) throw ConfigError("model.type: unknown model '" + t + "'");
    }
  }
  json b = j.is_null() ? json::object() : j;
  switch (m.type) {
    case ModelType::Rabi:
      check_keys(b, w, {"type", "omega_R", "B", "phi", "lambda"});
      m.rabi.omega_R = get_number(b, w, "omega_R", 1.0);
      m.rabi.B = get_number(b, w, "B", 0.02);
      m.rabi.phi = get_number(b, w, "phi", 2.0 * std::numbers::pi / 3.0);
      m.rabi.lambda = get_number(b, w, "lambda", 2.0);
      break;
    case ModelType::QBRing: {
      check_keys(b, w, {"type", "epsilon", "omega_QB", "g", "eta", "interaction"});
      m.qb.epsilon = get_number(b, w, "epsilon", 0.2);
      m.qb.omega_QB = get_number(b, w, "omega_QB", 1.0);
      m.qb.g = get_number(b, w, "g", 0.3);
      m.qb.eta = get_number(b, w, "eta", 1.0);
      const json a = b.value("interaction", json("x_plus_xdag"));
      if (a.is_string()) {
        m.interaction = a.get<std::string>();
        if (m.interaction == "x_plus_xdag") {
          m.qb.A = QBRingParams::default_interaction();
        } else if (m.interaction == "optomechanical") {
          m.qb.A = QBRingParams::optomechanical_interaction();
        } else {
          throw ConfigError("model.interaction: expected x_plus_xdag, optomechanical or a {re, im} matrix");
        }
      } else {
        m.interaction = "custom";
        m.qb.A = read_matrix(a, "model.interaction");
      }
      break;
    }
    case ModelType::Potts:
      check_keys(b, w, {"type", "L", "f_P", "phi", "J_P", "theta"});
      m.potts.L = static_cast<int>(get_int(b, w, "L", 3));
      m.potts.f_P = get_number(b, w, "f_P", 1.0);
      m.potts.phi = get_number(b, w, "phi", 0.3);
      m.potts.J_P = get_number(b, w, "J_P", 0.7);
      m.potts.theta = get_number(b, w, "theta", 0.2);
      break;
    case ModelType::RabiChain:
      check_keys(b, w, {"type", "L", "omega_R", "B", "phi", "lambda", "J"});
      m.chain.L = static_cast<int>(get_int(b, w, "L", 2));
      m.chain.site.omega_R = get_number(b, w, "omega_R", 1.0);
      m.chain.site.B = get_number(b, w, "B", 0.01);
      m.chain.site.phi = get_number(b, w, "phi", 0.0);
      m.chain.site.lambda = get_number(b, w, "lambda", 2.0);
      m.chain.J = get_number(b, w, "J", 0.002);
      break;
  }
  return m;
}

void require_model(Command c, ModelType t) {
  if (c == Command::Spectrum) return;
  ModelType need = default_model(c);
  if (t != need) {
    throw ConfigError(to_string(c) + " requires model.type = " + to_string(need) + ", got " + to_string(t));
  }
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "both") return Format::Both;
  throw ConfigError("output.format: expected json, csv or both, got '" + s + "'");
}

}  // namespace

std::string to_string(Command c) { return kCommandNames.at(c); }
std::string to_string(ModelType m) { return kModelNames.at(m); }

std::string to_string(Format f) {
  switch (f) {
    case Format::Json:
      return "json";
    case Format::Csv:
      return "csv";
    case Format::Both:
      return "both";
  }
  return "both";
}

Command parse_command(const std::string& s) {
  for (const auto& [k, v] : kCommandNames) {
    if (v == s) return k;
  }
  throw ConfigError("unknown command '" + s + "'");
}

json RunConfig::to_json() const {
  json m;
  m["type"] = to_string(model.type);
  switch (model.type) {
    case ModelType::Rabi:
      m.update({{"omega_R", model.rabi.omega_R}, {"B", model.rabi.B}, {"phi", model.rabi.phi},
                {"lambda", model.rabi.lambda}});
      break;
    case ModelType::QBRing:
      m.update({{"epsilon", model.qb.epsilon}, {"omega_QB", model.qb.omega_QB}, {"g", model.qb.g},
                {"eta", model.qb.eta}});
      m["interaction"] = model.interaction == "custom" ? write_matrix(model.qb.A) : json(model.interaction);
      break;
    case ModelType::Potts:
      m.update({{"L", model.potts.L}, {"f_P", model.potts.f_P}, {"phi", model.potts.phi},
                {"J_P", model.potts.J_P}, {"theta", model.potts.theta}});
      break;
    case ModelType::RabiChain:
      m.update({{"L", model.chain.L}, {"omega_R", model.chain.site.omega_R}, {"B", model.chain.site.B},
                {"phi", model.chain.site.phi}, {"lambda", model.chain.site.lambda}, {"J", model.chain.J}});
      break;
  }
  json s = {{"levels", solver.levels},         {"tol", solver.tol},
            {"block_size", solver.block_size}, {"drift_check", solver.drift_check},
            {"drift_step", solver.drift_step}, {"fk_identity", solver.fk_identity}};
  if (model.type != ModelType::Potts) s["cutoff"] = solver.cutoff;
  return {{"command", to_string(command)},
          {"model", m},
          {"solver", s},
          {"experiment",
           {{"seed", experiment.seed},
            {"realizations", experiment.realizations},
            {"sigma_over_omega", experiment.sigma_over_omega},
            {"t_max", experiment.t_max},
            {"n_points", experiment.n_points}}},
          {"output", {{"dir", output.dir}, {"format", to_string(output.format)}}}};
}

RunConfig parse_config(const json& input, std::optional<Command> command, const Overrides& ov) {
  json j = input.is_null() ? json::object() : input;
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw ConfigError("manifest without a config section");
    j = j.at("config");
  }
  check_keys(j, "config", {"command", "model", "solver", "experiment", "output"});

  RunConfig cfg;
  if (j.contains("command")) {
    Command fc = parse_command(get_string(j, "config", "command", ""));
    if (command && *command != fc) {
      throw ConfigError("command '" + to_string(*command) + "' does not match config command '" + to_string(fc) + "'");
    }
    cfg.command = fc;
  } else if (command) {
    cfg.command = *command;
  } else {
    throw ConfigError("no command given");
  }
  const Command c = cfg.command;

  cfg.model = parse_model(j.value("model", json()), c);
  require_model(c, cfg.model.type);

  const json s = j.value("solver", json::object());
  check_keys(s, "solver", {"cutoff", "levels", "tol", "block_size", "drift_check", "drift_step", "fk_identity"});
  const bool has_cutoff = s.contains("cutoff") || ov.cutoff;
  cfg.solver.cutoff = static_cast<int>(get_int(s, "solver", "cutoff", default_cutoff(c, cfg.model)));
  if (ov.cutoff) cfg.solver.cutoff = *ov.cutoff;
  cfg.solver.levels = static_cast<int>(get_int(s, "solver", "levels", default_levels(c)));
  cfg.solver.tol = ov.tol ? *ov.tol : get_number(s, "solver", "tol", default_tol(c));
  cfg.solver.block_size = static_cast<int>(get_int(s, "solver", "block_size", 0));
  cfg.solver.drift_check = get_bool(s, "solver", "drift_check", true);
  cfg.solver.drift_step = static_cast<int>(get_int(s, "solver", "drift_step", 8));
  cfg.solver.fk_identity = get_string(s, "solver", "fk_identity", "literal");

  if (cfg.model.type == ModelType::Potts) {
    if (has_cutoff) throw ConfigError("solver.cutoff: the potts model has no bosonic modes");
  } else if (cfg.solver.cutoff < 2) {
    throw ConfigError("solver.cutoff: must be at least 2");
  }
  if (cfg.solver.levels < 1) throw ConfigError("solver.levels: must be positive");
  if (!(cfg.solver.tol > 0.0)) throw ConfigError("solver.tol: must be positive");
  if (cfg.solver.block_size < 0) throw ConfigError("solver.block_size: must be non-negative");
  if (cfg.solver.drift_step < 1) throw ConfigError("solver.drift_step: must be positive");
  if (cfg.solver.fk_identity != "literal" && cfg.solver.fk_identity != "relabeled") {
    throw ConfigError("solver.fk_identity: expected literal or relabeled");
  }

  const json e = j.value("experiment", json::object());
  check_keys(e, "experiment", {"seed", "realizations", "sigma_over_omega", "t_max", "n_points"});
  if (e.contains("seed")) {
    const json& sv = e.at("seed");
    if (!sv.is_number_integer() || (!sv.is_number_unsigned() && sv.get<long long>() < 0)) {
      throw ConfigError("experiment.seed: expected a non-negative integer");
    }
    cfg.experiment.seed = sv.get<std::uint64_t>();
  }
  if (ov.seed) cfg.experiment.seed = *ov.seed;
  cfg.experiment.realizations = static_cast<int>(get_int(e, "experiment", "realizations", 20));
  cfg.experiment.sigma_over_omega = get_number(e, "experiment", "sigma_over_omega", 0.1);
  cfg.experiment.t_max = get_number(e, "experiment", "t_max", 50.0);
  cfg.experiment.n_points = static_cast<int>(get_int(e, "experiment", "n_points", 500));
  if (cfg.experiment.realizations < 1) throw ConfigError("experiment.realizations: must be positive");
  if (cfg.experiment.sigma_over_omega < 0.0) throw ConfigError("experiment.sigma_over_omega: must be non-negative");
  if (!(cfg.experiment.t_max > 0.0)) throw ConfigError("experiment.t_max: must be positive");
  if (cfg.experiment.n_points < 2) throw ConfigError("experiment.n_points: must be at least 2");

  const json o = j.value("output", json::object());
  check_keys(o, "output", {"dir", "format"});
  cfg.output.dir = ov.out ? *ov.out : get_string(o, "output", "dir", "z3sim_out");
  cfg.output.format = parse_format(ov.format ? *ov.format : get_string(o, "output", "format", "both"));
  if (cfg.output.dir.empty()) throw ConfigError("output.dir: must not be empty");

  cfg.model.rabi.cutoff = cfg.solver.cutoff;
  cfg.model.qb.cutoff = cfg.solver.cutoff;
  cfg.model.chain.site.cutoff = cfg.solver.cutoff;
  try {
    switch (cfg.model.type) {
      case ModelType::Rabi:
        cfg.model.rabi.validate();
        break;
      case ModelType::QBRing:
        cfg.model.qb.validate();
        break;
      case ModelType::Potts:
        cfg.model.potts.validate();
        if (c == Command::FkVerify && cfg.model.potts.L > kMaxParafermionFormSites) {
          throw std::invalid_argument("fk-verify supports L <= " + std::to_string(kMaxParafermionFormSites));
        }
        break;
      case ModelType::RabiChain:
        cfg.model.chain.validate();
        if (c == Command::PottsCompare && cfg.model.chain.L != 2) {
          throw std::invalid_argument("potts-compare requires L = 2");
        }
        break;
    }
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("model: ") + ex.what());
  }
  return cfg;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& ex) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + ex.what());
  }
}

}  // namespace z3sim::cli
