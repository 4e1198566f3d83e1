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
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "z3sim/models.hpp"

namespace z3sim::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitMapping = 4,
  kExitCatFidelity = 5,
  kExitPottsCompare = 6,
  kExitFkVerify = 7,
  kExitDisorder = 8,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Spectrum, MapVerify, CatFidelity, PottsCompare, FkVerify, Disorder };
enum class ModelType { Rabi, QBRing, Potts, RabiChain };
enum class Format { Json, Csv, Both };

std::string to_string(Command c);
std::string to_string(ModelType m);
std::string to_string(Format f);
Command parse_command(const std::string& s);

struct ModelConfig {
  ModelType type = ModelType::Rabi;
  RabiParams rabi;
  QBRingParams qb;
  std::string interaction = "x_plus_xdag";  // x_plus_xdag | optomechanical | custom
  PottsParams potts;
  RabiChainParams chain;
};

struct SolverConfig {
  int cutoff = 0;  // per mode, resolved at parse time
  int levels = 10;
  double tol = 0.0;  // command-specific meaning, resolved at parse time
  int block_size = 0;
  bool drift_check = true;
  int drift_step = 8;
  std::string fk_identity = "literal";  // literal | relabeled
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int realizations = 20;
  double sigma_over_omega = 0.1;
  double t_max = 50.0;
  int n_points = 500;
};

struct OutputConfig {
  std::string dir = "z3sim_out";
  Format format = Format::Both;
};

struct RunConfig {
  Command command = Command::Spectrum;
  ModelConfig model;
  SolverConfig solver;
  ExperimentConfig experiment;
  OutputConfig output;

  /// Fully resolved form; parse_config(to_json()) reproduces it.
  nlohmann::json to_json() const;
};

/// Flag values that override the file.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> cutoff;
  std::optional<std::string> format;
};

/// Validates against the schema and fills defaults. Accepts a manifest in
/// place of a config. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j, std::optional<Command> command, const Overrides& ov = {});
nlohmann::json load_config_file(const std::string& path);

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::pair<std::string, std::string>> summary;  // key=value line
  std::vector<std::string> files;
  std::string message;
};

/// Runs one command and writes its outputs and manifest.json into cfg.output.dir.
CommandResult run_command(const RunConfig& cfg);

/// Whole entry point: argument parsing, config, run, summary line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string summary_line(const CommandResult& r);
std::string version();

}  // namespace z3sim::cli
