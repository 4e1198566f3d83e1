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


#include "CLI11.hpp"
#include "z3sim/cli.hpp"

namespace z3sim::cli {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Z3 Rabi, qubit-boson ring, Potts and clock model simulator", "z3sim"};
  app.set_version_flag("--version", version());

  std::string command, config_path;
  Overrides ov;
  app.add_option("command", command, "spectrum | map-verify | cat-fidelity | potts-compare | fk-verify | disorder")
      ->required()
      ->check(CLI::IsMember({"spectrum", "map-verify", "cat-fidelity", "potts-compare", "fk-verify", "disorder"}));
  app.add_option("--config", config_path, "JSON config file or a previous manifest.json");
  app.add_option("--out", ov.out, "output directory");
  app.add_option("--seed", ov.seed, "experiment seed");
  app.add_option("--tol", ov.tol, "command tolerance");
  app.add_option("--cutoff", ov.cutoff, "Fock cutoff per mode");
  app.add_option("--format", ov.format, "json | csv | both")->check(CLI::IsMember({"json", "csv", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    nlohmann::json j = config_path.empty() ? nlohmann::json::object() : load_config_file(config_path);
    cfg = parse_config(j, parse_command(command), ov);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    out << "command=" << command << " exit=" << kExitConfig << " error=config\n";
    return kExitConfig;
  }

  CommandResult r = run_command(cfg);
  if (!r.message.empty()) err << r.message << "\n";
  out << summary_line(r) << "\n";
  return r.exit_code;
}

}  // namespace z3sim::cli
