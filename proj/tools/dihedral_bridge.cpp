// Copyright 2026 The dihedral-bridge Authors.
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

// dihedral-bridge <experiment> --seed S --trials T --out json|csv
//                 --out-path P [--param key=value]...
//
// Exit codes: 0 pass, 1 threshold failure or runtime error, 2 rejected
// configuration.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dihedral/errors.hpp"
#include "dihedral/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Seeded LWE / EDCP reduction experiments"};
  std::string experiment;
  std::vector<std::string> raw_params;
  dihedral::RunConfig config;
  config.trials = 1000;

  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(dihedral::experiment_names()));
  app.add_option("--seed", config.seed, "64-bit seed")->capture_default_str();
  app.add_option("--trials", config.trials, "Number of trials")->capture_default_str();
  app.add_option("--out", config.out_format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out-path", config.out_path, "Report path (stdout when omitted)");
  app.add_option("--param", raw_params, "Experiment parameter key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (const std::string& kv : raw_params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --param expects key=value, got '" << kv << "'\n";
      return 2;
    }
    if (!config.params.emplace(kv.substr(0, eq), kv.substr(eq + 1)).second) {
      std::cerr << "error: parameter given twice: " << kv.substr(0, eq) << "\n";
      return 2;
    }
  }
  config.experiment = *dihedral::parse_experiment(experiment);

  dihedral::ExperimentReport report;
  try {
    report = dihedral::run(config);
  } catch (const dihedral::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    dihedral::emit_report(report, config.out_format, config.out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << experiment << ": " << (report.pass ? "PASS" : "FAIL") << " ("
            << report.wall_time_ms << " ms)\n";
  return report.pass ? 0 : 1;
}
