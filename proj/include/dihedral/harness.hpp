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

// Seeded experiment driver behind the dihedral-bridge CLI.

#ifndef DIHEDRAL_HARNESS_HPP_
#define DIHEDRAL_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dihedral {

enum class Experiment {
  kRoundtripCube,
  kRoundtripBall,
  kEdcp2LweStats,
  kDecisionalE2L,
  kDecisionalL2E,
  kGridClaims,
  kBallClaims,
  kVariantConversions,
  kDcpChain,
  kMathChecks,
};

std::string_view experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);
std::vector<std::string> experiment_names();

// Every statistical cutoff used by a pass/fail decision.
struct Thresholds {
  double chi2_p_floor = 0.001;
  double sampler_tv_ceiling = 0.01;
  double reduction_tv_ceiling = 0.05;
  double sigma_slack = 3.0;
  double poisson_rel_tol = 1e-9;
  double roundtrip_success_floor = 0.8;
  double ball_ratio_floor = 0.5;
  double ball_constant_stability = 0.2;
  double distinguisher_advantage_floor = 0.5;

  // Throws ParameterError on an unknown name.
  void set(const std::string& name, double value);
  nlohmann::ordered_json to_json() const;
};

struct RunConfig {
  Experiment experiment = Experiment::kMathChecks;
  std::map<std::string, std::string> params;  // "threshold.<name>" overrides
  std::uint64_t seed = 1;
  std::int64_t trials = 1;
  std::string out_format = "json";
  std::string out_path;  // empty writes to stdout
};

struct ExperimentReport {
  nlohmann::ordered_json config;
  std::vector<nlohmann::ordered_json> trials;
  nlohmann::ordered_json aggregates;  // includes the "checks" array
  bool pass = false;
  double wall_time_ms = 0;
};

// Validates the whole configuration before the first trial (ParameterError),
// then runs the trials on the worker pool and aggregates in trial order.
ExperimentReport run(const RunConfig& config);

nlohmann::ordered_json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::ordered_json& j);

// Header, one row per trial, then `summary,"key=value;..."`.
std::string to_csv(const ExperimentReport& report);

// format is "json" or "csv"; an empty path writes to stdout.
void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path);

// DIHEDRAL_BRIDGE_THREADS when set and positive, else the hardware count.
int worker_count();

}  // namespace dihedral

#endif  // DIHEDRAL_HARNESS_HPP_
