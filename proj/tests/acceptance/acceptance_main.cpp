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

// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dihedral/harness.hpp"

namespace {

using dihedral::Experiment;
using dihedral::ExperimentReport;
using dihedral::RunConfig;

struct Run {
  Experiment experiment;
  std::int64_t trials;
  std::map<std::string, std::string> params;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::vector<Run> runs;
};

constexpr std::uint64_t kSeed = 20260101;

RunConfig config_for(const Run& r, std::uint64_t seed = kSeed) {
  RunConfig c;
  c.experiment = r.experiment;
  c.trials = r.trials;
  c.params = r.params;
  c.seed = seed;
  return c;
}

std::string failed_checks(const ExperimentReport& rep) {
  std::ostringstream out;
  for (const auto& c : rep.aggregates.at("checks")) {
    if (c.at("pass").get<bool>()) continue;
    out << " " << c.at("name").get<std::string>() << "=" << c.at("value").get<double>() << " "
        << c.at("op").get<std::string>() << " " << c.at("threshold").get<double>() << ";";
  }
  return out.str();
}

std::vector<Criterion> criteria() {
  const auto suite = [](const char* s) { return std::map<std::string, std::string>{{"suite", s}}; };
  return {
      {1, "Poisson summation identity", 1, {{Experiment::kMathChecks, 1, suite("poisson")}}},
      {2, "Gaussian tail bound", 1, {{Experiment::kMathChecks, 1, suite("tail")}}},
      // 1000 trials of 100 shots each.
      {3, "QFT and simulator suite", 30, {{Experiment::kMathChecks, 1000, suite("simulator")}}},
      {4, "quantum rejection sampling rate", 30,
       {{Experiment::kMathChecks, 10000, suite("rejection")}}},
      {5, "cube separation claims", 120, {{Experiment::kGridClaims, 10000, {}}}},
      {6, "ball intersection ratio", 60,
       {{Experiment::kBallClaims, 1, {{"calibrate", "false"}}}}},
      {7, "EDCP to LWE sample law", 120, {{Experiment::kEdcp2LweStats, 10000, {}}}},
      {8, "decisional EDCP to LWE", 60, {{Experiment::kDecisionalE2L, 2000, {}}}},
      {9, "LWE to EDCP via cubes", 300, {{Experiment::kRoundtripCube, 2000, {}}}},
      {10, "LWE to EDCP to LWE round trip", 600, {{Experiment::kRoundtripBall, 100, {}}}},
      {11, "decisional LWE to EDCP", 120, {{Experiment::kDecisionalL2E, 1000, {}}}},
      {12, "variant conversions", 300, {{Experiment::kVariantConversions, 2000, {}}}},
  };
}

bool report_line(bool pass, int id, const std::string& title, double secs, double budget,
                 const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << " " << title << " (" << secs << " s";
  if (budget > 0) std::cout << ", budget " << budget << " s";
  std::cout << ")" << detail << std::endl;
  return pass;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Reruns every experiment with the same seed, once on a single worker and
// once on several, and compares aggregates and trial records.
bool determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Run> runs;
  for (const Criterion& c : criteria()) {
    for (Run r : c.runs) {
      r.trials = std::min<std::int64_t>(r.trials, r.experiment == Experiment::kRoundtripBall ? 4 : 200);
      runs.push_back(std::move(r));
    }
  }
  runs.push_back({Experiment::kBallClaims, 300, {}});
  runs.push_back({Experiment::kDcpChain, 50, {}});
  runs.push_back({Experiment::kMathChecks, 200, {{"suite", "sampler"}}});
  std::string mismatches;
  for (const Run& r : runs) {
    setenv("DIHEDRAL_BRIDGE_THREADS", "1", 1);
    const ExperimentReport a = dihedral::run(config_for(r));
    setenv("DIHEDRAL_BRIDGE_THREADS", "3", 1);
    const ExperimentReport b = dihedral::run(config_for(r));
    unsetenv("DIHEDRAL_BRIDGE_THREADS");
    if (a.aggregates.dump() != b.aggregates.dump() || a.trials != b.trials) {
      mismatches += " " + std::string(dihedral::experiment_name(r.experiment));
    }
  }
  return report_line(mismatches.empty(), 13, "same seed reproduces aggregates", seconds_since(t0),
                     0, mismatches.empty() ? "" : " differing:" + mismatches);
}

}  // namespace

int main() {
  bool all = true;
  for (const Criterion& c : criteria()) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    for (const Run& r : c.runs) {
      try {
        const ExperimentReport rep = dihedral::run(config_for(r));
        pass = pass && rep.pass;
        detail += failed_checks(rep);
      } catch (const std::exception& e) {
        pass = false;
        detail += std::string(" error: ") + e.what();
      }
    }
    const double secs = seconds_since(t0);
    if (secs > c.budget_s) {
      pass = false;
      detail += " over budget;";
    }
    all = report_line(pass, c.id, c.title, secs, c.budget_s, detail) && all;
  }
  all = determinism() && all;
  return all ? 0 : 1;
}
