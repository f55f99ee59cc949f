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

// Reductions between LWE and EDCP in both directions, their decisional
// versions, and the conversions between EDCP variants.

#ifndef DIHEDRAL_REDUCTIONS_HPP_
#define DIHEDRAL_REDUCTIONS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dihedral/core_math.hpp"
#include "dihedral/edcp_model.hpp"
#include "dihedral/oracles.hpp"
#include "dihedral/random.hpp"
#include "dihedral/statevector.hpp"

namespace dihedral {

struct ReductionDiagnostics {
  std::int64_t attempts = 0;
  std::int64_t successes = 0;
  std::vector<std::int64_t> measured;  // last measured classical value
  double accept_probability = 1.0;     // analytic, when the step defines one
  double l2_deviation = 0.0;           // state-preparation error (exact here)
  std::int64_t support_size = 0;       // of the last post-measurement state
};

template <class Payload>
struct ReductionOutcome {
  std::optional<Payload> payload;
  ReductionDiagnostics diagnostics;

  bool success() const { return payload.has_value(); }
};

// ---------------------------------------------------------------------------
// EDCP -> LWE

// One LWE sample (a', b) from one G-EDCP state: QFT and measure the secret
// register, lift j into Z_N, QFT and measure it. Throws PreconditionError
// when j does not fit the lift window.
LweSample edcp_to_lwe_sample(const SparseState& state, const EdcpParams& params,
                             Rng& rng);

// Width of the error law of the produced samples, N / (sqrt(2) r): the
// measured value is distributed as the square of the Gaussian amplitude.
double edcp_to_lwe_error_width(const EdcpParams& params);

using DlweDecider = std::function<LweVerdict(const std::vector<LweSample>&)>;

struct DlweResult {
  std::vector<LweSample> samples;
  std::optional<LweVerdict> verdict;  // set when a decider is supplied
};

DlweResult dedcp_to_dlwe(const std::vector<SparseState>& states,
                         const EdcpParams& params, Rng& rng,
                         const DlweDecider& decide = {});

// ---------------------------------------------------------------------------
// LWE -> EDCP

struct GridSpec {
  std::int64_t q;
  int c = 8;
  int k = 1;
  std::vector<double> w;  // offsets in [0, 1)

  double z() const { return static_cast<double>(q) / c; }
  double qbar() const { return static_cast<double>(c); }

  static GridSpec sample(std::int64_t q, int m, int c, int k, Rng& rng);
};

// Componentwise floor((x_i / z - w_i) mod qbar).
std::vector<std::int64_t> grid_fn(const std::vector<double>& x, const GridSpec& spec);

// sum_j sum_s rho_r(j)|j>|s> over the window and Z_q^n.
SparseState uniform_secret_superposition(std::int64_t q, int n, const GaussianParam& g);

struct CubeOptions {
  int c = 8;
  int k = 1;
  int ell = 1;
  bool enforce_theorem_bound = true;
  std::int64_t max_attempts = 0;  // 0 means 64 * ell
  std::int64_t state_budget = std::int64_t{1} << 22;
};

// 1 / (4 c k kappa alpha q^{n/m}).
double cube_width_bound(const LweParams& p, int c, int k, int kappa);

class CubeReduction {
 public:
  CubeReduction(const LwePublic& pub, const GaussianParam& g, const CubeOptions& opts);

  // One repetition with a fresh grid offset w.
  ReductionOutcome<SparseState> attempt(Rng& rng) const;

 private:
  LwePublic pub_;
  GaussianParam g_;
  CubeOptions opts_;
  std::shared_ptr<const SparseState> initial_;
};

ReductionOutcome<std::vector<SparseState>> lwe_to_edcp_cube(
    const LwePublic& pub, double r, int kappa, const CubeOptions& opts, Rng& rng);

struct BallOptions {
  double R = 0;          // 0 selects the default radius
  std::int64_t L = 0;    // 0 selects min(2^m, int64 headroom)
  int ell = 1;
  bool enforce_theorem_bound = true;
  std::int64_t max_attempts = 0;  // 0 means 64 * ell
};

// 1 / (6 sqrt(2 pi e) sqrt(m kappa) ell alpha q^{cols/m}).
double ball_width_bound(const LweParams& p, int kappa, int ell, int cols);

// Public radius for the decisional reduction, computed on the (n+1)-column
// lattice bound: min{q, sqrt(m) q^{(m-n-1)/m} / (2 sqrt(2 pi e))} / 3.
double decisional_ball_radius(std::int64_t q, int m, int n);

class BallReduction {
 public:
  // `search` selects the search flavor (radius lambda1(A)/3, theorem bound
  // on q^{n/m}); otherwise the decisional flavor on [A | b].
  BallReduction(const LwePublic& pub, const GaussianParam& g, const BallOptions& opts,
                bool search = true,
                std::shared_ptr<const SparseState> initial = nullptr);

  double radius() const { return R_; }
  std::int64_t grid() const { return L_; }

  // Measures the ball register once and returns the collapsed (j, s) state.
  // Success means one s per j over the whole window in arithmetic progression.
  ReductionOutcome<SparseState> attempt(Rng& rng) const;

 private:
  LwePublic pub_;
  GaussianParam g_;
  BallOptions opts_;
  double R_ = 0;
  std::int64_t L_ = 0;
  std::int64_t radius_sq_scaled_ = 0;  // floor((L R)^2)
  std::shared_ptr<const SparseState> initial_;
  std::vector<double> born_cdf_;
  std::vector<std::int64_t> first_center_;  // coordinate 0 of A s - j b per support point

  std::int64_t center_coord(std::size_t idx, int i) const;
};

ReductionOutcome<std::vector<SparseState>> lwe_to_edcp_ball(
    const LwePublic& pub, double r, int kappa, const BallOptions& opts, Rng& rng);

// Exact count ratio for m <= 4, Monte-Carlo otherwise.
double ball_intersection_ratio(int m, double R, const std::vector<double>& dbar,
                               std::int64_t L, std::int64_t q,
                               std::int64_t mc_samples = 200000,
                               std::uint64_t mc_seed = 1);

// Runs the ball procedure on (A, b) and emits every collapsed state.
ReductionOutcome<std::vector<SparseState>> dlwe_to_dedcp(
    const LwePublic& pub, double r, int kappa, const BallOptions& opts, Rng& rng,
    std::shared_ptr<const SparseState> initial = nullptr);

// ---------------------------------------------------------------------------
// EDCP variants

// G-EDCP(r) -> U-EDCP(M), M = c r.
ReductionOutcome<SparseState> g_to_u(const SparseState& state, double r, double c,
                                     Rng& rng);
ReductionOutcome<SparseState> g_to_u_size(const SparseState& state, std::int64_t M,
                                          Rng& rng);

// U-EDCP(M) -> G-EDCP(M / sqrt(kappa)); the offset becomes x + floor((M-1)/2) s.
ReductionOutcome<SparseState> u_to_g(const SparseState& state, std::int64_t M,
                                     int kappa, Rng& rng);

// G-EDCP(r1) -> G-EDCP(r2) with r2 < r1, or U-EDCP(M1) -> U-EDCP(M2), M2 < M1.
ReductionOutcome<SparseState> edcp_self_reduce(const SparseState& state,
                                               const WeightFn& from,
                                               const WeightFn& to, Rng& rng);

struct DcpOutput {
  SparseState state;        // |0>|x> + |1>|x + 2s>
  bool ambiguous_halving;   // N even: 2s has two preimages
};

struct DcpOptions {
  double wide_c = 0.25;  // M' = 2 floor(c r) + 1 on the wide branch
};

bool dcp_wide_branch(std::int64_t N, double r);

ReductionOutcome<DcpOutput> gedcp_to_dcp(const SparseState& state, std::int64_t N,
                                         double r, Rng& rng,
                                         const DcpOptions& opts = {});

}  // namespace dihedral

#endif  // DIHEDRAL_REDUCTIONS_HPP_
