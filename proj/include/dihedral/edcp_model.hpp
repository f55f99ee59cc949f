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

// LWE, DCP and EDCP instances. Secrets, offsets and noise vectors are ground
// truth for tests; reductions only see the public projections.

#ifndef DIHEDRAL_EDCP_MODEL_HPP_
#define DIHEDRAL_EDCP_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "dihedral/core_math.hpp"
#include "dihedral/modular.hpp"
#include "dihedral/random.hpp"
#include "dihedral/statevector.hpp"

namespace dihedral {

struct LweParams {
  int n = 1;
  std::int64_t q = 2;
  double alpha = 0.5;
  int m = 1;
  int kappa = kDefaultKappa;  // truncation of the noise sampler

  double noise_width() const { return alpha * static_cast<double>(q); }
  void validate() const;
  bool operator==(const LweParams&) const = default;
};

struct LweSample {
  Residues a;
  std::int64_t b = 0;
};

// What a reduction may look at: parameters, A and b.
struct LwePublic {
  LweParams params;
  ResidueMatrix A;
  Residues b;

  // Row i as an LWE sample.
  LweSample sample(int i) const;
};

struct LweInstance {
  LweParams params;
  ResidueMatrix A;
  Residues b;
  Residues s0;                   // test-only
  std::vector<std::int64_t> e0;  // test-only

  LwePublic public_view() const { return {params, A, b}; }
  bool operator==(const LweInstance&) const = default;
};

struct EdcpParams {
  int n = 1;
  std::int64_t N = 2;
  WeightFn dist = WeightFn::indicator01();
  int ell = 1;

  void validate() const;
};

struct EdcpInstance {
  EdcpParams params;
  Residues s;                     // test-only
  std::vector<Residues> offsets;  // test-only
  std::vector<SparseState> states;
};

LweInstance gen_lwe(const LweParams& params, Rng& rng);

// [IntRegister(window), ModRegister(N, n)].
RegisterLayout edcp_layout(const EdcpParams& params);

EdcpInstance gen_edcp(const EdcpParams& params, Rng& rng);

// Basis states |j>|x> with j drawn proportional to dist(j)^2, x uniform.
std::vector<SparseState> gen_decisional_null(const EdcpParams& params, Rng& rng);

// The normalized state sum_j dist(j)|j>|x + j s mod N> in `layout`.
SparseState ideal_edcp_state(const RegisterLayout& layout, const Residues& s,
                             const Residues& x, const WeightFn& dist);

inline constexpr double kVerifyTolerance = 1e-9;

bool verify_edcp_state(const SparseState& state, const Residues& s,
                       const Residues& x, const WeightFn& dist);

// Reads the arithmetic-progression structure of an EDCP-shaped state: one
// label per j over a contiguous window with a constant step. Returns the
// step and the offset x with label(j) = x + j * step.
struct SupportStructure {
  Residues step;
  Residues offset;
  std::int64_t j_lo;
  std::int64_t j_hi;
};
std::optional<SupportStructure> edcp_support_structure(const SparseState& state);

nlohmann::ordered_json to_json(const LweInstance& inst);
LweInstance lwe_instance_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const EdcpParams& params);
EdcpParams edcp_params_from_json(const nlohmann::ordered_json& j);

}  // namespace dihedral

#endif  // DIHEDRAL_EDCP_MODEL_HPP_
