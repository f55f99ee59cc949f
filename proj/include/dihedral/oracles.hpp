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

// Brute-force classical solvers that terminate the reduction chains.

#ifndef DIHEDRAL_ORACLES_HPP_
#define DIHEDRAL_ORACLES_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "dihedral/edcp_model.hpp"
#include "dihedral/statevector.hpp"

namespace dihedral {

struct SolverVerdict {
  std::optional<Residues> secret;
  double score = 0;  // residual sum of squares for LWE
  bool unique = false;
};

// argmin_s sum_i center(b_i - <a_i, s>)^2 over Z_q^n. The first minimizer in
// lexicographic order is reported; `unique` is false on ties.
SolverVerdict solve_lwe_bruteforce(const std::vector<LweSample>& samples, int n,
                                   std::int64_t q, double r_err);

enum class LweVerdict { kRandom, kPlanted };

struct DistinguisherResult {
  LweVerdict verdict;
  double log_likelihood_ratio;  // best planted fit minus uniform
};

// Likelihood ratio between the best-fitting planted model (noise D_{Z,r_err}
// folded mod q) and the uniform model, at equal priors.
DistinguisherResult distinguish_lwe_bruteforce(const std::vector<LweSample>& samples,
                                               int n, std::int64_t q, double r_err);

// D_{Z,r} folded onto Z_q.
std::vector<double> folded_gaussian_pmf(double r, std::int64_t q);

// Reads s from states |0,x> + |1,x+s>, requiring agreement across states.
SolverVerdict solve_dcp_whitebox(const std::vector<SparseState>& states, std::int64_t N);

// All s with 2 s = s_bar mod N.
std::vector<std::int64_t> halve_candidates(std::int64_t s_bar, std::int64_t N);

}  // namespace dihedral

#endif  // DIHEDRAL_ORACLES_HPP_
