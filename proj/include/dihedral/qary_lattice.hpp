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

// Exhaustive minima of the q-ary lattice Lambda_q(A) = A Z_q^n + q Z^m.

#ifndef DIHEDRAL_QARY_LATTICE_HPP_
#define DIHEDRAL_QARY_LATTICE_HPP_

#include <cstdint>
#include <optional>

#include "dihedral/modular.hpp"
#include "dihedral/random.hpp"

namespace dihedral {

inline constexpr std::int64_t kEnumerationBudget = std::int64_t{1} << 24;

struct LatticeStats {
  std::int64_t lambda1_inf = 0;
  double lambda1_l2 = 0;
  // Lexicographically first coefficient vector attaining the minimum; empty
  // when the minimum is clamped at q.
  std::optional<Residues> witness;
};

// Both functions enumerate x in Z_q^n and throw ResourceError past the
// enumeration budget. Only the field named by the function is meaningful.
LatticeStats lambda1_inf(const ResidueMatrix& A);
LatticeStats lambda1_l2(const ResidueMatrix& A);

// Squared l2 minimum as an exact integer (q^2 when clamped).
std::int64_t lambda1_l2_squared(const ResidueMatrix& A);

// Whether x -> A x mod q is injective on Z_q^n.
bool is_injective(const ResidueMatrix& A);

// q^{(m-n)/m} / 2.
double inf_minimum_bound(std::int64_t q, int m, int n);
// min{q, sqrt(m) q^{(m-n)/m} / (2 sqrt(2 pi e))}.
double l2_minimum_bound(std::int64_t q, int m, int n);

ResidueMatrix random_matrix(int m, int n, std::int64_t q, Rng& rng);

struct MinimaBoundReport {
  std::int64_t trials = 0;
  std::int64_t inf_holds = 0;
  std::int64_t l2_holds = 0;
  double target = 0;  // 1 - 2^{-m}
  double inf_fraction = 0;
  double l2_fraction = 0;
  double floor = 0;  // target - 3 sigma, sigma taken at the target
  bool inf_pass = false;
  bool l2_pass = false;
  bool pass = false;
};

// Fraction of uniform A meeting each lower bound.
MinimaBoundReport minima_bound_experiment(std::int64_t q, int m, int n,
                                          std::int64_t trials, Rng& rng);

}  // namespace dihedral

#endif  // DIHEDRAL_QARY_LATTICE_HPP_
