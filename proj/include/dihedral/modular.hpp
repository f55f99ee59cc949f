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

#ifndef DIHEDRAL_MODULAR_HPP_
#define DIHEDRAL_MODULAR_HPP_

#include <cstdint>
#include <optional>
#include <vector>

namespace dihedral {

using Residues = std::vector<std::int64_t>;

// Representative in [0, q).
inline std::int64_t mod(std::int64_t x, std::int64_t q) {
  std::int64_t r = x % q;
  return r < 0 ? r + q : r;
}

// Representative in (-q/2, q/2].
inline std::int64_t center(std::int64_t x, std::int64_t q) {
  std::int64_t r = mod(x, q);
  return 2 * r > q ? r - q : r;
}

std::int64_t gcd(std::int64_t a, std::int64_t b);

// Inverse of a modulo q, if gcd(a, q) = 1.
std::optional<std::int64_t> inverse_mod(std::int64_t a, std::int64_t q);

// Integer power with overflow detection; nullopt when the result exceeds
// `limit`.
std::optional<std::int64_t> checked_pow(std::int64_t base, int exp,
                                        std::int64_t limit);

// Dense m x n matrix of residues, row major.
class ResidueMatrix {
 public:
  ResidueMatrix() = default;
  ResidueMatrix(int rows, int cols, std::int64_t q);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t modulus() const { return q_; }

  std::int64_t operator()(int i, int j) const { return data_[i * cols_ + j]; }
  void set(int i, int j, std::int64_t v) { data_[i * cols_ + j] = mod(v, q_); }

  // A x mod q.
  Residues apply(const Residues& x) const;
  // <row i, x> mod q.
  std::int64_t row_dot(int i, const Residues& x) const;

  const std::vector<std::int64_t>& data() const { return data_; }

  bool operator==(const ResidueMatrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::int64_t q_ = 2;
  std::vector<std::int64_t> data_;
};

// Iterates Z_q^n in lexicographic order; `index` is the base-q integer.
Residues unrank(std::int64_t index, std::int64_t q, int n);

}  // namespace dihedral

#endif  // DIHEDRAL_MODULAR_HPP_
