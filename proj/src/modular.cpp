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

#include "dihedral/modular.hpp"

#include <numeric>

#include "dihedral/errors.hpp"

namespace dihedral {

std::int64_t gcd(std::int64_t a, std::int64_t b) {
  return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}

std::optional<std::int64_t> inverse_mod(std::int64_t a, std::int64_t q) {
  std::int64_t old_r = mod(a, q), r = q;
  std::int64_t old_s = 1, s = 0;
  while (r != 0) {
    std::int64_t quot = old_r / r;
    std::int64_t t = old_r - quot * r;
    old_r = r;
    r = t;
    t = old_s - quot * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1) return std::nullopt;
  return mod(old_s, q);
}

std::optional<std::int64_t> checked_pow(std::int64_t base, int exp,
                                        std::int64_t limit) {
  std::int64_t acc = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && acc > limit / base) return std::nullopt;
    acc *= base;
  }
  if (acc > limit) return std::nullopt;
  return acc;
}

ResidueMatrix::ResidueMatrix(int rows, int cols, std::int64_t q)
    : rows_(rows), cols_(cols), q_(q),
      data_(static_cast<std::size_t>(rows) * cols, 0) {
  if (rows < 1 || cols < 1) throw ParameterError("matrix must be non-empty");
  if (q < 2) throw ParameterError("modulus must be at least 2");
}

std::int64_t ResidueMatrix::row_dot(int i, const Residues& x) const {
  std::int64_t acc = 0;
  for (int j = 0; j < cols_; ++j) acc = mod(acc + (*this)(i, j) * x[j], q_);
  return acc;
}

Residues ResidueMatrix::apply(const Residues& x) const {
  if (static_cast<int>(x.size()) != cols_) {
    throw ParameterError("vector length does not match matrix columns");
  }
  Residues out(rows_);
  for (int i = 0; i < rows_; ++i) out[i] = row_dot(i, x);
  return out;
}

Residues unrank(std::int64_t index, std::int64_t q, int n) {
  Residues x(n);
  for (int i = n - 1; i >= 0; --i) {
    x[i] = index % q;
    index /= q;
  }
  return x;
}

}  // namespace dihedral
