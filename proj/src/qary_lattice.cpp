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

#include "dihedral/qary_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dihedral/errors.hpp"
#include "dihedral/stats.hpp"

namespace dihedral {

namespace {

std::int64_t enumeration_size(const ResidueMatrix& A) {
  auto size = checked_pow(A.modulus(), A.cols(), kEnumerationBudget);
  if (!size) throw ResourceError("q^n exceeds the enumeration budget");
  return *size;
}

// Visits every nonzero x in lexicographic order together with the centered
// image of A x. Columns are accumulated incrementally like an odometer.
template <class Visit>
void for_each_image(const ResidueMatrix& A, Visit visit) {
  const std::int64_t q = A.modulus();
  const int m = A.rows(), n = A.cols();
  const std::int64_t total = enumeration_size(A);
  Residues x(n, 0);
  std::vector<std::int64_t> img(m, 0), centered(m);
  for (std::int64_t idx = 1; idx < total; ++idx) {
    // Increment x as a base-q counter; the last coordinate moves fastest.
    int pos = n - 1;
    while (true) {
      x[pos] += 1;
      for (int i = 0; i < m; ++i) {
        img[i] += A(i, pos);
        if (img[i] >= q) img[i] -= q;
      }
      if (x[pos] < q) break;
      x[pos] = 0;  // wrapped: A * q e_pos = 0 mod q, image already consistent
      --pos;
    }
    for (int i = 0; i < m; ++i) centered[i] = 2 * img[i] > q ? img[i] - q : img[i];
    visit(x, centered);
  }
}

}  // namespace

LatticeStats lambda1_inf(const ResidueMatrix& A) {
  const std::int64_t q = A.modulus();
  LatticeStats best;
  best.lambda1_inf = q;
  for_each_image(A, [&](const Residues& x, const std::vector<std::int64_t>& v) {
    std::int64_t norm = 0;
    for (std::int64_t c : v) norm = std::max(norm, c < 0 ? -c : c);
    if (norm > 0 && norm < best.lambda1_inf) {
      best.lambda1_inf = norm;
      best.witness = x;
    }
  });
  return best;
}

std::int64_t lambda1_l2_squared(const ResidueMatrix& A) {
  const std::int64_t q = A.modulus();
  std::int64_t best = q * q;
  for_each_image(A, [&](const Residues&, const std::vector<std::int64_t>& v) {
    std::int64_t sq = 0;
    for (std::int64_t c : v) sq += c * c;
    if (sq > 0 && sq < best) best = sq;
  });
  return best;
}

LatticeStats lambda1_l2(const ResidueMatrix& A) {
  const std::int64_t q = A.modulus();
  std::int64_t best = q * q;
  LatticeStats out;
  for_each_image(A, [&](const Residues& x, const std::vector<std::int64_t>& v) {
    std::int64_t sq = 0;
    for (std::int64_t c : v) sq += c * c;
    if (sq > 0 && sq < best) {
      best = sq;
      out.witness = x;
    }
  });
  out.lambda1_l2 = std::sqrt(static_cast<double>(best));
  return out;
}

bool is_injective(const ResidueMatrix& A) {
  bool injective = true;
  for_each_image(A, [&](const Residues&, const std::vector<std::int64_t>& v) {
    if (std::all_of(v.begin(), v.end(), [](std::int64_t c) { return c == 0; })) {
      injective = false;
    }
  });
  return injective;
}

double inf_minimum_bound(std::int64_t q, int m, int n) {
  return std::pow(static_cast<double>(q), static_cast<double>(m - n) / m) / 2;
}

double l2_minimum_bound(std::int64_t q, int m, int n) {
  const double e = std::numbers::e, pi = std::numbers::pi;
  const double v = std::sqrt(static_cast<double>(m)) *
                   std::pow(static_cast<double>(q), static_cast<double>(m - n) / m) /
                   (2 * std::sqrt(2 * pi * e));
  return std::min(static_cast<double>(q), v);
}

ResidueMatrix random_matrix(int m, int n, std::int64_t q, Rng& rng) {
  ResidueMatrix A(m, n, q);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) A.set(i, j, uniform_int(rng, 0, q - 1));
  }
  return A;
}

MinimaBoundReport minima_bound_experiment(std::int64_t q, int m, int n,
                                          std::int64_t trials, Rng& rng) {
  if (q < 2 || n < 1 || m < n) throw ParameterError("need q >= 2 and m >= n >= 1");
  if (q > 64 || m > 12 || n > 3) throw ParameterError("parameters beyond desk scale");
  if (trials < 1) throw ParameterError("trials must be positive");
  const double inf_b = inf_minimum_bound(q, m, n);
  const double l2_b = l2_minimum_bound(q, m, n);
  MinimaBoundReport rep;
  rep.trials = trials;
  for (std::int64_t t = 0; t < trials; ++t) {
    ResidueMatrix A = random_matrix(m, n, q, rng);
    if (static_cast<double>(lambda1_inf(A).lambda1_inf) >= inf_b - 1e-12) ++rep.inf_holds;
    if (lambda1_l2(A).lambda1_l2 >= l2_b - 1e-12) ++rep.l2_holds;
  }
  rep.target = 1.0 - std::ldexp(1.0, -m);
  rep.inf_fraction = static_cast<double>(rep.inf_holds) / static_cast<double>(trials);
  rep.l2_fraction = static_cast<double>(rep.l2_holds) / static_cast<double>(trials);
  rep.floor = rep.target - 3 * binomial_sigma(rep.target, trials);
  rep.inf_pass = rep.inf_fraction >= rep.floor;
  rep.l2_pass = rep.l2_fraction >= rep.floor;
  rep.pass = rep.inf_pass && rep.l2_pass;
  return rep;
}

}  // namespace dihedral
