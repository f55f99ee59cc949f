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

#include "dihedral/oracles.hpp"

#include <cmath>
#include <limits>

#include "dihedral/errors.hpp"
#include "dihedral/qary_lattice.hpp"

namespace dihedral {

namespace {

std::int64_t secret_space(int n, std::int64_t q) {
  if (n < 1 || q < 2) throw ParameterError("need n >= 1 and q >= 2");
  auto size = checked_pow(q, n, kEnumerationBudget);
  if (!size) throw ResourceError("q^n exceeds the enumeration budget");
  return *size;
}

void check_samples(const std::vector<LweSample>& samples, int n) {
  for (const LweSample& s : samples) {
    if (static_cast<int>(s.a.size()) != n) throw ParameterError("sample dimension != n");
  }
}

std::int64_t inner(const Residues& a, const Residues& s, std::int64_t q) {
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc = mod(acc + a[i] * s[i], q);
  return acc;
}

}  // namespace

SolverVerdict solve_lwe_bruteforce(const std::vector<LweSample>& samples, int n,
                                   std::int64_t q, double r_err) {
  const std::int64_t total = secret_space(n, q);
  check_samples(samples, n);
  if (!(r_err > 0)) throw ParameterError("error width must be positive");
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::int64_t best_index = 0;
  bool tie = false;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const Residues s = unrank(idx, q, n);
    std::int64_t score = 0;
    for (const LweSample& smp : samples) {
      const std::int64_t e = center(smp.b - inner(smp.a, s, q), q);
      score += e * e;
    }
    if (score < best) {
      best = score;
      best_index = idx;
      tie = false;
    } else if (score == best) {
      tie = true;
    }
  }
  SolverVerdict v;
  v.secret = unrank(best_index, q, n);
  v.score = static_cast<double>(best);
  v.unique = !tie;
  return v;
}

std::vector<double> folded_gaussian_pmf(double r, std::int64_t q) {
  if (q < 2) throw ParameterError("q must be >= 2");
  std::vector<double> pmf(static_cast<std::size_t>(q), 0.0);
  const std::int64_t W = working_radius(r) + 1;
  for (std::int64_t t = -W; t <= W; ++t) pmf[static_cast<std::size_t>(mod(t, q))] += rho(r, t);
  double total = 0;
  for (double v : pmf) total += v;
  for (double& v : pmf) v /= total;
  return pmf;
}

DistinguisherResult distinguish_lwe_bruteforce(const std::vector<LweSample>& samples,
                                               int n, std::int64_t q, double r_err) {
  if (samples.empty()) throw ParameterError("distinguisher needs at least one sample");
  const std::int64_t total = secret_space(n, q);
  check_samples(samples, n);
  std::vector<double> log_pmf = folded_gaussian_pmf(r_err, q);
  for (double& v : log_pmf) v = v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();

  double best = -std::numeric_limits<double>::infinity();
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const Residues s = unrank(idx, q, n);
    double ll = 0;
    for (const LweSample& smp : samples) {
      ll += log_pmf[static_cast<std::size_t>(mod(smp.b - inner(smp.a, s, q), q))];
    }
    best = std::max(best, ll);
  }
  const double uniform_ll =
      -static_cast<double>(samples.size()) * std::log(static_cast<double>(q));
  const double llr = best - uniform_ll;
  return {llr > 0 ? LweVerdict::kPlanted : LweVerdict::kRandom, llr};
}

SolverVerdict solve_dcp_whitebox(const std::vector<SparseState>& states,
                                 std::int64_t N) {
  SolverVerdict v;
  std::optional<std::int64_t> common;
  for (const SparseState& st : states) {
    const RegisterLayout& l = st.layout();
    if (l.size() != 2 || !l.is_int(0) || l.is_int(1) || l.modulus(1) != N ||
        l.arity(1) != 1 || st.size() != 2 || st.label(0)[0] != 0 ||
        st.label(1)[0] != 1) {
      return v;
    }
    const std::int64_t d = mod(st.label(1)[1] - st.label(0)[1], N);
    if (common && *common != d) return v;
    common = d;
  }
  if (!common) return v;
  v.secret = Residues{*common};
  v.unique = true;
  return v;
}

std::vector<std::int64_t> halve_candidates(std::int64_t s_bar, std::int64_t N) {
  std::vector<std::int64_t> out;
  for (std::int64_t s = 0; s < N; ++s) {
    if (mod(2 * s, N) == mod(s_bar, N)) out.push_back(s);
  }
  return out;
}

}  // namespace dihedral
