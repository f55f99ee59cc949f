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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dihedral/edcp_model.hpp"
#include "dihedral/errors.hpp"
#include "dihedral/oracles.hpp"

namespace dihedral {
namespace {

std::vector<LweSample> samples_of(const LweInstance& inst) {
  std::vector<LweSample> out;
  for (int i = 0; i < inst.params.m; ++i) out.push_back(inst.public_view().sample(i));
  return out;
}

LweInstance planted(std::int64_t q, int m, double width, Rng& rng, int n = 1) {
  LweParams p;
  p.n = n;
  p.q = q;
  p.m = m;
  p.alpha = width / static_cast<double>(q);
  p.kappa = 16;
  return gen_lwe(p, rng);
}

std::vector<LweSample> uniform_samples(std::int64_t q, int m, Rng& rng) {
  std::vector<LweSample> out;
  for (int i = 0; i < m; ++i) out.push_back({{uniform_int(rng, 0, q - 1)}, uniform_int(rng, 0, q - 1)});
  return out;
}

TEST(LweSolverTest, NoiselessRecoversExactly) {
  Rng rng = make_rng(1);
  const LweInstance inst = planted(17, 6, 1.0, rng, 2);
  std::vector<LweSample> clean;
  for (int i = 0; i < inst.params.m; ++i) {
    LweSample s = inst.public_view().sample(i);
    s.b = inst.A.row_dot(i, inst.s0);
    clean.push_back(s);
  }
  const SolverVerdict v = solve_lwe_bruteforce(clean, 2, 17, 1.0);
  ASSERT_TRUE(v.secret.has_value());
  EXPECT_EQ(*v.secret, inst.s0);
  EXPECT_EQ(v.score, 0.0);
}

TEST(LweSolverTest, MatchesIndependentArgmin) {
  Rng rng = make_rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    const LweInstance inst = planted(23, 5, 4.0, rng);
    const auto smp = samples_of(inst);
    double best = INFINITY;
    std::int64_t arg = -1;
    for (std::int64_t s = 0; s < 23; ++s) {
      double score = 0;
      for (const LweSample& x : smp) {
        double e = std::remainder(static_cast<double>(x.b - x.a[0] * s), 23.0);
        if (e == -11.5) e = 11.5;
        score += e * e;
      }
      if (score < best) {
        best = score;
        arg = s;
      }
    }
    const SolverVerdict v = solve_lwe_bruteforce(smp, 1, 23, 4.0);
    EXPECT_EQ((*v.secret)[0], arg);
    EXPECT_DOUBLE_EQ(v.score, best);
  }
}

TEST(LweSolverTest, PlantedRecoveryRate) {
  Rng rng = make_rng(3);
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    const LweInstance inst = planted(64, 30, 8.0, rng);
    const SolverVerdict v = solve_lwe_bruteforce(samples_of(inst), 1, 64, 8.0);
    hits += *v.secret == inst.s0;
  }
  EXPECT_GE(hits, 99);
}

TEST(LweSolverTest, ForcedTieIsNotUnique) {
  // Over Z_2 with a = 1, the residuals of s = 0 and s = 1 swap.
  const std::vector<LweSample> smp = {{{1}, 0}, {{1}, 1}};
  const SolverVerdict v = solve_lwe_bruteforce(smp, 1, 2, 1.0);
  EXPECT_FALSE(v.unique);
  EXPECT_EQ(*v.secret, Residues{0});
}

TEST(LweSolverTest, RejectsBadInput) {
  EXPECT_THROW(solve_lwe_bruteforce({{{1, 2}, 0}}, 1, 5, 1.0), ParameterError);
  EXPECT_THROW(solve_lwe_bruteforce({{{1}, 0}}, 1, 5, 0.0), ParameterError);
  EXPECT_THROW(solve_lwe_bruteforce({}, 5, 1 << 12, 1.0), ResourceError);
}

TEST(FoldedPmfTest, SumsWrappedGaussian) {
  const std::int64_t q = 7;
  const double r = 5.0;
  const std::vector<double> pmf = folded_gaussian_pmf(r, q);
  std::vector<double> want(q, 0.0);
  double total = 0;
  for (std::int64_t t = -200; t <= 200; ++t) {
    const double w = std::exp(-std::numbers::pi * static_cast<double>(t * t) / (r * r));
    want[static_cast<std::size_t>(mod(t, q))] += w;
    total += w;
  }
  for (std::int64_t k = 0; k < q; ++k) {
    EXPECT_NEAR(pmf[static_cast<std::size_t>(k)], want[static_cast<std::size_t>(k)] / total, 1e-14);
  }
  EXPECT_NEAR(pmf[1], pmf[6], 1e-15);
}

TEST(DistinguisherTest, SeparatesPlantedFromUniform) {
  Rng rng = make_rng(4);
  const std::int64_t q = 64;
  const double width = q / 8.0;
  int planted_hits = 0, uniform_hits = 0;
  const int runs = 100;
  for (int t = 0; t < runs; ++t) {
    const LweInstance inst = planted(q, 200, width, rng);
    planted_hits += distinguish_lwe_bruteforce(samples_of(inst), 1, q, width).verdict ==
                    LweVerdict::kPlanted;
    uniform_hits += distinguish_lwe_bruteforce(uniform_samples(q, 200, rng), 1, q, width)
                        .verdict == LweVerdict::kPlanted;
  }
  EXPECT_GE(planted_hits, 95);
  EXPECT_LE(uniform_hits, 55);
  EXPECT_THROW(distinguish_lwe_bruteforce({}, 1, q, width), ParameterError);
}

SparseState dcp_state(std::int64_t N, std::int64_t x, std::int64_t s) {
  return SparseState::from_entries(RegisterLayout({IntRegister{1}, ModRegister{N, 1}}),
                                   {0, mod(x, N), 1, mod(x + s, N)}, {1.0, 1.0});
}

TEST(DcpSolverTest, ReadsCommonDifference) {
  const SolverVerdict one = solve_dcp_whitebox({dcp_state(13, 4, 9)}, 13);
  EXPECT_EQ(*one.secret, Residues{9});
  const SolverVerdict three =
      solve_dcp_whitebox({dcp_state(13, 4, 9), dcp_state(13, 0, 9), dcp_state(13, 12, 9)}, 13);
  EXPECT_EQ(*three.secret, Residues{9});
  EXPECT_TRUE(three.unique);
  EXPECT_FALSE(solve_dcp_whitebox({dcp_state(13, 4, 9), dcp_state(13, 4, 8)}, 13).secret);
  EXPECT_FALSE(solve_dcp_whitebox({dcp_state(13, 4, 9)}, 11).secret);
  EXPECT_FALSE(solve_dcp_whitebox({}, 13).secret);
}

TEST(HalveTest, CandidatesDoubleToTarget) {
  for (std::int64_t N : {9, 10, 64}) {
    for (std::int64_t t = 0; t < N; ++t) {
      const auto c = halve_candidates(t, N);
      const std::size_t want = N % 2 == 1 ? 1u : (t % 2 == 0 ? 2u : 0u);
      EXPECT_EQ(c.size(), want) << N << " " << t;
      for (std::int64_t s : c) EXPECT_EQ(mod(2 * s, N), t);
    }
  }
}

}  // namespace
}  // namespace dihedral
