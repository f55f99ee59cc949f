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
#include "dihedral/stats.hpp"

namespace dihedral {
namespace {

LweParams small_lwe() {
  LweParams p;
  p.n = 2;
  p.q = 31;
  p.m = 5;
  p.alpha = 3.0 / 31;
  p.kappa = 16;
  return p;
}

TEST(LweTest, ResidualIsPlantedError) {
  Rng rng = make_rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const LweInstance inst = gen_lwe(small_lwe(), rng);
    const Residues as = inst.A.apply(inst.s0);
    for (int i = 0; i < inst.params.m; ++i) {
      EXPECT_EQ(center(inst.b[i] - as[i], 31), inst.e0[i]);
      EXPECT_LE(std::abs(inst.e0[i]), GaussianParam(3.0, 16).cutoff);
    }
    const LweSample row = inst.public_view().sample(2);
    EXPECT_EQ(row.b, inst.b[2]);
    EXPECT_EQ(row.a, (Residues{inst.A(2, 0), inst.A(2, 1)}));
  }
}

TEST(LweTest, DegenerateNoiseGivesExactProducts) {
  LweParams p = small_lwe();
  p.alpha = 0.2 / 31;  // rho_{0.2}(1) ~ 1e-34 never registers in the CDF
  p.kappa = 1;
  Rng rng = make_rng(2);
  int nonzero = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const LweInstance inst = gen_lwe(p, rng);
    for (std::int64_t e : inst.e0) nonzero += e != 0;
  }
  EXPECT_EQ(nonzero, 0);
}

TEST(LweTest, NoiseHistogramMatchesGaussian) {
  LweParams p;
  p.n = 1;
  p.q = 257;
  p.m = 100;
  p.alpha = 4.0 / 257;
  p.kappa = 16;
  const GaussianParam g(4.0, 16);
  Rng rng = make_rng(3);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(2 * g.cutoff + 1), 0);
  for (int rep = 0; rep < 1000; ++rep) {
    for (std::int64_t e : gen_lwe(p, rng).e0) ++counts[static_cast<std::size_t>(e + g.cutoff)];
  }
  std::vector<double> pmf;
  for (std::int64_t j = -g.cutoff; j <= g.cutoff; ++j) {
    pmf.push_back(std::exp(-std::numbers::pi * static_cast<double>(j * j) / 16.0));
  }
  EXPECT_LE(total_variation(counts, pmf), 0.01);
}

TEST(LweTest, ValidateRejectsBadParams) {
  LweParams p = small_lwe();
  p.m = 1;
  EXPECT_THROW(p.validate(), ParameterError);
  p = small_lwe();
  p.alpha = 1.5;
  EXPECT_THROW(p.validate(), ParameterError);
  p = small_lwe();
  p.q = 1;
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(EdcpTest, DcpCaseIsTwoPointState) {
  EdcpParams p;
  p.N = 21;
  p.ell = 5;
  Rng rng = make_rng(4);
  const EdcpInstance inst = gen_edcp(p, rng);
  for (std::size_t k = 0; k < inst.states.size(); ++k) {
    const SparseState& st = inst.states[k];
    ASSERT_EQ(st.size(), 2u);
    EXPECT_EQ(st.label(0)[0], 0);
    EXPECT_EQ(st.label(1)[0], 1);
    EXPECT_EQ(st.label(0)[1], inst.offsets[k][0]);
    EXPECT_EQ(st.label(1)[1], mod(inst.offsets[k][0] + inst.s[0], 21));
    EXPECT_NEAR(std::abs(st.amplitude(0)), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(st.amplitude(1)), 1 / std::sqrt(2.0), 1e-15);
  }
}

TEST(EdcpTest, SingleUniformPointIsProductState) {
  EdcpParams p;
  p.N = 9;
  p.n = 2;
  p.dist = WeightFn::uniform(1);
  Rng rng = make_rng(5);
  const EdcpInstance inst = gen_edcp(p, rng);
  ASSERT_EQ(inst.states[0].size(), 1u);
  EXPECT_EQ(inst.states[0].register_value(0, 1), inst.offsets[0]);
}

TEST(EdcpTest, GaussianAmplitudeRatio) {
  EdcpParams p;
  p.N = 64;
  p.dist = WeightFn::gaussian(GaussianParam(2.0, 16));
  Rng rng = make_rng(6);
  const EdcpInstance inst = gen_edcp(p, rng);
  const SparseState& st = inst.states[0];
  const Residues& x = inst.offsets[0];
  const Amplitude a0 = st.amplitude_of(Label{0, x[0]});
  const Amplitude a1 = st.amplitude_of(Label{1, mod(x[0] + inst.s[0], 64)});
  EXPECT_NEAR(std::abs(a1 / a0), std::exp(-std::numbers::pi / 4), 1e-14);
}

class EdcpVerifyTest : public ::testing::TestWithParam<int> {};

TEST_P(EdcpVerifyTest, GeneratedStatesVerify) {
  const std::vector<WeightFn> dists = {WeightFn::indicator01(), WeightFn::uniform(6),
                                       WeightFn::gaussian(GaussianParam(1.5, 9))};
  Rng rng = make_rng(static_cast<std::uint64_t>(GetParam()));
  for (const WeightFn& d : dists) {
    EdcpParams p;
    p.n = 2;
    p.N = 17;
    p.dist = d;
    p.ell = 3;
    const EdcpInstance inst = gen_edcp(p, rng);
    for (std::size_t k = 0; k < inst.states.size(); ++k) {
      EXPECT_TRUE(verify_edcp_state(inst.states[k], inst.s, inst.offsets[k], d));
      Residues wrong = inst.s;
      wrong[0] = mod(wrong[0] + 1, 17);
      EXPECT_FALSE(verify_edcp_state(inst.states[k], wrong, inst.offsets[k], d));

      std::vector<Amplitude> rotated;
      for (const Amplitude& a : inst.states[k].amplitudes()) {
        rotated.push_back(a * std::polar(1.0, 2.0));
      }
      const SparseState phased = SparseState::from_entries(
          inst.states[k].layout(), inst.states[k].flat_labels(), rotated);
      EXPECT_TRUE(verify_edcp_state(phased, inst.s, inst.offsets[k], d));

      const auto st = edcp_support_structure(inst.states[k]);
      ASSERT_TRUE(st.has_value());
      EXPECT_EQ(st->step, inst.s);
      EXPECT_EQ(st->offset, inst.offsets[k]);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, EdcpVerifyTest, ::testing::Range(10, 15));

TEST(EdcpTest, NarrowModulusRejected) {
  EdcpParams p;
  p.N = 8;
  p.dist = WeightFn::gaussian(GaussianParam(2.0, 4));
  Rng rng = make_rng(7);
  EXPECT_THROW(gen_edcp(p, rng), ParameterError);
  p.N = 9;
  EXPECT_NO_THROW(gen_edcp(p, rng));
}

TEST(DecisionalNullTest, JMarginalIsSquaredWeight) {
  EdcpParams p;
  p.N = 64;
  p.dist = WeightFn::gaussian(GaussianParam(3.0, 16));
  p.ell = 100000;
  Rng rng = make_rng(8);
  const std::vector<SparseState> states = gen_decisional_null(p, rng);
  const GaussianParam& g = p.dist.gaussian_param();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(2 * g.cutoff + 1), 0);
  std::vector<std::int64_t> xs(64, 0);
  for (const SparseState& st : states) {
    ASSERT_EQ(st.size(), 1u);
    ++counts[static_cast<std::size_t>(st.label(0)[0] + g.cutoff)];
    ++xs[static_cast<std::size_t>(st.label(0)[1])];
  }
  // rho_r(j)^2 = rho_{r / sqrt 2}(j).
  std::vector<double> pmf;
  for (std::int64_t j = -g.cutoff; j <= g.cutoff; ++j) {
    pmf.push_back(std::exp(-2 * std::numbers::pi * static_cast<double>(j * j) / 9.0));
  }
  EXPECT_LE(total_variation(counts, pmf), 0.01);
  EXPECT_GT(chi_square_gof(counts, pmf).p_value, 1e-3);
  EXPECT_GT(chi_square_uniform(xs).p_value, 1e-3);
}

TEST(DecisionalNullTest, IndicatorGivesFairCoin) {
  EdcpParams p;
  p.N = 5;
  p.ell = 20000;
  Rng rng = make_rng(9);
  std::int64_t ones = 0;
  for (const SparseState& st : gen_decisional_null(p, rng)) ones += st.label(0)[0];
  EXPECT_NEAR(static_cast<double>(ones) / p.ell, 0.5, 3 * binomial_sigma(0.5, p.ell));
}

TEST(SupportStructureTest, RejectsGapsAndBrokenSteps) {
  const RegisterLayout layout({IntRegister{2}, ModRegister{11, 1}});
  EXPECT_FALSE(edcp_support_structure(
      SparseState::from_entries(layout, {0, 1, 2, 5}, {1.0, 1.0})).has_value());
  EXPECT_FALSE(edcp_support_structure(
      SparseState::from_entries(layout, {0, 1, 1, 3, 2, 4}, {1.0, 1.0, 1.0})).has_value());
  const auto ok = edcp_support_structure(
      SparseState::from_entries(layout, {-1, 10, 0, 2, 1, 5}, {1.0, 1.0, 1.0}));
  ASSERT_TRUE(ok.has_value());
  EXPECT_EQ(ok->step, Residues{3});
  EXPECT_EQ(ok->offset, Residues{2});
  EXPECT_EQ(ok->j_lo, -1);
}

TEST(JsonTest, LweInstanceRoundTrips) {
  Rng rng = make_rng(10);
  const LweInstance inst = gen_lwe(small_lwe(), rng);
  const auto j = to_json(inst);
  EXPECT_EQ(lwe_instance_from_json(j), inst);
  EXPECT_EQ(to_json(lwe_instance_from_json(j)).dump(), j.dump());
}

TEST(JsonTest, EdcpParamsRoundTrip) {
  for (const WeightFn& d : {WeightFn::indicator01(), WeightFn::uniform(7),
                            WeightFn::gaussian(GaussianParam(2.5, 9))}) {
    EdcpParams p;
    p.n = 2;
    p.N = 101;
    p.dist = d;
    p.ell = 4;
    const EdcpParams back = edcp_params_from_json(to_json(p));
    EXPECT_EQ(back.N, 101);
    EXPECT_EQ(back.ell, 4);
    EXPECT_EQ(back.dist.describe(), d.describe());
    EXPECT_EQ(to_json(back).dump(), to_json(p).dump());
  }
  auto bad = to_json(EdcpParams{});
  bad["dist"]["kind"] = "triangle";
  EXPECT_THROW(edcp_params_from_json(bad), ParameterError);
}

}  // namespace
}  // namespace dihedral
