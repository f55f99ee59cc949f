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
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dihedral/errors.hpp"
#include "dihedral/modular.hpp"
#include "dihedral/stats.hpp"
#include "dihedral/statevector.hpp"

namespace dihedral {
namespace {

using Dense = std::map<Label, Amplitude>;

Dense to_dense(const SparseState& s) {
  Dense d;
  for (std::size_t i = 0; i < s.size(); ++i) {
    d[Label(s.label(i).begin(), s.label(i).end())] = s.amplitude(i);
  }
  return d;
}

// Reference transform on register slots [off, off + arity): the full
// tensor DFT with phase exp(sign 2 pi i <x, y> / N).
Dense dense_qft(const Dense& in, int off, int arity, std::int64_t N, double sign) {
  std::int64_t count = 1;
  for (int k = 0; k < arity; ++k) count *= N;
  Dense out;
  for (const auto& [label, a] : in) {
    for (std::int64_t idx = 0; idx < count; ++idx) {
      Label y = label;
      std::int64_t rest = idx, dot = 0;
      for (int k = arity - 1; k >= 0; --k) {
        y[static_cast<std::size_t>(off + k)] = rest % N;
        dot += label[static_cast<std::size_t>(off + k)] * (rest % N);
        rest /= N;
      }
      const double angle = sign * 2 * std::numbers::pi * static_cast<double>(dot % N) /
                           static_cast<double>(N);
      out[y] += a * std::polar(std::pow(static_cast<double>(N), -arity / 2.0), angle);
    }
  }
  return out;
}

void expect_close(const Dense& want, const SparseState& got, double tol = 1e-12) {
  const Dense g = to_dense(got);
  for (const auto& [label, a] : want) {
    const auto it = g.find(label);
    const Amplitude b = it == g.end() ? Amplitude(0) : it->second;
    EXPECT_LT(std::abs(a - b), tol);
  }
  for (const auto& [label, b] : g) {
    if (!want.count(label)) EXPECT_LT(std::abs(b), tol);
  }
}

const RegisterLayout kLayout({IntRegister{3}, ModRegister{5, 2}, ModRegister{4, 1}});

SparseState random_state(Rng& rng, int entries) {
  std::vector<std::int64_t> labels;
  std::vector<Amplitude> amps;
  for (int e = 0; e < entries; ++e) {
    labels.push_back(uniform_int(rng, -3, 3));
    labels.push_back(uniform_int(rng, 0, 4));
    labels.push_back(uniform_int(rng, 0, 4));
    labels.push_back(uniform_int(rng, 0, 3));
    amps.emplace_back(uniform_unit(rng) - 0.5, uniform_unit(rng) - 0.5);
  }
  return SparseState::from_entries(kLayout, std::move(labels), std::move(amps));
}

double total_mass(const SparseState& s) {
  double m = 0;
  for (const Amplitude& a : s.amplitudes()) m += std::norm(a);
  return m;
}

TEST(LayoutTest, OffsetsAndRanges) {
  EXPECT_EQ(kLayout.width(), 4);
  EXPECT_EQ(kLayout.offset(1), 1);
  EXPECT_EQ(kLayout.offset(2), 3);
  EXPECT_TRUE(kLayout.is_int(0));
  EXPECT_EQ(kLayout.modulus(1), 5);
  EXPECT_TRUE(kLayout.contains(Label{-3, 4, 0, 3}));
  EXPECT_FALSE(kLayout.contains(Label{4, 0, 0, 0}));
  EXPECT_FALSE(kLayout.contains(Label{0, 5, 0, 0}));
}

TEST(SparseStateTest, FromEntriesSortsMergesAndNormalizes) {
  const RegisterLayout layout({ModRegister{7, 1}});
  const SparseState s = SparseState::from_entries(layout, {5, 2, 5, 0},
                                                  {1.0, 1.0, 1.0, 1e-20});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.label(0)[0], 2);
  EXPECT_EQ(s.label(1)[0], 5);
  EXPECT_NEAR(std::abs(s.amplitude(1)), 2 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(s.norm(), 5.0, 1e-15);
  EXPECT_EQ(s.amplitude_of(Label{0}), Amplitude(0));
}

TEST(SparseStateTest, FromEntriesRejectsBadInput) {
  const RegisterLayout layout({ModRegister{7, 1}});
  EXPECT_THROW(SparseState::from_entries(layout, {9}, {1.0}), ParameterError);
  EXPECT_THROW(SparseState::from_entries(layout, {1, 2}, {1.0}), ParameterError);
  EXPECT_THROW(SparseState::from_entries(layout, {1, 1}, {1.0, -1.0}), PreconditionError);
}

TEST(QftTest, MatchesDenseReference) {
  Rng rng = make_rng(1);
  for (int rep = 0; rep < 8; ++rep) {
    const SparseState s = random_state(rng, 12);
    for (auto dir : {Direction::kForward, Direction::kInverse}) {
      const double sign = dir == Direction::kForward ? 1.0 : -1.0;
      expect_close(dense_qft(to_dense(s), 1, 2, 5, sign), qft_mod(s, 1, dir));
      expect_close(dense_qft(to_dense(s), 3, 1, 4, sign), qft_mod(s, 2, dir));
    }
  }
}

TEST(QftTest, UnitaryAndInvertible) {
  Rng rng = make_rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const SparseState a = random_state(rng, 10);
    const SparseState b = random_state(rng, 10);
    const SparseState fa = qft_mod(a, 1, Direction::kForward);
    const SparseState fb = qft_mod(b, 1, Direction::kForward);
    EXPECT_NEAR(total_mass(fa), 1.0, 1e-12);
    EXPECT_NEAR(l2_distance(fa, fb), l2_distance(a, b), 1e-12);
    expect_close(to_dense(a), qft_mod(fa, 1, Direction::kInverse));
  }
}

TEST(QftTest, SquareIsNegation) {
  Rng rng = make_rng(3);
  const SparseState s = random_state(rng, 15);
  const SparseState twice =
      qft_mod(qft_mod(s, 1, Direction::kForward), 1, Direction::kForward);
  Dense want;
  for (const auto& [label, a] : to_dense(s)) {
    Label neg = label;
    neg[1] = mod(-neg[1], 5);
    neg[2] = mod(-neg[2], 5);
    want[neg] = a;
  }
  expect_close(want, twice);
}

TEST(QftTest, RejectsIntRegister) {
  Rng rng = make_rng(3);
  EXPECT_THROW(qft_mod(random_state(rng, 3), 0, Direction::kForward), ParameterError);
}

TEST(MarginalTest, SumsMatchDirectAccumulation) {
  Rng rng = make_rng(4);
  const SparseState s = random_state(rng, 20);
  std::map<Label, double> want;
  for (const auto& [label, a] : to_dense(s)) want[{label[1], label[2]}] += std::norm(a);
  const auto got = marginal(s, 1);
  ASSERT_EQ(got.size(), want.size());
  double total = 0;
  for (const auto& [value, p] : got) {
    EXPECT_NEAR(p, want[value], 1e-15);
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(MeasureTest, BornRuleChiSquare) {
  Rng rng = make_rng(5);
  const SparseState s = random_state(rng, 16);
  const auto pmf = marginal(s, 2);
  std::map<Label, std::int64_t> counts;
  for (int i = 0; i < 100000; ++i) ++counts[measure(s, 2, rng).value];
  std::vector<std::int64_t> obs;
  std::vector<double> expected;
  for (const auto& [value, p] : pmf) {
    obs.push_back(counts[value]);
    expected.push_back(p);
  }
  EXPECT_GT(chi_square_gof(obs, expected).p_value, 1e-3);
}

TEST(MeasureTest, CollapseIsRenormalizedProjection) {
  Rng rng = make_rng(6);
  const SparseState s = random_state(rng, 16);
  const MeasurementOutcome out = measure(s, 0, rng);
  const auto proj = project(s, [&](LabelView l) { return l[0] == out.value[0]; });
  ASSERT_TRUE(proj.has_value());
  EXPECT_NEAR(proj->second, out.probability, 1e-12);
  EXPECT_NEAR(l2_distance(proj->first, out.collapsed), 0.0, 1e-12);
  for (std::size_t i = 0; i < out.collapsed.size(); ++i) {
    EXPECT_EQ(out.collapsed.label(i)[0], out.value[0]);
  }
}

TEST(MeasureTest, DerivedAgreesWithWrittenRegister) {
  Rng rng = make_rng(7);
  const SparseState s = random_state(rng, 16);
  auto parity = [](LabelView l) { return Label{mod(l[0] + l[3], 2)}; };
  const SparseState written = apply_classical(
      append_register(s, ModRegister{2, 1}),
      [](LabelView src) { return Label{src[0] + src[1]}; }, {0, 2}, 3,
      ClassicalMode::kWrite);
  const auto pmf = marginal(written, 3);
  Rng a = make_rng(70), b = make_rng(70);
  for (int i = 0; i < 50; ++i) {
    const MeasurementOutcome d = measure_derived(s, parity, a);
    const MeasurementOutcome w = measure(written, 3, b);
    EXPECT_EQ(d.value, w.value);
    EXPECT_NEAR(d.probability, w.probability, 1e-12);
  }
  EXPECT_EQ(pmf.size(), 2u);
}

TEST(ClassicalTest, WriteThenUncomputeIsIdentity) {
  Rng rng = make_rng(8);
  const SparseState s = random_state(rng, 12);
  const SparseState base = append_register(s, ModRegister{9, 1});
  auto f = [](LabelView src) { return Label{3 * src[0] + src[1]}; };
  const SparseState w = apply_classical(base, f, {0, 1}, 3, ClassicalMode::kWrite);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(w.label(i)[4], mod(3 * w.label(i)[0] + w.label(i)[1], 9));
  }
  EXPECT_THROW(apply_classical(w, f, {0, 1}, 3, ClassicalMode::kWrite), PreconditionError);
  const SparseState back = apply_classical(w, f, {0, 1}, 3, ClassicalMode::kUncompute);
  EXPECT_NEAR(l2_distance(back, base), 0.0, 1e-12);
  EXPECT_NEAR(l2_distance(drop_register(back, 3), s), 0.0, 1e-12);
  EXPECT_THROW(apply_classical(w, [](LabelView) { return Label{1}; }, {0}, 3,
                               ClassicalMode::kUncompute),
               ConsistencyError);
}

TEST(RegisterTest, DropRequiresConstantRegister) {
  Rng rng = make_rng(9);
  EXPECT_THROW(drop_register(random_state(rng, 12), 0), PreconditionError);
}

TEST(BijectionTest, RelabelsAndDetectsCollisions) {
  const RegisterLayout layout({ModRegister{6, 1}});
  const SparseState s = SparseState::from_entries(layout, {0, 1, 2}, {1.0, 2.0, 3.0});
  const SparseState shifted =
      apply_bijection(s, layout, [](LabelView l) { return Label{mod(l[0] + 4, 6)}; });
  EXPECT_NEAR(std::abs(shifted.amplitude_of(Label{5}) - s.amplitude_of(Label{1})), 0.0,
              1e-15);
  EXPECT_THROW(apply_bijection(s, layout, [](LabelView) { return Label{0}; }),
               PreconditionError);
  EXPECT_THROW(apply_bijection(s, layout, [](LabelView) { return Label{6}; }),
               PreconditionError);
}

TEST(LiftTest, ReducesModN) {
  const GaussianParam g(2.0, 4);
  const SparseState s = prepare_weighted(RegisterLayout({IntRegister{4}}), WeightFn::gaussian(g));
  const SparseState lifted = lift_int_to_mod(s, 0, 16);
  for (std::int64_t j = -4; j <= 4; ++j) {
    EXPECT_NEAR(std::abs(lifted.amplitude_of(Label{mod(j, 16)}) - s.amplitude_of(Label{j})),
                0.0, 1e-15);
  }
  EXPECT_THROW(lift_int_to_mod(s, 0, 8), PreconditionError);
}

TEST(PrepareTest, GaussianAmplitudesAreRho) {
  const GaussianParam g(3.0, 4);
  const SparseState s =
      prepare_weighted(RegisterLayout({IntRegister{6}, ModRegister{5, 1}}), WeightFn::gaussian(g));
  double z = 0;
  for (std::int64_t j = -g.cutoff; j <= g.cutoff; ++j) {
    z += std::exp(-2 * std::numbers::pi * static_cast<double>(j * j) / 9.0);
  }
  for (std::int64_t j = -g.cutoff; j <= g.cutoff; ++j) {
    const double want = std::exp(-std::numbers::pi * static_cast<double>(j * j) / 9.0) / std::sqrt(z);
    EXPECT_NEAR(s.amplitude_of(Label{j, 0}).real(), want, 1e-15);
  }
  EXPECT_THROW(prepare_weighted(RegisterLayout({IntRegister{5}}), WeightFn::gaussian(g)),
               ParameterError);
}

TEST(RejectionTest, AcceptRateIsTargetNormSquared) {
  Rng rng = make_rng(10);
  const SparseState s = random_state(rng, 10);
  auto p = [&](LabelView l) { return 0.6 * std::abs(s.amplitude_of(l)) * (l[0] >= 0 ? 1.0 : 0.5); };
  double want = 0;
  for (std::size_t i = 0; i < s.size(); ++i) want += std::pow(p(s.label(i)), 2);
  const int n = 20000;
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    const ResampleResult r = rejection_resample(s, p, rng);
    EXPECT_NEAR(r.accept_probability, want, 1e-12);
    if (!r.accepted) continue;
    ++accepted;
    if (accepted == 1) {
      // Moduli follow p, phases follow the input.
      for (std::size_t k = 0; k < r.state->size(); ++k) {
        const LabelView l = r.state->label(k);
        const Amplitude in = s.amplitude_of(l);
        EXPECT_NEAR(std::abs(r.state->amplitude(k)), p(l) / std::sqrt(want), 1e-12);
        EXPECT_NEAR(std::arg(r.state->amplitude(k) / in), 0.0, 1e-12);
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(accepted) / n, want, 3 * binomial_sigma(want, n));
}

TEST(RejectionTest, TargetAboveAmplitudeThrows) {
  Rng rng = make_rng(11);
  const SparseState s = random_state(rng, 5);
  EXPECT_THROW(rejection_resample(s, [](LabelView) { return 1.0; }, rng), PreconditionError);
}

TEST(DistanceTest, IgnoresGlobalPhase) {
  Rng rng = make_rng(12);
  const SparseState s = random_state(rng, 8);
  std::vector<Amplitude> rotated;
  for (const Amplitude& a : s.amplitudes()) rotated.push_back(a * std::polar(1.0, 1.1));
  const SparseState t = SparseState::from_entries(s.layout(), s.flat_labels(), rotated);
  EXPECT_NEAR(l2_distance(s, t), 0.0, 1e-12);
  EXPECT_NE(dump(s), dump(t));
}

TEST(QftTest, DocumentedExamples) {
  const RegisterLayout two({ModRegister{2, 1}});
  const SparseState h = qft_mod(prepare_basis(two, Label{0}), 0, Direction::kForward);
  EXPECT_NEAR(h.amplitude_of(Label{0}).real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(h.amplitude_of(Label{1}).real(), 1 / std::sqrt(2.0), 1e-15);

  const RegisterLayout seven({ModRegister{7, 1}});
  const SparseState flat = SparseState::from_entries(
      seven, {0, 1, 2, 3, 4, 5, 6}, std::vector<Amplitude>(7, 1.0));
  const SparseState peak = qft_mod(flat, 0, Direction::kForward);
  ASSERT_EQ(peak.size(), 1u);
  EXPECT_EQ(peak.label(0)[0], 0);
}

TEST(QftTest, RoundTripProperty) {
  Rng rng = make_rng(13);
  for (std::int64_t N : {2, 3, 8, 17}) {
    const RegisterLayout layout({IntRegister{2}, ModRegister{N, 1}});
    for (int rep = 0; rep < 25; ++rep) {
      std::vector<std::int64_t> labels;
      std::vector<Amplitude> amps;
      for (int e = 0; e < 20; ++e) {
        labels.push_back(uniform_int(rng, -2, 2));
        labels.push_back(uniform_int(rng, 0, N - 1));
        amps.emplace_back(uniform_unit(rng) - 0.5, uniform_unit(rng) - 0.5);
      }
      const SparseState s = SparseState::from_entries(layout, labels, amps);
      const SparseState f = qft_mod(s, 1, Direction::kForward);
      EXPECT_NEAR(total_mass(f), 1.0, 1e-12);
      EXPECT_LE(l2_distance(qft_mod(f, 1, Direction::kInverse), s), 1e-12);
    }
  }
}

TEST(MeasureTest, DocumentedExamples) {
  const RegisterLayout layout({ModRegister{4, 1}});
  Rng rng = make_rng(14);
  const MeasurementOutcome basis = measure(prepare_basis(layout, Label{3}), 0, rng);
  EXPECT_EQ(basis.value, Label{3});
  EXPECT_DOUBLE_EQ(basis.probability, 1.0);

  const SparseState s = SparseState::from_entries(layout, {0, 1}, {0.6, 0.8});
  EXPECT_NEAR(marginal(s, 0)[1].second, 16.0 / 25, 1e-15);
  int ones = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ones += measure(s, 0, rng).value[0] == 1;
  EXPECT_LE(std::abs(static_cast<double>(ones) / n - 0.64), 0.01);
  EXPECT_THROW(prepare_basis(layout, Label{4}), ParameterError);
}

TEST(ClassicalTest, DocumentedExamples) {
  const RegisterLayout layout({IntRegister{1}, ModRegister{11, 1}, ModRegister{11, 1}});
  const std::int64_t s0 = 4;
  const SparseState in = SparseState::from_entries(layout, {-1, 3, 0, 0, 2, 0, 1, 9, 0},
                                                   {1.0, 1.0, 1.0});
  const SparseState out = apply_classical(
      in, [&](LabelView src) { return Label{src[1] + src[0] * s0}; }, {0, 1}, 2,
      ClassicalMode::kWrite);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const LabelView l = out.label(i);
    EXPECT_EQ(l[2], mod(l[1] + l[0] * s0, 11));
  }
  const SparseState copy = apply_classical(
      in, [](LabelView src) { return Label{src[0]}; }, {1}, 2, ClassicalMode::kWrite);
  for (std::size_t i = 0; i < copy.size(); ++i) EXPECT_EQ(copy.label(i)[2], copy.label(i)[1]);
  EXPECT_NEAR(total_mass(out), 1.0, 1e-12);
}

TEST(RejectionTest, DocumentedExamples) {
  const RegisterLayout layout({IntRegister{8}});
  Rng rng = make_rng(15);
  const SparseState u = prepare_weighted(layout, WeightFn::uniform(4));
  const ResampleResult same =
      rejection_resample(u, [&](LabelView l) { return std::abs(u.amplitude_of(l)); }, rng);
  EXPECT_TRUE(same.accepted);
  EXPECT_NEAR(same.accept_probability, 1.0, 1e-12);
  EXPECT_NEAR(l2_distance(*same.state, u), 0.0, 1e-12);

  const ResampleResult half =
      rejection_resample(u, [](LabelView l) { return l[0] < 2 ? 0.5 : 0.0; }, rng);
  EXPECT_NEAR(half.accept_probability, 0.5, 1e-12);
  if (half.accepted) EXPECT_EQ(half.state->size(), 2u);

  const SparseState g = prepare_weighted(layout, WeightFn::gaussian(GaussianParam(2.0, 16)));
  double t = 1e300;
  for (std::int64_t j = 0; j < 4; ++j) t = std::min(t, std::abs(g.amplitude_of(Label{j})));
  auto p = [t](LabelView l) { return l[0] >= 0 && l[0] < 4 ? t : 0.0; };
  const double want = 4 * t * t;
  const int n = 10000;
  int accepted = 0;
  for (int i = 0; i < n; ++i) accepted += rejection_resample(g, p, rng).accepted;
  EXPECT_NEAR(static_cast<double>(accepted) / n, want, 3 * binomial_sigma(want, n));
}

TEST(DistanceTest, OrthogonalBasisStates) {
  const RegisterLayout layout({ModRegister{3, 1}});
  EXPECT_NEAR(l2_distance(prepare_basis(layout, Label{0}), prepare_basis(layout, Label{1})),
              std::sqrt(2.0), 1e-15);
}

TEST(PrepareTest, DocumentedExamples) {
  const SparseState g = prepare_weighted(RegisterLayout({IntRegister{1}}),
                                         WeightFn::gaussian(GaussianParam(1.0, 1)));
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g.amplitude_of(Label{1}).real() / g.amplitude_of(Label{0}).real(),
              std::exp(-std::numbers::pi), 1e-15);
  const SparseState u = prepare_weighted(RegisterLayout({IntRegister{3}}), WeightFn::uniform(4));
  for (std::int64_t j = 0; j < 4; ++j) EXPECT_NEAR(u.amplitude_of(Label{j}).real(), 0.5, 1e-15);
  const SparseState w = prepare_weighted(RegisterLayout({IntRegister{16}}),
                                         WeightFn::gaussian(GaussianParam(2.0, 64)));
  EXPECT_NEAR(total_mass(w), 1.0, 1e-12);
  EXPECT_NEAR(w.amplitude_of(Label{1}).real() / w.amplitude_of(Label{0}).real(),
              std::exp(-std::numbers::pi / 4), 1e-14);
}

TEST(LiftTest, DocumentedExamples) {
  const RegisterLayout layout({IntRegister{3}});
  const SparseState one = lift_int_to_mod(prepare_basis(layout, Label{-1}), 0, 8);
  EXPECT_EQ(one.label(0)[0], 7);
  const SparseState five = SparseState::from_entries(layout, {-2, -1, 0, 1, 2},
                                                     std::vector<Amplitude>(5, 1.0));
  const SparseState lifted = lift_int_to_mod(five, 0, 5);
  EXPECT_EQ(lifted.size(), 5u);
  EXPECT_NEAR(total_mass(lifted), 1.0, 1e-12);
  const SparseState wide = SparseState::from_entries(layout, {-3, 0, 3},
                                                     std::vector<Amplitude>(3, 1.0));
  EXPECT_THROW(lift_int_to_mod(wide, 0, 5), PreconditionError);
}

}  // namespace
}  // namespace dihedral
