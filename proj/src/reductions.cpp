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

#include "dihedral/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dihedral/errors.hpp"
#include "dihedral/modular.hpp"
#include "dihedral/qary_lattice.hpp"

namespace dihedral {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

void require_edcp_layout(const SparseState& state) {
  const RegisterLayout& l = state.layout();
  if (l.size() != 2 || !l.is_int(0) || l.is_int(1)) {
    throw ParameterError("expected an [IntRegister, ModRegister] state");
  }
}

std::pair<std::int64_t, std::int64_t> j_window(const SparseState& state) {
  return {state.label(0)[0], state.label(state.size() - 1)[0]};
}

RegisterLayout with_int_bound(const RegisterLayout& l, std::int64_t bound) {
  return RegisterLayout({IntRegister{bound}, l[1]});
}

SparseState relabel_j(const SparseState& state, std::int64_t bound, std::int64_t shift) {
  return apply_bijection(state, with_int_bound(state.layout(), bound),
                         [shift](LabelView l) {
                           Label out(l.begin(), l.end());
                           out[0] += shift;
                           return out;
                         });
}

// Rejection-samples the j-register towards t * target(j) on [lo, hi] with
// the largest t that keeps every weight below the current amplitude.
ResampleResult reshape_j(const SparseState& state, std::int64_t lo, std::int64_t hi,
                         const std::function<double(std::int64_t)>& target, Rng& rng) {
  double t = std::numeric_limits<double>::infinity();
  std::int64_t present = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const std::int64_t j = state.label(i)[0];
    if (j < lo || j > hi) continue;
    const double w = target(j);
    if (w <= 0) continue;
    ++present;
    t = std::min(t, std::abs(state.amplitude(i)) / w);
  }
  std::int64_t needed = 0;
  for (std::int64_t j = lo; j <= hi; ++j) needed += target(j) > 0 ? 1 : 0;
  if (present != needed || needed == 0) {
    throw PreconditionError("state does not cover the target window");
  }
  // Guard against the last ulp pushing p above pi.
  t *= 1 - 1e-14;
  return rejection_resample(
      state,
      [&](LabelView l) {
        const std::int64_t j = l[0];
        return (j < lo || j > hi) ? 0.0 : t * target(j);
      },
      rng);
}

double mass_where(const SparseState& state, const std::function<bool(LabelView)>& pred) {
  double m = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (pred(state.label(i))) m += std::norm(state.amplitude(i));
  }
  return m;
}

bool full_progression(const SparseState& collapsed, std::int64_t j_lo, std::int64_t j_hi) {
  auto st = edcp_support_structure(collapsed);
  return st && st->j_lo == j_lo && st->j_hi == j_hi;
}

std::int64_t default_attempts(std::int64_t given, int ell) {
  return given > 0 ? given : 64 * static_cast<std::int64_t>(ell);
}

}  // namespace

// ---------------------------------------------------------------------------
// EDCP -> LWE

double edcp_to_lwe_error_width(const EdcpParams& params) {
  return static_cast<double>(params.N) /
         (std::sqrt(2.0) * params.dist.gaussian_param().r);
}

LweSample edcp_to_lwe_sample(const SparseState& state, const EdcpParams& params,
                             Rng& rng) {
  params.validate();
  const GaussianParam& g = params.dist.gaussian_param();
  if (g.r < std::sqrt(static_cast<double>(g.kappa))) {
    throw ParameterError("EDCP to LWE needs r >= sqrt(kappa)");
  }
  if (params.N <= 2 * g.cutoff) throw ParameterError("N must exceed twice the cutoff");
  require_edcp_layout(state);
  if (state.layout().modulus(1) != params.N || state.layout().arity(1) != params.n) {
    throw ParameterError("state layout does not match the parameters");
  }
  const SparseState fourier = qft_mod(state, 1, Direction::kForward);
  MeasurementOutcome a = measure(fourier, 1, rng);
  const SparseState lifted = lift_int_to_mod(drop_register(a.collapsed, 1), 0, params.N);
  MeasurementOutcome b = measure(qft_mod(lifted, 0, Direction::kForward), 0, rng);
  LweSample out;
  out.a.resize(a.value.size());
  for (std::size_t i = 0; i < a.value.size(); ++i) out.a[i] = mod(-a.value[i], params.N);
  out.b = b.value[0];
  return out;
}

DlweResult dedcp_to_dlwe(const std::vector<SparseState>& states,
                         const EdcpParams& params, Rng& rng, const DlweDecider& decide) {
  DlweResult res;
  for (const SparseState& st : states) res.samples.push_back(edcp_to_lwe_sample(st, params, rng));
  if (decide && !res.samples.empty()) res.verdict = decide(res.samples);
  return res;
}

// ---------------------------------------------------------------------------
// Cube separation

GridSpec GridSpec::sample(std::int64_t q, int m, int c, int k, Rng& rng) {
  if (c < 1 || k < 1 || m < 1) throw ParameterError("grid needs c, k, m >= 1");
  GridSpec g{q, c, k, std::vector<double>(static_cast<std::size_t>(m))};
  for (double& w : g.w) w = uniform_unit(rng);
  return g;
}

std::vector<std::int64_t> grid_fn(const std::vector<double>& x, const GridSpec& spec) {
  if (x.size() != spec.w.size()) throw ParameterError("grid offset length mismatch");
  const double z = spec.z(), qbar = spec.qbar();
  std::vector<std::int64_t> cell(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = std::fmod(x[i] / z - spec.w[i], qbar);
    if (t < 0) t += qbar;
    auto v = static_cast<std::int64_t>(std::floor(t));
    cell[i] = std::min<std::int64_t>(v, static_cast<std::int64_t>(qbar) - 1);
  }
  return cell;
}

SparseState uniform_secret_superposition(std::int64_t q, int n, const GaussianParam& g) {
  RegisterLayout layout({IntRegister{g.cutoff}, ModRegister{q, n}});
  return qft_mod(prepare_weighted(layout, WeightFn::gaussian(g)), 1, Direction::kForward);
}

double cube_width_bound(const LweParams& p, int c, int k, int kappa) {
  return 1.0 / (4.0 * c * k * kappa * p.alpha *
                std::pow(static_cast<double>(p.q), static_cast<double>(p.n) / p.m));
}

CubeReduction::CubeReduction(const LwePublic& pub, const GaussianParam& g,
                             const CubeOptions& opts)
    : pub_(pub), g_(g), opts_(opts) {
  pub.params.validate();
  if (opts.c < 8) throw ParameterError("grid constant c must be >= 8");
  if (opts.k < pub.params.m) throw ParameterError("slack k must be >= m");
  if (opts.ell < 1) throw ParameterError("ell must be >= 1");
  auto qn = checked_pow(pub.params.q, pub.params.n, opts.state_budget);
  if (!qn || *qn * (2 * g.cutoff + 1) > opts.state_budget) {
    throw ResourceError("q^n (2 cutoff + 1) exceeds the simulator budget");
  }
  if (opts.enforce_theorem_bound &&
      !(g.r < cube_width_bound(pub.params, opts.c, opts.k, g.kappa))) {
    throw ParameterError("r violates the cube separation bound");
  }
  initial_ = std::make_shared<const SparseState>(
      uniform_secret_superposition(pub.params.q, pub.params.n, g));
}

ReductionOutcome<SparseState> CubeReduction::attempt(Rng& rng) const {
  const int m = pub_.params.m, n = pub_.params.n;
  const std::int64_t q = pub_.params.q;
  const GridSpec spec = GridSpec::sample(q, m, opts_.c, opts_.k, rng);
  // The third register A s - j b and the cell register are derived from (j, s).
  auto cell = [&](LabelView l) {
    std::vector<double> x(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      std::int64_t v = -l[0] * pub_.b[static_cast<std::size_t>(i)];
      for (int c = 0; c < n; ++c) v += pub_.A(i, c) * l[1 + c];
      x[static_cast<std::size_t>(i)] = static_cast<double>(mod(v, q));
    }
    return grid_fn(x, spec);
  };
  MeasurementOutcome mo = measure_derived(*initial_, cell, rng);
  // Uncomputing A s - j b needs only (j, s) and b, so nothing is left behind.
  ReductionOutcome<SparseState> out;
  out.diagnostics.attempts = 1;
  out.diagnostics.measured = mo.value;
  out.diagnostics.support_size = static_cast<std::int64_t>(mo.collapsed.size());
  const auto [lo, hi] = j_window(*initial_);
  if (full_progression(mo.collapsed, lo, hi)) {
    out.diagnostics.successes = 1;
    out.payload = std::move(mo.collapsed);
  }
  return out;
}

ReductionOutcome<std::vector<SparseState>> lwe_to_edcp_cube(
    const LwePublic& pub, double r, int kappa, const CubeOptions& opts, Rng& rng) {
  const CubeReduction red(pub, GaussianParam(r, kappa), opts);
  const std::int64_t budget = default_attempts(opts.max_attempts, opts.ell);
  ReductionOutcome<std::vector<SparseState>> out;
  std::vector<SparseState> states;
  while (static_cast<int>(states.size()) < opts.ell && out.diagnostics.attempts < budget) {
    auto one = red.attempt(rng);
    ++out.diagnostics.attempts;
    out.diagnostics.measured = one.diagnostics.measured;
    out.diagnostics.support_size = one.diagnostics.support_size;
    if (one.payload) {
      ++out.diagnostics.successes;
      states.push_back(std::move(*one.payload));
    }
  }
  if (static_cast<int>(states.size()) == opts.ell) out.payload = std::move(states);
  return out;
}

// ---------------------------------------------------------------------------
// Ball intersection

double ball_width_bound(const LweParams& p, int kappa, int ell, int cols) {
  return 1.0 / (6.0 * std::sqrt(2 * kPi * kE) *
                std::sqrt(static_cast<double>(p.m) * kappa) * ell * p.alpha *
                std::pow(static_cast<double>(p.q), static_cast<double>(cols) / p.m));
}

double decisional_ball_radius(std::int64_t q, int m, int n) {
  return l2_minimum_bound(q, m, n + 1) / 3.0;
}

BallReduction::BallReduction(const LwePublic& pub, const GaussianParam& g,
                             const BallOptions& opts, bool search,
                             std::shared_ptr<const SparseState> initial)
    : pub_(pub), g_(g), opts_(opts), initial_(std::move(initial)) {
  const LweParams& p = pub.params;
  p.validate();
  if (opts.ell < 1) throw ParameterError("ell must be >= 1");
  if (search) {
    double limit;
    if (checked_pow(p.q, p.n, kEnumerationBudget)) {
      limit = lambda1_l2(pub.A).lambda1_l2 / 3.0;
    } else {
      limit = l2_minimum_bound(p.q, p.m, p.n) / 3.0;
    }
    R_ = opts.R > 0 ? opts.R : limit;
    if (R_ > limit + 1e-9) throw ParameterError("R exceeds lambda1(A) / 3");
  } else {
    const double limit = decisional_ball_radius(p.q, p.m, p.n);
    R_ = opts.R > 0 ? opts.R : limit;
    if (R_ > limit + 1e-9) throw ParameterError("R exceeds the decisional radius");
  }
  if (R_ < 1) throw ParameterError("ball radius must be >= 1");
  if (opts.enforce_theorem_bound &&
      !(g.r < ball_width_bound(p, g.kappa, opts.ell, search ? p.n : p.n + 1))) {
    throw ParameterError("r violates the ball reduction bound");
  }
  // Coordinates of the scaled ball register live in (-L q, L q); keep the
  // squared norm inside int64.
  const double headroom = std::floor(std::sqrt(9.0e18 / p.m) / static_cast<double>(p.q));
  const double natural = std::ldexp(1.0, std::min(p.m, 40));
  L_ = opts.L > 0 ? opts.L : static_cast<std::int64_t>(std::min(natural, headroom));
  if (L_ < 2) throw ParameterError("grid denominator L must be >= 2");
  if (static_cast<double>(L_) > headroom) throw ResourceError("L q overflows int64 norms");
  const double lr = static_cast<double>(L_) * R_;
  radius_sq_scaled_ = static_cast<std::int64_t>(std::floor(lr * lr));

  if (!initial_) {
    auto qn = checked_pow(p.q, p.n, std::int64_t{1} << 22);
    if (!qn || *qn * (2 * g.cutoff + 1) > (std::int64_t{1} << 22)) {
      throw ResourceError("q^n (2 cutoff + 1) exceeds the simulator budget");
    }
    initial_ = std::make_shared<const SparseState>(
        uniform_secret_superposition(p.q, p.n, g));
  }
  const RegisterLayout& l = initial_->layout();
  if (!(l == RegisterLayout({IntRegister{g.cutoff}, ModRegister{p.q, p.n}}))) {
    throw ParameterError("initial state does not match (q, n, cutoff)");
  }
  const std::size_t size = initial_->size();
  born_cdf_.resize(size);
  double acc = 0;
  for (std::size_t i = 0; i < size; ++i) {
    acc += std::norm(initial_->amplitude(i));
    born_cdf_[i] = acc;
  }
  // Only the first coordinate is cached; it drives the prefilter in attempt().
  // Per-digit tables A_{0c} v mod q keep the loop free of divisions.
  std::vector<std::vector<std::int64_t>> digit(static_cast<std::size_t>(p.n),
                                               std::vector<std::int64_t>(static_cast<std::size_t>(p.q)));
  for (int c = 0; c < p.n; ++c) {
    auto& t = digit[static_cast<std::size_t>(c)];
    for (std::int64_t v = 1; v < p.q; ++v) {
      t[v] = t[v - 1] + pub.A(0, c);
      if (t[v] >= p.q) t[v] -= p.q;
    }
  }
  first_center_.resize(size);
  std::int64_t last_j = 0, jb = 0;
  for (std::size_t idx = 0; idx < size; ++idx) {
    LabelView lab = initial_->label(idx);
    if (idx == 0 || lab[0] != last_j) {
      last_j = lab[0];
      jb = mod(-last_j * pub.b[0], p.q);
    }
    std::int64_t v = jb;
    for (int c = 0; c < p.n; ++c) {
      v += digit[static_cast<std::size_t>(c)][static_cast<std::size_t>(lab[1 + c])];
      if (v >= p.q) v -= p.q;
    }
    first_center_[idx] = v;
  }
}

std::int64_t BallReduction::center_coord(std::size_t idx, int i) const {
  LabelView lab = initial_->label(idx);
  std::int64_t v = -lab[0] * pub_.b[static_cast<std::size_t>(i)];
  for (int c = 0; c < pub_.params.n; ++c) v += pub_.A(i, c) * lab[1 + c];
  return mod(v, pub_.params.q);
}

ReductionOutcome<SparseState> BallReduction::attempt(Rng& rng) const {
  const int m = pub_.params.m;
  const std::int64_t L = L_, Lq = L_ * pub_.params.q;
  // Born sample of (j, s), then a uniform point of the discretized ball.
  const double u = uniform_unit(rng) * born_cdf_.back();
  std::size_t idx = static_cast<std::size_t>(
      std::upper_bound(born_cdf_.begin(), born_cdf_.end(), u) - born_cdf_.begin());
  idx = std::min(idx, born_cdf_.size() - 1);
  const auto box = static_cast<std::int64_t>(std::floor(L * R_));
  std::vector<std::int64_t> x(static_cast<std::size_t>(m));
  std::uniform_int_distribution<std::int64_t> coord(-box, box);
  for (bool inside = false; !inside;) {
    std::int64_t sq = 0;
    inside = true;
    for (std::size_t i = 0; i < x.size() && inside; ++i) {
      x[i] = coord(rng);
      sq += x[i] * x[i];
      inside = sq <= radius_sq_scaled_;
    }
  }
  std::vector<std::int64_t> y(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    y[static_cast<std::size_t>(i)] =
        mod(L * center_coord(idx, i) + x[static_cast<std::size_t>(i)], Lq);
  }
  // Collapse onto every (j, s) whose ball contains y. The first coordinate
  // alone discards almost every support point.
  const std::int64_t y0 = y[0], r2 = radius_sq_scaled_;
  std::vector<std::size_t> near;
  for (std::size_t p = 0; p < first_center_.size(); ++p) {
    std::int64_t d = y0 - L * first_center_[p];
    d += d < 0 ? Lq : 0;
    d -= 2 * d > Lq ? Lq : 0;
    if (d * d <= r2) near.push_back(p);
  }
  const auto w = static_cast<std::size_t>(initial_->layout().width());
  std::vector<std::int64_t> labels;
  std::vector<Amplitude> amps;
  for (std::size_t p : near) {
    std::int64_t acc = 0;
    bool inside = true;
    for (int i = 0; i < m && inside; ++i) {
      // y and L c both lie in [0, L q), so one correction each way suffices.
      std::int64_t d = y[static_cast<std::size_t>(i)] - L * center_coord(p, i);
      if (d < 0) d += Lq;
      if (2 * d > Lq) d -= Lq;
      acc += d * d;
      inside = acc <= r2;
    }
    if (!inside) continue;
    LabelView lab = initial_->label(p);
    labels.insert(labels.end(), lab.begin(), lab.begin() + static_cast<std::ptrdiff_t>(w));
    amps.push_back(initial_->amplitude(p));
  }
  SparseState collapsed =
      SparseState::from_entries(initial_->layout(), std::move(labels), std::move(amps));
  ReductionOutcome<SparseState> out;
  out.diagnostics.attempts = 1;
  out.diagnostics.measured = y;
  out.diagnostics.support_size = static_cast<std::int64_t>(collapsed.size());
  const auto [lo, hi] = j_window(*initial_);
  if (full_progression(collapsed, lo, hi)) out.diagnostics.successes = 1;
  out.payload = std::move(collapsed);
  return out;
}

ReductionOutcome<std::vector<SparseState>> lwe_to_edcp_ball(
    const LwePublic& pub, double r, int kappa, const BallOptions& opts, Rng& rng) {
  const BallReduction red(pub, GaussianParam(r, kappa), opts, true);
  const std::int64_t budget = default_attempts(opts.max_attempts, opts.ell);
  ReductionOutcome<std::vector<SparseState>> out;
  std::vector<SparseState> states;
  while (static_cast<int>(states.size()) < opts.ell && out.diagnostics.attempts < budget) {
    auto one = red.attempt(rng);
    ++out.diagnostics.attempts;
    out.diagnostics.measured = one.diagnostics.measured;
    out.diagnostics.support_size = one.diagnostics.support_size;
    if (one.diagnostics.successes == 1) {
      ++out.diagnostics.successes;
      states.push_back(std::move(*one.payload));
    }
  }
  if (static_cast<int>(states.size()) == opts.ell) out.payload = std::move(states);
  return out;
}

ReductionOutcome<std::vector<SparseState>> dlwe_to_dedcp(
    const LwePublic& pub, double r, int kappa, const BallOptions& opts, Rng& rng,
    std::shared_ptr<const SparseState> initial) {
  const BallReduction red(pub, GaussianParam(r, kappa), opts, false, std::move(initial));
  ReductionOutcome<std::vector<SparseState>> out;
  std::vector<SparseState> states;
  for (int k = 0; k < opts.ell; ++k) {
    auto one = red.attempt(rng);
    ++out.diagnostics.attempts;
    out.diagnostics.successes += one.diagnostics.successes;
    out.diagnostics.measured = one.diagnostics.measured;
    out.diagnostics.support_size = one.diagnostics.support_size;
    states.push_back(std::move(*one.payload));
  }
  out.payload = std::move(states);
  return out;
}

double ball_intersection_ratio(int m, double R, const std::vector<double>& dbar,
                               std::int64_t L, std::int64_t q,
                               std::int64_t mc_samples, std::uint64_t mc_seed) {
  if (m < 1 || static_cast<int>(dbar.size()) != m) throw ParameterError("shift must have m entries");
  if (!(R >= 1) || L < 1) throw ParameterError("need R >= 1 and L >= 1");
  double dnorm = 0;
  for (double d : dbar) dnorm += d * d;
  dnorm = std::sqrt(dnorm);
  if (!(static_cast<double>(q) > 2 * R + dnorm)) {
    throw ParameterError("q must exceed 2 R + |dbar|");
  }
  const double Ld = static_cast<double>(L);
  const auto box = static_cast<std::int64_t>(std::floor(Ld * R));
  const double lr2 = (Ld * R) * (Ld * R);
  const double qd = static_cast<double>(q);
  auto in_shifted = [&](const std::vector<std::int64_t>& X) {
    double sq = 0;
    for (int i = 0; i < m; ++i) {
      double v = static_cast<double>(X[static_cast<std::size_t>(i)]) / Ld -
                 dbar[static_cast<std::size_t>(i)];
      v -= qd * std::round(v / qd);
      sq += v * v;
    }
    return sq <= R * R + 1e-9;
  };
  auto in_ball = [&](const std::vector<std::int64_t>& X) {
    double sq = 0;
    for (std::int64_t v : X) sq += static_cast<double>(v) * static_cast<double>(v);
    return sq <= lr2 + 1e-9;
  };
  std::int64_t total = 0, both = 0;
  std::vector<std::int64_t> X(static_cast<std::size_t>(m), -box);
  if (m <= 4) {
    while (true) {
      if (in_ball(X)) {
        ++total;
        if (in_shifted(X)) ++both;
      }
      int pos = m - 1;
      while (pos >= 0 && X[static_cast<std::size_t>(pos)] == box) {
        X[static_cast<std::size_t>(pos)] = -box;
        --pos;
      }
      if (pos < 0) break;
      ++X[static_cast<std::size_t>(pos)];
    }
  } else {
    Rng rng = make_rng(mc_seed);
    while (total < mc_samples) {
      for (auto& v : X) v = uniform_int(rng, -box, box);
      if (!in_ball(X)) continue;
      ++total;
      if (in_shifted(X)) ++both;
    }
  }
  return static_cast<double>(both) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// EDCP variants

ReductionOutcome<SparseState> g_to_u_size(const SparseState& state, std::int64_t M,
                                          Rng& rng) {
  require_edcp_layout(state);
  if (M < 1) throw ParameterError("M must be >= 1");
  const auto [lo, hi] = j_window(state);
  if (M - 1 > hi) throw ParameterError("M - 1 exceeds the Gaussian window");
  ReductionOutcome<SparseState> out;
  out.diagnostics.attempts = 1;

  const double branch = mass_where(state, [](LabelView l) { return l[0] >= 0; });
  SparseState anc = append_register(state, ModRegister{2, 1});
  anc = apply_classical(
      anc, [](LabelView j) { return Label{j[0] >= 0 ? 1 : 0}; }, {0}, 2,
      ClassicalMode::kWrite);
  MeasurementOutcome sign = measure(anc, 2, rng);
  out.diagnostics.measured = sign.value;
  if (sign.value[0] == 0) {
    out.diagnostics.accept_probability = 0;
    return out;
  }
  const SparseState kept = drop_register(sign.collapsed, 2);
  ResampleResult res = reshape_j(kept, 0, M - 1, [](std::int64_t) { return 1.0; }, rng);
  out.diagnostics.accept_probability = branch * res.accept_probability;
  if (!res.accepted) return out;
  out.diagnostics.successes = 1;
  out.payload = relabel_j(*res.state, M - 1, 0);
  out.diagnostics.support_size = static_cast<std::int64_t>(out.payload->size());
  return out;
}

ReductionOutcome<SparseState> g_to_u(const SparseState& state, double r, double c,
                                     Rng& rng) {
  const double Mr = c * r;
  const double rounded = std::round(Mr);
  if (std::fabs(Mr - rounded) > 1e-9 || rounded < 1) {
    throw ParameterError("M = c r must be a positive integer");
  }
  return g_to_u_size(state, static_cast<std::int64_t>(rounded), rng);
}

ReductionOutcome<SparseState> u_to_g(const SparseState& state, std::int64_t M,
                                     int kappa, Rng& rng) {
  require_edcp_layout(state);
  if (M < 1) throw ParameterError("M must be >= 1");
  const GaussianParam g(static_cast<double>(M) / std::sqrt(static_cast<double>(kappa)), kappa);
  const auto [lo, hi] = j_window(state);
  if (lo != 0 || hi != M - 1) throw PreconditionError("state is not supported on [0, M-1]");
  const std::int64_t h = (M - 1) / 2;
  const SparseState centered = relabel_j(state, std::max(g.cutoff, M), -h);
  ResampleResult res = reshape_j(
      centered, -h, M - 1 - h,
      [&g](std::int64_t j) { return rho(g.r, static_cast<double>(j)); }, rng);
  ReductionOutcome<SparseState> out;
  out.diagnostics.attempts = 1;
  out.diagnostics.accept_probability = res.accept_probability;
  if (!res.accepted) return out;
  out.diagnostics.successes = 1;
  out.payload = relabel_j(*res.state, g.cutoff, 0);
  out.diagnostics.support_size = static_cast<std::int64_t>(out.payload->size());
  return out;
}

ReductionOutcome<SparseState> edcp_self_reduce(const SparseState& state,
                                               const WeightFn& from,
                                               const WeightFn& to, Rng& rng) {
  require_edcp_layout(state);
  const bool gauss_from = from.kind() == WeightFn::Kind::kGaussian;
  const bool gauss_to = to.kind() == WeightFn::Kind::kGaussian;
  if (gauss_from != gauss_to) throw ParameterError("self reduction keeps the variant");
  std::int64_t lo, hi, bound;
  std::function<double(std::int64_t)> target;
  if (gauss_from) {
    if (!(to.gaussian_param().r < from.gaussian_param().r)) {
      throw ParameterError("self reduction needs r2 < r1");
    }
    lo = to.support_lo();
    hi = to.support_hi();
    bound = to.gaussian_param().cutoff;
  } else {
    if (!(to.uniform_size() < from.uniform_size())) {
      throw ParameterError("self reduction needs M2 < M1");
    }
    lo = 0;
    hi = to.uniform_size() - 1;
    bound = hi;
  }
  target = [&to](std::int64_t j) { return to(j); };
  ResampleResult res = reshape_j(state, lo, hi, target, rng);
  ReductionOutcome<SparseState> out;
  out.diagnostics.attempts = 1;
  out.diagnostics.accept_probability = res.accept_probability;
  if (!res.accepted) return out;
  out.diagnostics.successes = 1;
  out.payload = relabel_j(*res.state, bound, 0);
  out.diagnostics.support_size = static_cast<std::int64_t>(out.payload->size());
  return out;
}

bool dcp_wide_branch(std::int64_t N, double r) {
  return r >= 3.0 * std::log2(static_cast<double>(N));
}

ReductionOutcome<DcpOutput> gedcp_to_dcp(const SparseState& state, std::int64_t N,
                                         double r, Rng& rng, const DcpOptions& opts) {
  require_edcp_layout(state);
  if (state.layout().arity(1) != 1) throw ParameterError("DCP reduction needs n = 1");
  if (state.layout().modulus(1) != N) throw ParameterError("state modulus != N");
  ReductionOutcome<DcpOutput> out;
  out.diagnostics.attempts = 1;
  const bool wide = dcp_wide_branch(N, r);

  SparseState cur = state;
  double prior = 1.0;
  if (wide) {
    const auto half = static_cast<std::int64_t>(std::floor(opts.wide_c * r));
    auto u = g_to_u_size(state, 2 * half + 1, rng);
    prior = u.diagnostics.accept_probability;
    if (!u.payload) {
      out.diagnostics.accept_probability = prior;
      return out;
    }
    cur = relabel_j(*u.payload, half, -half);
  }
  const auto [lo, hi] = j_window(cur);
  const std::int64_t vmax = std::max(-lo, hi);
  SparseState anc = append_register(cur, ModRegister{vmax + 1, 1});
  anc = apply_classical(
      anc, [](LabelView j) { return Label{j[0] < 0 ? -j[0] : j[0]}; }, {0}, 2,
      ClassicalMode::kWrite);
  const auto law = marginal(anc, 2);
  MeasurementOutcome vm = measure(anc, 2, rng);
  const std::int64_t v = vm.value[0];
  out.diagnostics.measured = {v};
  double p_good = 0;
  for (const auto& [val, p] : law) {
    const std::int64_t vv = val[0];
    const bool good = wide ? (vv != 0 && gcd(vv, N) == 1) : vv == 1;
    if (good) p_good += p;
  }
  out.diagnostics.accept_probability = prior * p_good;
  const bool good = wide ? (v != 0 && gcd(v, N) == 1) : v == 1;
  const SparseState pair = drop_register(vm.collapsed, 2);
  out.diagnostics.support_size = static_cast<std::int64_t>(pair.size());
  // Both +v and -v must survive for a two-point output.
  if (!good || pair.size() != 2) return out;
  const std::int64_t inv = *inverse_mod(v, N);
  SparseState dcp = apply_bijection(
      pair, with_int_bound(pair.layout(), 1), [v, inv, N](LabelView l) {
        return Label{l[0] == -v ? 0 : 1, mod(l[1] * inv, N)};
      });
  out.diagnostics.successes = 1;
  out.payload = DcpOutput{std::move(dcp), N % 2 == 0};
  return out;
}

}  // namespace dihedral
