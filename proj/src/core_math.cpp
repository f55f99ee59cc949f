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

#include "dihedral/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "dihedral/errors.hpp"
#include "dihedral/stats.hpp"

namespace dihedral {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double r) {
  if (!(r > 0) || !std::isfinite(r)) {
    throw ParameterError("Gaussian width must be positive");
  }
}

// Sum of f(j) for j >= start while terms still matter at double precision.
template <class F>
double sum_decaying(std::int64_t start, F f) {
  double acc = 0;
  for (std::int64_t j = start;; ++j) {
    double t = f(j);
    if (t == 0 || (acc > 0 && t < acc * 1e-18)) break;
    acc += t;
  }
  return acc;
}

}  // namespace

GaussianParam::GaussianParam(double r_in, int kappa_in)
    : r(r_in), kappa(kappa_in), cutoff(0) {
  require_positive(r);
  if (kappa < 1) throw ParameterError("kappa must be at least 1");
  cutoff = static_cast<std::int64_t>(std::ceil(std::sqrt(kappa) * r - 1e-12));
  cutoff = std::max<std::int64_t>(cutoff, 1);
}

WeightFn WeightFn::gaussian(const GaussianParam& g) {
  return WeightFn(Kind::kGaussian, g, 0);
}

WeightFn WeightFn::uniform(std::int64_t M) {
  if (M < 1) throw ParameterError("uniform weight needs M >= 1");
  return WeightFn(Kind::kUniform, GaussianParam(1.0), M);
}

WeightFn WeightFn::indicator01() {
  return WeightFn(Kind::kIndicator01, GaussianParam(1.0), 2);
}

double WeightFn::operator()(std::int64_t j) const {
  if (kind_ == Kind::kGaussian) {
    if (j < -g_.cutoff || j > g_.cutoff) return 0.0;
    return rho(g_.r, static_cast<double>(j));
  }
  return (j >= 0 && j < M_) ? 1.0 : 0.0;
}

std::int64_t WeightFn::support_lo() const {
  return kind_ == Kind::kGaussian ? -g_.cutoff : 0;
}

std::int64_t WeightFn::support_hi() const {
  return kind_ == Kind::kGaussian ? g_.cutoff : M_ - 1;
}

const GaussianParam& WeightFn::gaussian_param() const {
  if (kind_ != Kind::kGaussian) throw ParameterError("weight is not Gaussian");
  return g_;
}

std::int64_t WeightFn::uniform_size() const {
  if (kind_ == Kind::kGaussian) throw ParameterError("weight is Gaussian");
  return M_;
}

std::string WeightFn::describe() const {
  switch (kind_) {
    case Kind::kGaussian:
      return "gaussian(r=" + std::to_string(g_.r) +
             ",kappa=" + std::to_string(g_.kappa) + ")";
    case Kind::kUniform:
      return "uniform(M=" + std::to_string(M_) + ")";
    case Kind::kIndicator01:
      return "indicator01";
  }
  return "";
}

std::vector<double> WeightFn::squared_pmf() const {
  std::vector<double> p;
  for (std::int64_t j = support_lo(); j <= support_hi(); ++j) {
    double w = (*this)(j);
    p.push_back(w * w);
  }
  double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
  return p;
}

double rho(double r, double x) {
  require_positive(r);
  return std::exp(-kPi * x * x / (r * r));
}

double rho(double r, std::span<const double> x) {
  require_positive(r);
  double sq = 0;
  for (double v : x) sq += v * v;
  return std::exp(-kPi * sq / (r * r));
}

double rho_sum(double r, std::int64_t B) {
  require_positive(r);
  double acc = 0;
  // Smallest terms first.
  for (std::int64_t j = B; j >= 1; --j) acc += 2 * rho(r, static_cast<double>(j));
  return acc + 1.0;
}

std::int64_t working_radius(double r, int kappa) {
  require_positive(r);
  const int k = std::max(kappa, kWorkingKappa);
  return static_cast<std::int64_t>(std::ceil(std::sqrt(k) * r));
}

double rho_total(double r) { return rho_sum(r, working_radius(r) + 1); }

double tail_ratio(double r, std::int64_t B) {
  require_positive(r);
  if (B < 0) throw ParameterError("tail radius must be nonnegative");
  double tail = sum_decaying(B + 1, [r](std::int64_t j) {
    return rho(r, static_cast<double>(j));
  });
  return 2 * tail / rho_total(r);
}

double tail_ratio(const GaussianParam& g) { return tail_ratio(g.r, g.cutoff); }

double tail_bound(const GaussianParam& g) {
  const double a = std::sqrt(static_cast<double>(g.kappa)) * g.r + 1;
  return 2 * std::exp(-0.75 * kPi * a * a / (4 * g.r * g.r));
}

PoissonSides poisson_check(double r, double u, double scale) {
  require_positive(r);
  if (!(scale > 0)) throw ParameterError("lattice scale must be positive");
  // Both sides truncated where the Gaussian is below exp(-64 pi).
  const double reach = 8.0 * r + 1.0;
  const auto j_lo = static_cast<std::int64_t>(std::floor((-u - reach) / scale));
  const auto j_hi = static_cast<std::int64_t>(std::ceil((-u + reach) / scale));
  double lhs = 0;
  for (std::int64_t j = j_lo; j <= j_hi; ++j) lhs += rho(r, scale * j + u);

  const double dual_reach = 8.0 / r + 1.0;
  const auto k_hi = static_cast<std::int64_t>(std::ceil(dual_reach * scale));
  double rhs = 0;
  for (std::int64_t k = -k_hi; k <= k_hi; ++k) {
    const double x = static_cast<double>(k) / scale;
    rhs += std::cos(2 * kPi * x * u) * rho(1.0 / r, x);
  }
  rhs *= r / scale;
  return {lhs, rhs};
}

TableSampler::TableSampler(std::int64_t lo, std::vector<double> weights)
    : lo_(lo), pmf_(std::move(weights)) {
  double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  if (pmf_.empty() || !(total > 0)) {
    throw ParameterError("sampler needs positive total weight");
  }
  cdf_.resize(pmf_.size());
  double acc = 0;
  for (std::size_t i = 0; i < pmf_.size(); ++i) {
    pmf_[i] /= total;
    acc += pmf_[i];
    cdf_[i] = acc;
  }
  std::size_t last = pmf_.size() - 1;
  while (pmf_[last] == 0) --last;
  std::fill(cdf_.begin() + static_cast<std::ptrdiff_t>(last), cdf_.end(), 1.0);
}

std::int64_t TableSampler::operator()(Rng& rng) const {
  const double u = uniform_unit(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - cdf_.begin());
  if (idx >= cdf_.size()) idx = cdf_.size() - 1;
  return lo_ + static_cast<std::int64_t>(idx);
}

double TableSampler::pmf(std::int64_t j) const {
  if (j < lo_ || j > hi()) return 0.0;
  return pmf_[static_cast<std::size_t>(j - lo_)];
}

namespace {

std::vector<double> gaussian_weights(const GaussianParam& g) {
  std::vector<double> w;
  for (std::int64_t j = -g.cutoff; j <= g.cutoff; ++j) {
    w.push_back(rho(g.r, static_cast<double>(j)));
  }
  return w;
}

}  // namespace

DiscreteGaussianSampler::DiscreteGaussianSampler(const GaussianParam& g)
    : g_(g), table_(-g.cutoff, gaussian_weights(g)) {}

std::int64_t sample_discrete_gaussian(const GaussianParam& g, Rng& rng) {
  return DiscreteGaussianSampler(g)(rng);
}

TailEstimate vector_tail_check(int m, double r, const std::vector<double>& u,
                               std::int64_t trials, Rng& rng,
                               double radius_multiplier) {
  require_positive(r);
  if (m < 1 || m > 8) throw ParameterError("vector tail check needs 1 <= m <= 8");
  if (static_cast<int>(u.size()) != m) throw ParameterError("shift length != m");
  if (trials < 1) throw ParameterError("trials must be positive");
  double unorm = 0;
  for (double v : u) unorm += v * v;
  if (std::sqrt(unorm) > r + 1e-12) throw ParameterError("shift must satisfy |u| <= r");

  const std::int64_t W = working_radius(r) + 2;
  std::vector<TableSampler> coords;
  for (int i = 0; i < m; ++i) {
    std::vector<double> w;
    for (std::int64_t j = -W; j <= W; ++j) w.push_back(rho(r, j + u[i]));
    coords.emplace_back(-W, std::move(w));
  }
  const double radius = radius_multiplier * std::sqrt(static_cast<double>(m)) * r;
  std::int64_t outside = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    double sq = 0;
    for (int i = 0; i < m; ++i) {
      const double x = static_cast<double>(coords[i](rng)) + u[i];
      sq += x * x;
    }
    if (sq > radius * radius) ++outside;
  }
  const double ratio = static_cast<double>(outside) / static_cast<double>(trials);
  return {ratio, binomial_sigma(ratio, trials), radius, trials};
}

}  // namespace dihedral
