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

// Gaussian weights, discrete Gaussian sampling, tail masses and the Poisson
// summation identity on scaled copies of Z.

#ifndef DIHEDRAL_CORE_MATH_HPP_
#define DIHEDRAL_CORE_MATH_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dihedral/random.hpp"

namespace dihedral {

inline constexpr int kDefaultKappa = 64;
inline constexpr int kWorkingKappa = 64;

struct GaussianParam {
  GaussianParam(double r, int kappa = kDefaultKappa);

  double r;
  int kappa;
  std::int64_t cutoff;  // ceil(sqrt(kappa) * r)
};

// The amplitude profile f(j) of an EDCP state.
class WeightFn {
 public:
  enum class Kind { kGaussian, kUniform, kIndicator01 };

  static WeightFn gaussian(const GaussianParam& g);
  static WeightFn uniform(std::int64_t M);
  static WeightFn indicator01();

  Kind kind() const { return kind_; }
  double operator()(std::int64_t j) const;

  // Truncated support window [lo, hi].
  std::int64_t support_lo() const;
  std::int64_t support_hi() const;

  const GaussianParam& gaussian_param() const;
  std::int64_t uniform_size() const;
  std::string describe() const;

  // pmf proportional to f(j)^2 over the support window, indexed from lo.
  std::vector<double> squared_pmf() const;

 private:
  WeightFn(Kind kind, GaussianParam g, std::int64_t M)
      : kind_(kind), g_(g), M_(M) {}

  Kind kind_;
  GaussianParam g_;
  std::int64_t M_;
};

double rho(double r, double x);
double rho(double r, std::span<const double> x);

// Sum of rho_r(j) over |j| <= B.
double rho_sum(double r, std::int64_t B);

// rho_r(Z) to machine precision.
double rho_total(double r);

// Summation radius ceil(sqrt(max(kappa, 64)) * r) used for sums over Z.
std::int64_t working_radius(double r, int kappa = kDefaultKappa);

// rho_r(Z \ [-B, B]) / rho_r(Z).
double tail_ratio(double r, std::int64_t B);
double tail_ratio(const GaussianParam& g);

// 2 exp(-(3/4) pi (sqrt(kappa) r + 1)^2 / (4 r^2)).
double tail_bound(const GaussianParam& g);

struct PoissonSides {
  double lhs;
  double rhs;
};

// Both sides of the Poisson summation formula for the lattice scale*Z.
PoissonSides poisson_check(double r, double u, double scale);

// Inverse-CDF sampler over an explicit weight table on [lo, lo + size).
class TableSampler {
 public:
  TableSampler(std::int64_t lo, std::vector<double> weights);

  std::int64_t operator()(Rng& rng) const;
  double pmf(std::int64_t j) const;
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return lo_ + static_cast<std::int64_t>(pmf_.size()) - 1; }

 private:
  std::int64_t lo_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

// D_{Z,r} truncated to [-cutoff, cutoff].
class DiscreteGaussianSampler {
 public:
  explicit DiscreteGaussianSampler(const GaussianParam& g);

  std::int64_t operator()(Rng& rng) const { return table_(rng); }
  double pmf(std::int64_t j) const { return table_.pmf(j); }
  const GaussianParam& param() const { return g_; }

 private:
  GaussianParam g_;
  TableSampler table_;
};

std::int64_t sample_discrete_gaussian(const GaussianParam& g, Rng& rng);

struct TailEstimate {
  double ratio;   // fraction of sampled points outside the radius
  double sigma;   // binomial standard error
  double radius;  // radius_multiplier * sqrt(m) * r
  std::int64_t trials;
};

// Monte-Carlo mass of Z^m + u outside radius multiplier*sqrt(m)*r, relative
// to rho_r(Z^m + u).
TailEstimate vector_tail_check(int m, double r, const std::vector<double>& u,
                               std::int64_t trials, Rng& rng,
                               double radius_multiplier = 1.0);

}  // namespace dihedral

#endif  // DIHEDRAL_CORE_MATH_HPP_
