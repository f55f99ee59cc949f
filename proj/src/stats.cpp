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

#include "dihedral/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>

#include "dihedral/errors.hpp"

namespace dihedral {

namespace {

std::vector<double> normalized(const std::vector<double>& w) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0)) throw ParameterError("probability vector has no mass");
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] / total;
  return out;
}

}  // namespace

ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts,
                               const std::vector<double>& expected) {
  if (counts.size() != expected.size() || counts.empty()) {
    throw ParameterError("chi-square needs matching non-empty vectors");
  }
  const std::vector<double> p = normalized(expected);
  const double n = static_cast<double>(
      std::accumulate(counts.begin(), counts.end(), std::int64_t{0}));
  if (n <= 0) throw ParameterError("chi-square needs observations");

  // An observation where the model puts no mass rejects outright; pooling
  // would otherwise hide it in a neighbouring cell.
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (p[i] == 0 && counts[i] > 0) {
      ChiSquareResult res;
      res.statistic = INFINITY;
      res.dof = static_cast<int>(counts.size()) - 1;
      res.p_value = 0.0;
      return res;
    }
  }

  std::vector<double> pooled_obs, pooled_exp;
  double obs = 0, exp = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    obs += static_cast<double>(counts[i]);
    exp += p[i] * n;
    if (exp >= 5.0) {
      pooled_obs.push_back(obs);
      pooled_exp.push_back(exp);
      obs = exp = 0;
    }
  }
  if (exp > 0 || obs > 0) {
    if (pooled_exp.empty()) {
      pooled_obs.push_back(obs);
      pooled_exp.push_back(exp);
    } else {
      pooled_obs.back() += obs;
      pooled_exp.back() += exp;
    }
  }

  ChiSquareResult res;
  res.dof = static_cast<int>(pooled_exp.size()) - 1;
  for (std::size_t i = 0; i < pooled_exp.size(); ++i) {
    if (pooled_exp[i] <= 0) {
      if (pooled_obs[i] > 0) res.statistic = INFINITY;
      continue;
    }
    double d = pooled_obs[i] - pooled_exp[i];
    res.statistic += d * d / pooled_exp[i];
  }
  if (res.dof < 1) {
    res.p_value = 1.0;
  } else if (!std::isfinite(res.statistic)) {
    res.p_value = 0.0;
  } else {
    boost::math::chi_squared dist(res.dof);
    res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  }
  return res;
}

ChiSquareResult chi_square_uniform(const std::vector<std::int64_t>& counts) {
  return chi_square_gof(counts, std::vector<double>(counts.size(), 1.0));
}

double total_variation(const std::vector<std::int64_t>& counts,
                       const std::vector<double>& pmf) {
  std::vector<double> emp(counts.begin(), counts.end());
  return total_variation(emp, pmf);
}

double total_variation(const std::vector<double>& p,
                       const std::vector<double>& q) {
  if (p.size() != q.size()) throw ParameterError("length mismatch");
  const std::vector<double> a = normalized(p);
  const std::vector<double> b = normalized(q);
  double tv = 0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::fabs(a[i] - b[i]);
  return tv / 2;
}

double binomial_sigma(double p, std::int64_t n) {
  if (n <= 0) throw ParameterError("binomial sigma needs n >= 1");
  return std::sqrt(std::max(0.0, p * (1 - p)) / static_cast<double>(n));
}

}  // namespace dihedral
