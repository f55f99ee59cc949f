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

#ifndef DIHEDRAL_STATS_HPP_
#define DIHEDRAL_STATS_HPP_

#include <cstdint>
#include <vector>

namespace dihedral {

struct ChiSquareResult {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};

// Pearson goodness of fit of `counts` against probabilities `expected`
// (normalized internally). Adjacent bins are pooled until every pooled bin
// expects at least five observations.
ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts,
                               const std::vector<double>& expected);

// Same, against the uniform law on counts.size() bins.
ChiSquareResult chi_square_uniform(const std::vector<std::int64_t>& counts);

// Total variation between the empirical law of `counts` and `pmf`
// (normalized internally).
double total_variation(const std::vector<std::int64_t>& counts,
                       const std::vector<double>& pmf);

// Total variation between two probability vectors of equal length.
double total_variation(const std::vector<double>& p,
                       const std::vector<double>& q);

// Standard deviation of the empirical frequency of a Bernoulli(p) over n.
double binomial_sigma(double p, std::int64_t n);

}  // namespace dihedral

#endif  // DIHEDRAL_STATS_HPP_
