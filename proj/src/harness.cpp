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

#include "dihedral/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "dihedral/core_math.hpp"
#include "dihedral/edcp_model.hpp"
#include "dihedral/errors.hpp"
#include "dihedral/modular.hpp"
#include "dihedral/oracles.hpp"
#include "dihedral/qary_lattice.hpp"
#include "dihedral/random.hpp"
#include "dihedral/reductions.hpp"
#include "dihedral/stats.hpp"
#include "dihedral/statevector.hpp"

namespace dihedral {

namespace {

using json = nlohmann::ordered_json;

constexpr std::pair<Experiment, std::string_view> kExperimentNames[] = {
    {Experiment::kRoundtripCube, "roundtrip-cube"},
    {Experiment::kRoundtripBall, "roundtrip-ball"},
    {Experiment::kEdcp2LweStats, "edcp2lwe-stats"},
    {Experiment::kDecisionalE2L, "decisional-e2l"},
    {Experiment::kDecisionalL2E, "decisional-l2e"},
    {Experiment::kGridClaims, "grid-claims"},
    {Experiment::kBallClaims, "ball-claims"},
    {Experiment::kVariantConversions, "variant-conversions"},
    {Experiment::kDcpChain, "dcp-chain"},
    {Experiment::kMathChecks, "math-checks"},
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

// Typed access to the experiment's key/value map. Every key read is echoed
// with its effective value; finish() rejects whatever nobody asked for.
class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  double real(const std::string& key, double def) {
    double v = def;
    if (auto s = lookup(key)) {
      std::size_t used = 0;
      try {
        v = std::stod(*s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == s->size() && std::isfinite(v), "parameter " + key + " is not a number");
    }
    echo_[key] = v;
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t def) {
    std::int64_t v = def;
    if (auto s = lookup(key)) {
      auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
      require(ec == std::errc() && ptr == s->data() + s->size(),
              "parameter " + key + " is not an integer");
    }
    echo_[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool def) {
    bool v = def;
    if (auto s = lookup(key)) {
      if (*s == "true" || *s == "1") {
        v = true;
      } else if (*s == "false" || *s == "0") {
        v = false;
      } else {
        throw ParameterError("parameter " + key + " must be true or false");
      }
    }
    echo_[key] = v;
    return v;
  }

  std::string choice(const std::string& key, const std::string& def,
                     const std::vector<std::string>& allowed) {
    std::string v = lookup(key).value_or(def);
    require(std::find(allowed.begin(), allowed.end(), v) != allowed.end(),
            "parameter " + key + " has unsupported value " + v);
    echo_[key] = v;
    return v;
  }

  void finish(Thresholds& th) {
    for (const auto& [key, value] : raw_) {
      if (key.rfind("threshold.", 0) == 0) {
        double v = 0;
        std::size_t used = 0;
        try {
          v = std::stod(value, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        require(used == value.size(), "threshold " + key + " is not a number");
        th.set(key.substr(10), v);
      } else if (!used_.contains(key)) {
        throw ParameterError("unknown parameter: " + key);
      }
    }
  }

  const json& echo() const { return echo_; }

 private:
  std::optional<std::string> lookup(const std::string& key) {
    used_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::string, std::string>& raw_;
  std::set<std::string> used_;
  json echo_ = json::object();
};

class Checks {
 public:
  void at_least(const std::string& name, double value, double floor) {
    add(name, value, ">=", floor, value >= floor);
  }
  void at_most(const std::string& name, double value, double ceiling) {
    add(name, value, "<=", ceiling, value <= ceiling);
  }
  void equals(const std::string& name, std::int64_t value, std::int64_t expected) {
    add(name, static_cast<double>(value), "==", static_cast<double>(expected),
        value == expected);
  }

  json to_json() const { return list_; }
  bool pass() const { return pass_; }

 private:
  void add(const std::string& name, double value, const char* op, double threshold,
           bool ok) {
    list_.push_back({{"name", name},
                     {"value", value},
                     {"op", op},
                     {"threshold", threshold},
                     {"pass", ok}});
    pass_ = pass_ && ok;
  }

  json list_ = json::array();
  bool pass_ = true;
};

using TrialBody = std::function<void(std::int64_t, Rng&, json&)>;

// Trial i always sees rng seeded from derive_seed(seed, i); records are
// stored by index so the worker count never changes the output.
std::vector<json> run_trials(std::int64_t trials, std::uint64_t seed, const TrialBody& body) {
  std::vector<json> out(static_cast<std::size_t>(trials));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        json rec;
        rec["trial"] = i;
        body(i, rng, rec);
        out[static_cast<std::size_t>(i)] = std::move(rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next.store(trials);
        return;
      }
    }
  };
  const auto n = static_cast<int>(std::min<std::int64_t>(worker_count(), trials));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// Streams for setup and side phases, disjoint from the per-trial seeds.
std::uint64_t side_seed(std::uint64_t seed, std::uint64_t tag) {
  return derive_seed(derive_seed(seed, ~std::uint64_t{0}), tag);
}

Rng side_rng(std::uint64_t seed, std::uint64_t tag) { return make_rng(side_seed(seed, tag)); }

double rate(std::int64_t hits, std::int64_t total) {
  return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

json chi_json(const ChiSquareResult& c) {
  return {{"statistic", c.statistic}, {"dof", c.dof}, {"p_value", c.p_value}};
}

std::int64_t rank_residues(const Residues& v, std::int64_t q) {
  std::int64_t idx = 0;
  for (std::int64_t x : v) idx = idx * q + x;
  return idx;
}

LweParams lwe_params(Params& p, std::int64_t q, int m, int n, int kappa) {
  LweParams lp;
  lp.q = p.integer("q", q);
  lp.m = static_cast<int>(p.integer("m", m));
  lp.n = static_cast<int>(p.integer("n", n));
  lp.kappa = static_cast<int>(p.integer("kappa", kappa));
  require(lp.q >= 2, "q must be >= 2");
  lp.alpha = p.real("alpha_q", 1.0) / static_cast<double>(lp.q);
  lp.validate();
  return lp;
}

LwePublic uniform_public(const LweParams& params, Rng& rng) {
  LwePublic pub;
  pub.params = params;
  pub.A = random_matrix(params.m, params.n, params.q, rng);
  pub.b.resize(static_cast<std::size_t>(params.m));
  for (auto& v : pub.b) v = uniform_int(rng, 0, params.q - 1);
  return pub;
}

std::shared_ptr<const SparseState> shared_superposition(const LweParams& lp,
                                                        const GaussianParam& g) {
  auto qn = checked_pow(lp.q, lp.n, std::int64_t{1} << 22);
  require(qn && *qn * (2 * g.cutoff + 1) <= (std::int64_t{1} << 22),
          "q^n (2 cutoff + 1) exceeds the simulator budget");
  return std::make_shared<const SparseState>(uniform_secret_superposition(lp.q, lp.n, g));
}

// A full-window output whose progression step is s0 and whose amplitudes
// match the ideal state exactly.
bool verify_planted(const SparseState& state, const Residues& s0, const WeightFn& dist) {
  auto st = edcp_support_structure(state);
  return st && st->step == s0 && verify_edcp_state(state, s0, st->offset, dist);
}

double sum_rho_sq(double r, std::int64_t lo, std::int64_t hi) {
  double s = 0;
  for (std::int64_t j = lo; j <= hi; ++j) {
    const double w = rho(r, static_cast<double>(j));
    s += w * w;
  }
  return s;
}

// ---------------------------------------------------------------------------
// math-checks

void math_checks(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
                 Checks& checks) {
  const std::string suite = p.choice(
      "suite", "all", {"all", "poisson", "tail", "simulator", "rejection", "sampler"});
  const std::int64_t batch = p.integer("batch", 100);
  const double sampler_r = p.real("sampler_r", 3.0);
  require(batch >= 1, "batch must be >= 1");
  require(sampler_r > 0, "sampler_r must be positive");
  p.finish(th);
  auto on = [&](const char* s) { return suite == "all" || suite == s; };
  json& agg = rep.aggregates;

  if (on("poisson")) {
    double worst = 0;
    int points = 0;
    for (double r : {0.5, 1.0, 2.0, 3.5, 8.0}) {
      for (double u : {0.0, 0.25, 0.5, 0.8}) {
        for (double scale : {1.0, 2.5}) {
          const PoissonSides s = poisson_check(r, u, scale);
          worst = std::max(worst, std::abs(s.lhs - s.rhs) /
                                      std::max(std::abs(s.lhs), std::abs(s.rhs)));
          ++points;
        }
      }
    }
    agg["poisson"] = {{"points", points}, {"max_rel_error", worst}};
    checks.at_most("poisson.max_rel_error", worst, th.poisson_rel_tol);
  }

  if (on("tail")) {
    std::int64_t violations = 0;
    double worst = 0;
    for (double r : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      for (int kappa : {4, 9, 16, 64}) {
        const GaussianParam g(r, kappa);
        const double ratio = tail_ratio(g), bound = tail_bound(g);
        if (!(ratio < bound)) ++violations;
        worst = std::max(worst, ratio / bound);
      }
    }
    agg["tail"] = {{"points", 20}, {"violations", violations}, {"max_ratio_over_bound", worst}};
    checks.equals("tail.violations", violations, 0);
  }

  // Simulator fixtures: two random states on Z_12 x Z_5.
  const RegisterLayout sim_layout({ModRegister{12, 1}, ModRegister{5, 1}});
  std::optional<SparseState> born_state;
  if (on("simulator")) {
    Rng srng = side_rng(cfg.seed, 1);
    std::normal_distribution<double> normal;
    auto random_state = [&] {
      std::vector<std::int64_t> labels;
      std::vector<Amplitude> amps;
      for (std::int64_t a = 0; a < 12; ++a) {
        for (std::int64_t b = 0; b < 5; ++b) {
          labels.insert(labels.end(), {a, b});
          amps.emplace_back(normal(srng), normal(srng));
        }
      }
      return SparseState::from_entries(sim_layout, labels, amps);
    };
    const SparseState psi = random_state(), phi = random_state();
    double worst = 0;
    for (std::size_t reg = 0; reg < 2; ++reg) {
      const SparseState f = qft_mod(psi, reg, Direction::kForward);
      const SparseState g = qft_mod(phi, reg, Direction::kForward);
      worst = std::max(worst, std::abs(f.norm() - 1.0));
      worst = std::max(worst, std::abs(l2_distance(f, g) - l2_distance(psi, phi)));
      worst = std::max(worst, l2_distance(qft_mod(f, reg, Direction::kInverse), psi));
      const std::int64_t N = sim_layout.modulus(reg);
      const SparseState negated = apply_bijection(psi, sim_layout, [&](LabelView l) {
        Label out(l.begin(), l.end());
        out[reg] = mod(-out[reg], N);
        return out;
      });
      worst = std::max(worst, l2_distance(qft_mod(f, reg, Direction::kForward), negated));
    }
    agg["simulator"] = {{"max_unitarity_deviation", worst}};
    checks.at_most("simulator.max_unitarity_deviation", worst, 1e-10);
    born_state = qft_mod(psi, 0, Direction::kForward);
  }

  struct RejectionPair {
    std::string name;
    SparseState state;
    std::function<double(LabelView)> p;
  };
  std::vector<RejectionPair> pairs;
  if (on("rejection")) {
    const RegisterLayout l({IntRegister{8}});
    auto weighted = [&](const std::function<Amplitude(std::int64_t)>& a) {
      std::vector<std::int64_t> labels;
      std::vector<Amplitude> amps;
      for (std::int64_t j = -8; j <= 8; ++j) {
        if (std::abs(a(j)) == 0) continue;
        labels.push_back(j);
        amps.push_back(a(j));
      }
      return SparseState::from_entries(l, labels, amps);
    };
    const double s4 = std::sqrt(sum_rho_sq(4, -8, 8));
    const double inv8 = 1 / std::sqrt(8.0);
    SparseState uniform8 = weighted([](std::int64_t j) {
      return Amplitude(j >= 0 && j < 8 ? 1.0 : 0.0);
    });
    SparseState gauss4 = weighted([](std::int64_t j) { return Amplitude(rho(4, double(j))); });
    Rng srng = side_rng(cfg.seed, 2);
    std::vector<Amplitude> phases;
    for (int i = 0; i < 17; ++i) {
      const double th_i = 2 * std::numbers::pi * uniform_unit(srng);
      phases.emplace_back((0.5 + uniform_unit(srng)) * std::cos(th_i),
                          (0.5 + uniform_unit(srng)) * std::sin(th_i));
    }
    SparseState random17 = weighted([&](std::int64_t j) { return phases[j + 8]; });
    pairs.push_back({"uniform8_to_uniform4", uniform8, [inv8](LabelView x) {
                       return x[0] < 4 ? inv8 : 0.0;
                     }});
    pairs.push_back({"gauss4_to_gauss2", gauss4, [s4](LabelView x) {
                       return rho(2, double(x[0])) / s4;
                     }});
    pairs.push_back({"gauss4_to_uniform3", gauss4, [s4](LabelView x) {
                       return std::abs(x[0]) <= 1 ? rho(4, 1.0) / s4 : 0.0;
                     }});
    pairs.push_back({"uniform8_to_linear", uniform8, [inv8](LabelView x) {
                       return inv8 * static_cast<double>(8 - x[0]) / 8.0;
                     }});
    const SparseState r17 = random17;
    pairs.push_back({"random_to_ramp", random17, [r17](LabelView x) {
                       return std::abs(r17.amplitude_of(x)) * static_cast<double>(x[0] + 9) / 18.0;
                     }});
  }

  std::optional<DiscreteGaussianSampler> sampler;
  if (on("sampler")) sampler.emplace(GaussianParam(sampler_r));

  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    if (born_state) {
      json shots = json::array();
      for (std::int64_t b = 0; b < batch; ++b) shots.push_back(measure(*born_state, 0, rng).value[0]);
      rec["born"] = std::move(shots);
    }
    if (!pairs.empty()) {
      json acc = json::array();
      for (const auto& pr : pairs) acc.push_back(rejection_resample(pr.state, pr.p, rng).accepted);
      rec["accept"] = std::move(acc);
    }
    if (sampler) {
      json draws = json::array();
      for (std::int64_t b = 0; b < batch; ++b) draws.push_back((*sampler)(rng));
      rec["draws"] = std::move(draws);
    }
  });

  if (born_state) {
    std::vector<double> exact(12, 0.0);
    for (std::size_t i = 0; i < born_state->size(); ++i) {
      exact[static_cast<std::size_t>(born_state->label(i)[0])] += std::norm(born_state->amplitude(i));
    }
    std::vector<std::int64_t> counts(12, 0);
    for (const json& r : rep.trials) {
      for (const auto& v : r["born"]) ++counts[v.get<std::size_t>()];
    }
    const ChiSquareResult c = chi_square_gof(counts, exact);
    agg["born"] = {{"shots", cfg.trials * batch}, {"chi2", chi_json(c)}};
    checks.at_least("born.chi2_p", c.p_value, th.chi2_p_floor);
  }
  if (!pairs.empty()) {
    json list = json::array();
    double worst_z = 0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      double norm2 = 0;
      for (std::size_t i = 0; i < pairs[k].state.size(); ++i) {
        const double v = pairs[k].p(pairs[k].state.label(i));
        norm2 += v * v;
      }
      std::int64_t hits = 0;
      for (const json& r : rep.trials) hits += r["accept"][k].get<bool>() ? 1 : 0;
      const double emp = rate(hits, cfg.trials);
      const double z = std::abs(emp - norm2) / binomial_sigma(norm2, cfg.trials);
      worst_z = std::max(worst_z, z);
      list.push_back({{"pair", pairs[k].name}, {"p_norm_sq", norm2}, {"accept_rate", emp},
                      {"z", z}});
    }
    agg["rejection"] = {{"pairs", list}, {"max_z", worst_z}};
    checks.at_most("rejection.max_z", worst_z, th.sigma_slack);
  }
  if (sampler) {
    const std::int64_t c = sampler->param().cutoff;
    std::vector<double> pmf;
    for (std::int64_t j = -c; j <= c; ++j) pmf.push_back(rho(sampler_r, double(j)));
    std::vector<std::int64_t> counts(pmf.size(), 0);
    for (const json& r : rep.trials) {
      for (const auto& v : r["draws"]) ++counts[static_cast<std::size_t>(v.get<std::int64_t>() + c)];
    }
    const ChiSquareResult chi = chi_square_gof(counts, pmf);
    const double tv = total_variation(counts, pmf);
    agg["sampler"] = {{"r", sampler_r}, {"draws", cfg.trials * batch}, {"chi2", chi_json(chi)},
                      {"tv", tv}};
    checks.at_least("sampler.chi2_p", chi.p_value, th.chi2_p_floor);
    checks.at_most("sampler.tv", tv, th.sampler_tv_ceiling);
  }
}

// ---------------------------------------------------------------------------
// grid-claims

struct GridMatrix {
  ResidueMatrix A;
  std::int64_t lambda;
};

// A random matrix meeting the lemma's window for z = q / c.
GridMatrix grid_matrix(std::int64_t q, int m, int n, int c, bool injective, Rng& rng) {
  const double z = static_cast<double>(q) / c;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    ResidueMatrix A = random_matrix(m, n, q, rng);
    const std::int64_t lam = lambda1_inf(A).lambda1_inf;
    if (static_cast<double>(lam) >= 2 * z && (!injective || is_injective(A))) return {A, lam};
  }
  throw ResourceError("no matrix with lambda1_inf >= 2z found");
}

void grid_claims(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
                 Checks& checks) {
  const std::int64_t q = p.integer("q", 64);
  const int m = static_cast<int>(p.integer("m", 6));
  const int n = static_cast<int>(p.integer("n", 1));
  const int c = static_cast<int>(p.integer("c", 8));
  const int k = static_cast<int>(p.integer("k", 12));
  const std::int64_t q2 = p.integer("claim2_q", 32);
  const int m2 = static_cast<int>(p.integer("claim2_m", 3));
  const int k2 = static_cast<int>(p.integer("claim2_k", 6));
  require(c >= 8, "c must be >= 8");
  require(k >= m && k2 >= m2, "k must be >= m");
  require(q >= 2 && q2 >= 2 && n >= 1 && m >= n && m2 >= 1, "invalid lattice shape");
  require(checked_pow(q, n, kEnumerationBudget).has_value(), "q^n exceeds the enumeration budget");
  require(checked_pow(q2, 1, kEnumerationBudget) && m2 <= 8, "claim-2 grid too large");
  p.finish(th);

  Rng srng = side_rng(cfg.seed, 1);
  const GridMatrix g1 = grid_matrix(q, m, n, c, false, srng);
  const double z = static_cast<double>(q) / c;
  const double beta = static_cast<double>(g1.lambda) / (2.0 * c * k);

  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    const GridSpec spec = GridSpec::sample(q, m, c, k, rng);
    Residues x(static_cast<std::size_t>(n));
    for (auto& v : x) v = uniform_int(rng, 0, q - 1);
    const Residues ax = g1.A.apply(x);
    std::vector<double> u(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const double sign = uniform_int(rng, 0, 1) == 0 ? -1.0 : 1.0;
      u[i] = static_cast<double>(ax[i]) + sign * beta;
      v[i] = static_cast<double>(ax[i]) - sign * beta;
    }
    rec["same_cell"] = grid_fn(u, spec) == grid_fn(v, spec);
  });

  std::int64_t same = 0;
  for (const json& r : rep.trials) same += r["same_cell"].get<bool>() ? 1 : 0;
  const double emp = rate(same, cfg.trials);
  const double floor = std::pow(1.0 - 1.0 / k, m);
  const double lower = floor - th.sigma_slack * binomial_sigma(floor, cfg.trials);
  rep.aggregates["claim1"] = {
      {"lambda1_inf", g1.lambda},
      {"z", z},
      {"error_magnitude", beta},
      {"same_cell_rate", emp},
      {"exact_rate", std::pow(1.0 - 2 * beta / z, m)},
      {"floor", floor},
      {"lower_limit", lower}};
  checks.at_least("claim1.same_cell_rate", emp, lower);

  // Claim 2: exhaustive over x, errors {-beta, 0, beta}^m and w in thirds.
  const GridMatrix g2 = grid_matrix(q2, m2, 1, c, true, srng);
  const double beta2 = static_cast<double>(g2.lambda) / (2.0 * c * k2);
  std::int64_t grid3 = 1;
  for (int i = 0; i < m2; ++i) grid3 *= 3;
  std::int64_t violations = 0, evaluated = 0;
  for (std::int64_t wi = 0; wi < grid3; ++wi) {
    GridSpec spec{q2, c, k2, std::vector<double>(static_cast<std::size_t>(m2))};
    const Residues wd = unrank(wi, 3, m2);
    for (int i = 0; i < m2; ++i) spec.w[i] = static_cast<double>(wd[i]) / 3.0;
    std::map<std::vector<std::int64_t>, std::int64_t> owner;
    for (std::int64_t x = 0; x < q2; ++x) {
      const Residues ax = g2.A.apply(Residues{x});
      for (std::int64_t ei = 0; ei < grid3; ++ei) {
        const Residues ed = unrank(ei, 3, m2);
        std::vector<double> u(static_cast<std::size_t>(m2));
        for (int i = 0; i < m2; ++i) {
          u[i] = static_cast<double>(ax[i]) + static_cast<double>(ed[i] - 1) * beta2;
        }
        auto [it, fresh] = owner.emplace(grid_fn(u, spec), x);
        if (!fresh && it->second != x) ++violations;
        ++evaluated;
      }
    }
  }
  rep.aggregates["claim2"] = {{"q", q2},
                              {"m", m2},
                              {"k", k2},
                              {"lambda1_inf", g2.lambda},
                              {"error_magnitude", beta2},
                              {"points", evaluated},
                              {"violations", violations}};
  checks.equals("claim2.violations", violations, 0);
}

// ---------------------------------------------------------------------------
// ball-claims

void ball_claims(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
                 Checks& checks) {
  const double R = p.real("R", 8.0);
  const std::int64_t q = p.integer("q", 64);
  const int steps = static_cast<int>(p.integer("steps", 16));
  const std::int64_t cal_q = p.integer("cal_q", 4096);
  const int cal_m = static_cast<int>(p.integer("cal_m", 10));
  const int cal_kappa = static_cast<int>(p.integer("cal_kappa", 4));
  const double cal_r = p.real("cal_r", 2.0);
  const int cal_ell = static_cast<int>(p.integer("cal_ell", 4));
  const double spread = p.real("cal_spread", 0.05);
  const bool calibrate = p.flag("calibrate", true);
  require(R >= 1 && steps >= 1, "need R >= 1 and steps >= 1");
  require(static_cast<double>(q) > 3 * R, "q must exceed 3 R for the sweep");
  require(spread > 0 && spread < 0.5, "cal_spread must lie in (0, 0.5)");
  require(cal_ell >= 1, "cal_ell must be >= 1");
  const GaussianParam g(cal_r, cal_kappa);
  std::vector<LweParams> points;
  for (double f : {1.0 - spread, 1.0, 1.0 + spread}) {
    LweParams lp;
    lp.q = static_cast<std::int64_t>(std::llround(static_cast<double>(cal_q) * f));
    lp.n = 1;
    lp.m = cal_m;
    lp.kappa = cal_kappa;
    lp.alpha = 1.0 / static_cast<double>(lp.q);
    lp.validate();
    require(g.r < ball_width_bound(lp, cal_kappa, cal_ell, 1),
            "calibration point violates the ball reduction bound");
    points.push_back(lp);
  }
  p.finish(th);

  // Intersection sweeps along an axis and along the diagonal.
  json sweeps = json::array();
  bool at_zero = true, monotone = true;
  double worst_floor = 1.0;
  for (int m = 1; m <= 3; ++m) {
    const std::int64_t L = std::int64_t{16} >> m;
    for (bool diagonal : {false, true}) {
      if (m == 1 && diagonal) continue;
      json ratios = json::array();
      double prev = 1.0;
      for (int i = 0; i <= steps; ++i) {
        const double t = R * i / steps;
        std::vector<double> d(static_cast<std::size_t>(m), 0.0);
        if (diagonal) {
          for (auto& x : d) x = t / std::sqrt(static_cast<double>(m));
        } else {
          d[0] = t;
        }
        const double ratio = ball_intersection_ratio(m, R, d, L, q);
        if (i == 0) at_zero = at_zero && ratio == 1.0;
        monotone = monotone && ratio <= prev;
        prev = ratio;
        if (std::sqrt(static_cast<double>(m)) * t / R <= 0.25) worst_floor = std::min(worst_floor, ratio);
        ratios.push_back(ratio);
      }
      sweeps.push_back({{"m", m}, {"L", L}, {"direction", diagonal ? "diagonal" : "axis"},
                        {"ratios", ratios}});
    }
  }
  rep.aggregates["sweeps"] = sweeps;
  rep.aggregates["ratio_at_zero_is_one"] = at_zero;
  rep.aggregates["monotone"] = monotone;
  rep.aggregates["min_ratio_in_regime"] = worst_floor;
  checks.equals("sweep.ratio_at_zero_is_one", at_zero ? 1 : 0, 1);
  checks.equals("sweep.monotone", monotone ? 1 : 0, 1);
  checks.at_least("sweep.min_ratio_in_regime", worst_floor, th.ball_ratio_floor);

  if (!calibrate) {
    rep.trials = run_trials(cfg.trials, cfg.seed, [](std::int64_t, Rng&, json&) {});
    return;
  }

  // Calibration of the 1 - C / ell success constant at three nearby moduli.
  std::vector<std::shared_ptr<const SparseState>> initial;
  for (const auto& lp : points) initial.push_back(shared_superposition(lp, g));
  BallOptions opts;
  opts.ell = cal_ell;
  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    json bits = json::array();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const LweInstance inst = gen_lwe(points[k], rng);
      const BallReduction red(inst.public_view(), g, opts, true, initial[k]);
      bits.push_back(red.attempt(rng).diagnostics.successes == 1);
    }
    rec["ball_success"] = std::move(bits);
  });
  json cal = json::array();
  std::vector<double> C;
  for (std::size_t k = 0; k < points.size(); ++k) {
    std::int64_t hits = 0;
    for (const json& r : rep.trials) hits += r["ball_success"][k].get<bool>() ? 1 : 0;
    const double success = rate(hits, cfg.trials);
    C.push_back(cal_ell * (1.0 - success));
    cal.push_back({{"q", points[k].q}, {"success_rate", success}, {"C", C.back()}});
  }
  // Drift beyond the stability band is only charged once it exceeds the
  // binomial noise of the two rates involved.
  const double n_trials = static_cast<double>(cfg.trials);
  double drift = 0, excess = 0;
  if (C[1] > 0) {
    const double p1 = C[1] / cal_ell;
    for (std::size_t k : {std::size_t{0}, std::size_t{2}}) {
      const double pk = C[k] / cal_ell;
      const double d = std::abs(C[k] - C[1]) / C[1];
      const double rel_var = (1 - pk) / (std::max(pk, 1.0 / n_trials) * n_trials) +
                             (1 - p1) / (p1 * n_trials);
      const double sigma = (std::max(pk, p1 / n_trials) / p1) * std::sqrt(rel_var);
      drift = std::max(drift, d);
      excess = std::max(excess, d - th.ball_constant_stability - th.sigma_slack * sigma);
    }
  } else if (C[0] > 0 || C[2] > 0) {
    drift = 1.0;
    excess = 1.0;
  }
  rep.aggregates["calibration"] = {{"ell", cal_ell},
                                   {"points", cal},
                                   {"relative_drift", drift},
                                   {"drift_beyond_noise", excess}};
  checks.at_most("calibration.drift_beyond_noise", excess, 0.0);
}

// ---------------------------------------------------------------------------
// edcp2lwe-stats and decisional-e2l

EdcpParams gaussian_edcp(int n, std::int64_t N, double r, int kappa, int ell) {
  EdcpParams ep;
  ep.n = n;
  ep.N = N;
  ep.ell = ell;
  const GaussianParam g(r, kappa);
  ep.dist = WeightFn::gaussian(g);
  ep.validate();
  require(r >= std::sqrt(static_cast<double>(kappa)), "EDCP to LWE needs r >= sqrt(kappa)");
  require(N > 2 * g.cutoff, "N must exceed twice the Gaussian cutoff");
  return ep;
}

void edcp2lwe_stats(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
                    Checks& checks) {
  const int n = static_cast<int>(p.integer("n", 1));
  const std::int64_t N = p.integer("N", 64);
  const double r = p.real("r", 8.0);
  const int kappa = static_cast<int>(p.integer("kappa", 9));
  const std::string law = p.choice("error_law", "gaussian", {"gaussian", "amplitude-squared"});
  require(n >= 1 && checked_pow(N, n, std::int64_t{1} << 16), "N^n must be <= 2^16");
  const EdcpParams ep = gaussian_edcp(n, N, r, kappa, 1);
  p.finish(th);

  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    const EdcpInstance inst = gen_edcp(ep, rng);
    const LweSample smp = edcp_to_lwe_sample(inst.states[0], ep, rng);
    std::int64_t dot = 0;
    for (int i = 0; i < n; ++i) dot = mod(dot + smp.a[i] * inst.s[i], N);
    rec["a"] = smp.a;
    rec["b"] = smp.b;
    rec["s"] = inst.s;
    rec["e"] = center(smp.b - dot, N);
  });

  std::vector<std::int64_t> a_counts(static_cast<std::size_t>(*checked_pow(N, n, std::int64_t{1} << 16)), 0);
  std::vector<std::int64_t> e_counts(static_cast<std::size_t>(N), 0);
  for (const json& rec : rep.trials) {
    ++a_counts[static_cast<std::size_t>(rank_residues(rec["a"].get<Residues>(), N))];
    ++e_counts[static_cast<std::size_t>(mod(rec["e"].get<std::int64_t>(), N))];
  }
  const ChiSquareResult a_chi = chi_square_uniform(a_counts);
  const double w_gauss = static_cast<double>(N) / r;
  const double w_sq = edcp_to_lwe_error_width(ep);
  const double tv_gauss = total_variation(e_counts, folded_gaussian_pmf(w_gauss, N));
  const double tv_sq = total_variation(e_counts, folded_gaussian_pmf(w_sq, N));
  const double tv = law == "gaussian" ? tv_gauss : tv_sq;
  rep.aggregates["a_uniform"] = chi_json(a_chi);
  rep.aggregates["error"] = {{"law", law},
                             {"gaussian_width", w_gauss},
                             {"tv_gaussian", tv_gauss},
                             {"amplitude_squared_width", w_sq},
                             {"tv_amplitude_squared", tv_sq}};
  checks.at_least("a_uniform.chi2_p", a_chi.p_value, th.chi2_p_floor);
  checks.at_most("error.tv", tv, th.reduction_tv_ceiling);
}

void decisional_e2l(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
                    Checks& checks) {
  const int n = static_cast<int>(p.integer("n", 1));
  const std::int64_t N = p.integer("N", 16);
  const double r = p.real("r", 2.0);
  const int kappa = static_cast<int>(p.integer("kappa", 4));
  const std::int64_t dist_N = p.integer("dist_N", 64);
  const double dist_r = p.real("dist_r", 8.0);
  const int dist_kappa = static_cast<int>(p.integer("dist_kappa", 9));
  const std::int64_t rounds = p.integer("rounds", 20);
  const int round_samples = static_cast<int>(p.integer("round_samples", 200));
  require(n >= 1 && checked_pow(N, n + 1, std::int64_t{1} << 16), "N^(n+1) must be <= 2^16");
  require(rounds >= 1 && round_samples >= 1, "rounds and round_samples must be >= 1");
  const EdcpParams ep = gaussian_edcp(n, N, r, kappa, 1);
  const EdcpParams dp = gaussian_edcp(n, dist_N, dist_r, dist_kappa, round_samples);
  require(checked_pow(dist_N, n, kEnumerationBudget).has_value(), "dist_N^n exceeds the budget");
  p.finish(th);

  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    const std::vector<SparseState> null = gen_decisional_null(ep, rng);
    const LweSample smp = edcp_to_lwe_sample(null[0], ep, rng);
    rec["a"] = smp.a;
    rec["b"] = smp.b;
  });
  const auto bins = static_cast<std::size_t>(*checked_pow(N, n + 1, std::int64_t{1} << 16));
  std::vector<std::int64_t> joint(bins, 0);
  for (const json& rec : rep.trials) {
    Residues ab = rec["a"].get<Residues>();
    ab.push_back(rec["b"].get<std::int64_t>());
    ++joint[static_cast<std::size_t>(rank_residues(ab, N))];
  }
  const ChiSquareResult chi = chi_square_uniform(joint);
  rep.aggregates["null_joint_uniform"] = chi_json(chi);
  checks.at_least("null_joint_uniform.chi2_p", chi.p_value, th.chi2_p_floor);

  // Planted-versus-null advantage of the brute-force dLWE decider.
  const double width = edcp_to_lwe_error_width(dp);
  const DlweDecider decide = [&](const std::vector<LweSample>& s) {
    return distinguish_lwe_bruteforce(s, n, dist_N, width).verdict;
  };
  const std::vector<json> per_round =
      run_trials(rounds, side_seed(cfg.seed, 1), [&](std::int64_t, Rng& rng, json& rec) {
        const EdcpInstance inst = gen_edcp(dp, rng);
        const DlweResult planted = dedcp_to_dlwe(inst.states, dp, rng, decide);
        const DlweResult null = dedcp_to_dlwe(gen_decisional_null(dp, rng), dp, rng, decide);
        rec["edcp_planted"] = *planted.verdict == LweVerdict::kPlanted;
        rec["null_planted"] = *null.verdict == LweVerdict::kPlanted;
      });
  std::int64_t hit = 0, false_alarm = 0;
  for (const json& rec : per_round) {
    hit += rec["edcp_planted"].get<bool>() ? 1 : 0;
    false_alarm += rec["null_planted"].get<bool>() ? 1 : 0;
  }
  const double advantage = rate(hit, rounds) - rate(false_alarm, rounds);
  rep.aggregates["distinguisher"] = {{"rounds", rounds},
                                     {"samples_per_round", round_samples},
                                     {"error_width", width},
                                     {"planted_on_edcp", rate(hit, rounds)},
                                     {"planted_on_null", rate(false_alarm, rounds)},
                                     {"advantage", advantage}};
  checks.at_least("distinguisher.advantage", advantage, th.distinguisher_advantage_floor);
}

// ---------------------------------------------------------------------------
// decisional-l2e

void decisional_l2e(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
                    Checks& checks) {
  const LweParams lp = lwe_params(p, 4096, 10, 1, 4);
  const double r = p.real("r", 2.0);
  const int ell = static_cast<int>(p.integer("ell", 1));
  const std::int64_t planted_runs = p.integer("planted_runs", 50);
  const bool enforce = p.flag("enforce_bound", true);
  require(ell >= 1 && planted_runs >= 0, "need ell >= 1 and planted_runs >= 0");
  const GaussianParam g(r, lp.kappa);
  BallOptions opts;
  opts.ell = ell;
  opts.enforce_theorem_bound = enforce;
  const auto initial = shared_superposition(lp, g);
  {
    Rng probe = side_rng(cfg.seed, 1);
    BallReduction(uniform_public(lp, probe), g, opts, false, initial);
  }
  p.finish(th);

  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    const LwePublic pub = uniform_public(lp, rng);
    auto out = dlwe_to_dedcp(pub, r, lp.kappa, opts, rng, initial);
    json support = json::array(), js = json::array(), ss = json::array();
    for (const SparseState& st : *out.payload) {
      support.push_back(st.size());
      js.push_back(st.label(0)[0]);
      ss.push_back(rank_residues(Residues(st.label(0).begin() + 1, st.label(0).end()), lp.q));
    }
    // Points are promised only when A is injective and lambda1(A|b) >= 3 R.
    // Each fails with probability about 2^-m, so both are checked on demand.
    bool all_points = true;
    for (const json& v : support) all_points = all_points && v.get<std::int64_t>() == 1;
    if (!all_points) {
      ResidueMatrix ab(lp.m, lp.n + 1, lp.q);
      for (int i = 0; i < lp.m; ++i) {
        for (int c = 0; c < lp.n; ++c) ab.set(i, c, pub.A(i, c));
        ab.set(i, lp.n, pub.b[static_cast<std::size_t>(i)]);
      }
      const double lam = std::sqrt(static_cast<double>(lambda1_l2_squared(ab)));
      rec["in_regime"] =
          is_injective(pub.A) && lam >= 3 * decisional_ball_radius(lp.q, lp.m, lp.n);
    }
    rec["support"] = std::move(support);
    rec["j"] = std::move(js);
    rec["s"] = std::move(ss);
  });

  std::int64_t non_point = 0, non_point_in_regime = 0, total = 0;
  std::vector<std::int64_t> j_counts(static_cast<std::size_t>(2 * g.cutoff + 1), 0);
  std::map<std::int64_t, std::int64_t> s_seen;
  for (const json& rec : rep.trials) {
    for (std::size_t k = 0; k < rec["support"].size(); ++k) {
      ++total;
      if (rec["support"][k].get<std::int64_t>() != 1) {
        ++non_point;
        if (rec["in_regime"].get<bool>()) ++non_point_in_regime;
        continue;
      }
      ++j_counts[static_cast<std::size_t>(rec["j"][k].get<std::int64_t>() + g.cutoff)];
      ++s_seen[rec["s"][k].get<std::int64_t>()];
    }
  }
  std::vector<double> j_pmf;
  for (std::int64_t j = -g.cutoff; j <= g.cutoff; ++j) {
    const double w = rho(r, static_cast<double>(j));
    j_pmf.push_back(w * w);
  }
  const double tv = total_variation(j_counts, j_pmf);
  const std::int64_t space = *checked_pow(lp.q, lp.n, kEnumerationBudget);
  std::vector<std::int64_t> s_counts(static_cast<std::size_t>(space), 0);
  for (const auto& [s, c] : s_seen) s_counts[static_cast<std::size_t>(s)] = c;
  const ChiSquareResult s_chi = chi_square_uniform(s_counts);
  rep.aggregates["uniform_inputs"] = {{"states", total},
                                      {"non_point_outputs", non_point},
                                      {"non_point_outputs_in_regime", non_point_in_regime},
                                      {"j_tv_vs_rho_squared", tv},
                                      {"s_uniform", chi_json(s_chi)}};
  checks.equals("uniform_inputs.non_point_outputs_in_regime", non_point_in_regime, 0);
  checks.at_most("uniform_inputs.j_tv", tv, th.reduction_tv_ceiling);
  checks.at_least("uniform_inputs.s_chi2_p", s_chi.p_value, th.chi2_p_floor);

  if (planted_runs > 0) {
    const WeightFn dist = WeightFn::gaussian(g);
    const std::vector<json> planted =
        run_trials(planted_runs, side_seed(cfg.seed, 2), [&](std::int64_t, Rng& rng, json& rec) {
          const LweInstance inst = gen_lwe(lp, rng);
          auto out = dlwe_to_dedcp(inst.public_view(), r, lp.kappa, opts, rng, initial);
          std::int64_t full = 0, bad = 0;
          for (const SparseState& st : *out.payload) {
            if (static_cast<std::int64_t>(st.size()) != 2 * g.cutoff + 1) continue;
            ++full;
            if (!verify_planted(st, inst.s0, dist)) ++bad;
          }
          rec["full"] = full;
          rec["verify_failures"] = bad;
        });
    std::int64_t full = 0, bad = 0;
    for (const json& rec : planted) {
      full += rec["full"].get<std::int64_t>();
      bad += rec["verify_failures"].get<std::int64_t>();
    }
    rep.aggregates["planted_inputs"] = {{"runs", planted_runs},
                                        {"full_window_rate", rate(full, planted_runs * ell)},
                                        {"verify_failures", bad}};
    checks.equals("planted_inputs.verify_failures", bad, 0);
  }
}

// ---------------------------------------------------------------------------
// roundtrip-cube, roundtrip-ball, dcp-chain

void roundtrip_cube(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
                    Checks& checks) {
  const LweParams lp = lwe_params(p, 64, 6, 1, 4);
  const double r = p.real("r", 1.0);
  CubeOptions opts;
  opts.c = static_cast<int>(p.integer("c", 8));
  opts.k = static_cast<int>(p.integer("k", 12));
  opts.enforce_theorem_bound = p.flag("enforce_bound", false);
  const GaussianParam g(r, lp.kappa);
  {
    Rng probe = side_rng(cfg.seed, 1);
    CubeReduction(uniform_public(lp, probe), g, opts);
  }
  p.finish(th);

  const WeightFn dist = WeightFn::gaussian(g);
  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    const LweInstance inst = gen_lwe(lp, rng);
    const CubeReduction red(inst.public_view(), g, opts);
    const auto out = red.attempt(rng);
    rec["success"] = out.success();
    rec["verified"] = out.success() && verify_planted(*out.payload, inst.s0, dist);
  });
  std::int64_t ok = 0, bad = 0;
  for (const json& rec : rep.trials) {
    if (!rec["success"].get<bool>()) continue;
    ++ok;
    if (!rec["verified"].get<bool>()) ++bad;
  }
  const double emp = rate(ok, cfg.trials);
  const double floor = std::pow(1.0 - 1.0 / opts.k, lp.m);
  const double lower = floor - th.sigma_slack * binomial_sigma(floor, cfg.trials);
  rep.aggregates["success_rate"] = emp;
  rep.aggregates["floor"] = floor;
  rep.aggregates["lower_limit"] = lower;
  rep.aggregates["theorem_bound"] = cube_width_bound(lp, opts.c, opts.k, lp.kappa);
  rep.aggregates["verify_failures"] = bad;
  checks.at_least("success_rate", emp, lower);
  checks.equals("verify_failures", bad, 0);
}

void roundtrip_ball(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
                    Checks& checks) {
  const LweParams lp = lwe_params(p, 4096, 10, 1, 4);
  const double r = p.real("r", 2.0);
  const int ell = static_cast<int>(p.integer("ell", 4));
  const std::int64_t lwe_samples = p.integer("lwe_samples", 64);
  const bool enforce = p.flag("enforce_bound", true);
  require(ell >= 1 && lwe_samples >= ell, "need lwe_samples >= ell >= 1");
  require(checked_pow(lp.q, lp.n, kEnumerationBudget).has_value(), "q^n exceeds the budget");
  const GaussianParam g(r, lp.kappa);
  const EdcpParams ep = gaussian_edcp(lp.n, lp.q, r, lp.kappa, 1);
  BallOptions opts;
  opts.ell = ell;
  opts.enforce_theorem_bound = enforce;
  const auto initial = shared_superposition(lp, g);
  {
    Rng probe = side_rng(cfg.seed, 1);
    BallReduction(gen_lwe(lp, probe).public_view(), g, opts, true, initial);
  }
  p.finish(th);

  const WeightFn dist = WeightFn::gaussian(g);
  const double width = edcp_to_lwe_error_width(ep);
  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    const LweInstance inst = gen_lwe(lp, rng);
    const BallReduction red(inst.public_view(), g, opts, true, initial);
    std::vector<LweSample> samples;
    std::int64_t attempts = 0, states = 0, bad = 0;
    const std::int64_t budget = 64 * lwe_samples;
    while (static_cast<std::int64_t>(samples.size()) < lwe_samples && attempts < budget) {
      auto out = red.attempt(rng);
      ++attempts;
      if (out.diagnostics.successes != 1) continue;
      ++states;
      if (!verify_planted(*out.payload, inst.s0, dist)) ++bad;
      try {
        samples.push_back(edcp_to_lwe_sample(*out.payload, ep, rng));
      } catch (const PreconditionError&) {
        // Tail event of the lift; the state is spent.
      }
    }
    bool recovered = false;
    if (static_cast<std::int64_t>(samples.size()) == lwe_samples) {
      const SolverVerdict v = solve_lwe_bruteforce(samples, lp.n, lp.q, width);
      recovered = v.unique && v.secret == inst.s0;
    }
    rec["recovered"] = recovered;
    rec["attempts"] = attempts;
    rec["edcp_states"] = states;
    rec["verify_failures"] = bad;
  });
  std::int64_t rec_ok = 0, attempts = 0, states = 0, bad = 0;
  for (const json& rec : rep.trials) {
    rec_ok += rec["recovered"].get<bool>() ? 1 : 0;
    attempts += rec["attempts"].get<std::int64_t>();
    states += rec["edcp_states"].get<std::int64_t>();
    bad += rec["verify_failures"].get<std::int64_t>();
  }
  const double success = rate(rec_ok, cfg.trials);
  rep.aggregates["recovery_rate"] = success;
  rep.aggregates["per_state_success_rate"] = rate(states, attempts);
  rep.aggregates["theorem_bound"] = ball_width_bound(lp, lp.kappa, ell, lp.n);
  rep.aggregates["error_width"] = width;
  rep.aggregates["verify_failures"] = bad;
  checks.at_least("recovery_rate", success, th.roundtrip_success_floor);
  checks.equals("verify_failures", bad, 0);
}

void dcp_chain(const RunConfig& cfg, Params& p, Thresholds& th, ExperimentReport& rep,
               Checks& checks) {
  const LweParams lp = lwe_params(p, 4096, 10, 1, 4);
  const double r = p.real("r", 2.0);
  const std::int64_t max_attempts = p.integer("max_attempts", 64);
  require(lp.n == 1, "the DCP chain needs n = 1");
  require(max_attempts >= 1, "max_attempts must be >= 1");
  const GaussianParam g(r, lp.kappa);
  require(lp.q > 2 * g.cutoff, "q must exceed twice the cutoff");
  BallOptions opts;
  const auto initial = shared_superposition(lp, g);
  {
    Rng probe = side_rng(cfg.seed, 1);
    BallReduction(gen_lwe(lp, probe).public_view(), g, opts, true, initial);
  }
  p.finish(th);

  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    const LweInstance inst = gen_lwe(lp, rng);
    const BallReduction red(inst.public_view(), g, opts, true, initial);
    bool found = false, recovered = false;
    std::int64_t attempts = 0;
    json candidates = json::array();
    while (!found && attempts < max_attempts) {
      ++attempts;
      auto edcp = red.attempt(rng);
      if (edcp.diagnostics.successes != 1) continue;
      auto dcp = gedcp_to_dcp(*edcp.payload, lp.q, r, rng);
      if (!dcp.payload) continue;
      found = true;
      const SolverVerdict v = solve_dcp_whitebox({dcp.payload->state}, lp.q);
      if (!v.secret) break;
      for (std::int64_t s : halve_candidates((*v.secret)[0], lp.q)) {
        candidates.push_back(s);
        recovered = recovered || s == inst.s0[0];
      }
    }
    rec["dcp_found"] = found;
    rec["recovered"] = recovered;
    rec["attempts"] = attempts;
    rec["candidates"] = std::move(candidates);
  });
  std::int64_t ok = 0;
  for (const json& rec : rep.trials) ok += rec["recovered"].get<bool>() ? 1 : 0;
  const double success = rate(ok, cfg.trials);
  rep.aggregates["recovery_rate"] = success;
  rep.aggregates["wide_branch"] = dcp_wide_branch(lp.q, r);
  checks.at_least("recovery_rate", success, th.roundtrip_success_floor);
}

// ---------------------------------------------------------------------------
// variant-conversions

struct ConversionTally {
  std::int64_t accepted = 0;
  std::int64_t verify_failures = 0;
};

void variant_conversions(const RunConfig& cfg, Params& p, Thresholds& th,
                         ExperimentReport& rep, Checks& checks) {
  const std::int64_t gu_N = p.integer("gu_N", 97);
  const double gu_r = p.real("gu_r", 4.0);
  const double gu_c = p.real("gu_c", 1.0);
  const int gu_kappa = static_cast<int>(p.integer("gu_kappa", 64));
  const std::int64_t ug_N = p.integer("ug_N", 97);
  const std::int64_t ug_M = p.integer("ug_M", 8);
  const int ug_kappa = static_cast<int>(p.integer("ug_kappa", 4));
  const std::int64_t sr_N = p.integer("sr_N", 97);
  const double sr_r1 = p.real("sr_r1", 4.0);
  const double sr_r2 = p.real("sr_r2", 3.0);
  const int sr_kappa = static_cast<int>(p.integer("sr_kappa", 4));
  const std::int64_t su_M1 = p.integer("su_M1", 8);
  const std::int64_t su_M2 = p.integer("su_M2", 4);
  const std::int64_t narrow_N = p.integer("narrow_N", 15);
  const double narrow_r = p.real("narrow_r", 2.0);
  const int narrow_kappa = static_cast<int>(p.integer("narrow_kappa", 9));
  const std::int64_t wide_N = p.integer("wide_N", 1009);
  const double wide_r = p.real("wide_r", 30.0);
  const int wide_kappa = static_cast<int>(p.integer("wide_kappa", 4));
  DcpOptions dcp_opts;
  dcp_opts.wide_c = p.real("wide_c", 0.25);
  const std::int64_t chain_N = p.integer("chain_N", 257);
  const double chain_r = p.real("chain_r", 8.0);
  const double chain_c = p.real("chain_c", 0.5);
  const int chain_kappa = static_cast<int>(p.integer("chain_kappa", 64));
  const int chain_kappa_out = static_cast<int>(p.integer("chain_kappa_out", 4));

  auto edcp = [](std::int64_t N, const WeightFn& dist) {
    EdcpParams ep;
    ep.n = 1;
    ep.N = N;
    ep.dist = dist;
    ep.ell = 1;
    ep.validate();
    require(N > 2 * std::max(-dist.support_lo(), dist.support_hi()), "N too small for the window");
    return ep;
  };
  auto integral = [](double x, const char* what) {
    require(x >= 1 && std::abs(x - std::round(x)) < 1e-9, std::string(what) + " must be a positive integer");
    return static_cast<std::int64_t>(std::llround(x));
  };
  const GaussianParam gu_g(gu_r, gu_kappa);
  const std::int64_t gu_M = integral(gu_c * gu_r, "gu_c * gu_r");
  require(gu_M - 1 <= gu_g.cutoff, "gu_M - 1 exceeds the window");
  const EdcpParams gu_ep = edcp(gu_N, WeightFn::gaussian(gu_g));
  const EdcpParams ug_ep = edcp(ug_N, WeightFn::uniform(ug_M));
  const GaussianParam ug_g(static_cast<double>(ug_M) / std::sqrt(double(ug_kappa)), ug_kappa);
  require(ug_N > 2 * ug_g.cutoff, "ug_N too small for the output window");
  require(sr_r2 < sr_r1, "need sr_r2 < sr_r1");
  require(su_M2 < su_M1 && su_M2 >= 1, "need 1 <= su_M2 < su_M1");
  const GaussianParam sr_g1(sr_r1, sr_kappa), sr_g2(sr_r2, sr_kappa);
  const EdcpParams sr_ep = edcp(sr_N, WeightFn::gaussian(sr_g1));
  const EdcpParams su_ep = edcp(sr_N, WeightFn::uniform(su_M1));
  const GaussianParam narrow_g(narrow_r, narrow_kappa), wide_g(wide_r, wide_kappa);
  require(!dcp_wide_branch(narrow_N, narrow_r), "narrow parameters fall on the wide branch");
  require(dcp_wide_branch(wide_N, wide_r), "wide parameters fall on the narrow branch");
  const EdcpParams narrow_ep = edcp(narrow_N, WeightFn::gaussian(narrow_g));
  const EdcpParams wide_ep = edcp(wide_N, WeightFn::gaussian(wide_g));
  require(2 * static_cast<std::int64_t>(std::floor(dcp_opts.wide_c * wide_r)) <= wide_g.cutoff,
          "wide_c * wide_r exceeds the window");
  const GaussianParam chain_g(chain_r, chain_kappa);
  const std::int64_t chain_M = integral(chain_c * chain_r, "chain_c * chain_r");
  require(chain_M - 1 <= chain_g.cutoff, "chain M - 1 exceeds the window");
  const GaussianParam chain_out(static_cast<double>(chain_M) / std::sqrt(double(chain_kappa_out)),
                                chain_kappa_out);
  const EdcpParams chain_ep = edcp(chain_N, WeightFn::gaussian(chain_g));
  require(chain_N > 2 * chain_out.cutoff, "chain_N too small for the output window");
  p.finish(th);

  rep.trials = run_trials(cfg.trials, cfg.seed, [&](std::int64_t, Rng& rng, json& rec) {
    {
      const EdcpInstance in = gen_edcp(gu_ep, rng);
      auto out = g_to_u(in.states[0], gu_r, gu_c, rng);
      rec["g_to_u"] = {{"accepted", out.success()},
                       {"verified", out.success() &&
                                        verify_edcp_state(*out.payload, in.s, in.offsets[0],
                                                          WeightFn::uniform(gu_M))}};
    }
    {
      const EdcpInstance in = gen_edcp(ug_ep, rng);
      auto out = u_to_g(in.states[0], ug_M, ug_kappa, rng);
      bool ok = false;
      if (out.success()) {
        const std::int64_t h = (ug_M - 1) / 2;
        const Residues shifted{mod(in.offsets[0][0] + h * in.s[0], ug_N)};
        auto st = edcp_support_structure(*out.payload);
        const SparseState ideal = ideal_edcp_state(out.payload->layout(), in.s, shifted,
                                                   WeightFn::gaussian(ug_g));
        ok = st && st->step == in.s &&
             l2_distance(*out.payload, ideal) <= tail_bound(ug_g);
      }
      rec["u_to_g"] = {{"accepted", out.success()}, {"verified", ok}};
    }
    {
      const EdcpInstance in = gen_edcp(sr_ep, rng);
      auto out = edcp_self_reduce(in.states[0], WeightFn::gaussian(sr_g1),
                                  WeightFn::gaussian(sr_g2), rng);
      rec["self_gaussian"] = {
          {"accepted", out.success()},
          {"verified", out.success() && verify_edcp_state(*out.payload, in.s, in.offsets[0],
                                                          WeightFn::gaussian(sr_g2))}};
    }
    {
      const EdcpInstance in = gen_edcp(su_ep, rng);
      auto out = edcp_self_reduce(in.states[0], WeightFn::uniform(su_M1),
                                  WeightFn::uniform(su_M2), rng);
      rec["self_uniform"] = {
          {"accepted", out.success()},
          {"verified", out.success() && verify_edcp_state(*out.payload, in.s, in.offsets[0],
                                                          WeightFn::uniform(su_M2))}};
    }
    for (const auto& [name, ep, r] :
         {std::tuple{"dcp_narrow", narrow_ep, narrow_r}, std::tuple{"dcp_wide", wide_ep, wide_r}}) {
      const EdcpInstance in = gen_edcp(ep, rng);
      auto out = gedcp_to_dcp(in.states[0], ep.N, r, rng, dcp_opts);
      bool ok = false;
      if (out.success()) {
        const SolverVerdict v = solve_dcp_whitebox({out.payload->state}, ep.N);
        ok = v.secret && (*v.secret)[0] == mod(2 * in.s[0], ep.N);
      }
      rec[name] = {{"accepted", out.success()},
                   {"v", out.diagnostics.measured.empty() ? json(nullptr)
                                                          : json(out.diagnostics.measured[0])},
                   {"verified", ok}};
    }
    {
      const EdcpInstance in = gen_edcp(chain_ep, rng);
      auto mid = g_to_u(in.states[0], chain_r, chain_c, rng);
      bool accepted = false, preserved = false;
      if (mid.success()) {
        auto out = u_to_g(*mid.payload, chain_M, chain_kappa_out, rng);
        if (out.success()) {
          accepted = true;
          auto st = edcp_support_structure(*out.payload);
          preserved = st && st->step == in.s;
        }
      }
      rec["chain"] = {{"accepted", accepted}, {"secret_preserved", preserved}};
    }
  });

  auto tally = [&](const char* key) {
    ConversionTally t;
    for (const json& rec : rep.trials) {
      if (!rec[key]["accepted"].get<bool>()) continue;
      ++t.accepted;
      if (!rec[key]["verified"].get<bool>()) ++t.verify_failures;
    }
    return t;
  };
  auto rate_check = [&](const char* key, double analytic) {
    const ConversionTally t = tally(key);
    const double emp = rate(t.accepted, cfg.trials);
    const double z = std::abs(emp - analytic) / binomial_sigma(analytic, cfg.trials);
    rep.aggregates[key] = {{"accepted", t.accepted},
                           {"accept_rate", emp},
                           {"analytic_accept_probability", analytic},
                           {"z", z},
                           {"verify_failures", t.verify_failures}};
    checks.at_most(std::string(key) + ".z", z, th.sigma_slack);
    checks.equals(std::string(key) + ".verify_failures", t.verify_failures, 0);
  };

  // Acceptance probabilities written out from the weights themselves.
  rate_check("g_to_u", static_cast<double>(gu_M) * std::pow(rho(gu_r, double(gu_M - 1)), 2) /
                           sum_rho_sq(gu_r, -gu_g.cutoff, gu_g.cutoff));
  {
    const std::int64_t h = (ug_M - 1) / 2;
    rate_check("u_to_g", sum_rho_sq(ug_g.r, -h, ug_M - 1 - h) / static_cast<double>(ug_M));
  }
  rate_check("self_gaussian", sum_rho_sq(sr_r2, -sr_g2.cutoff, sr_g2.cutoff) /
                                  sum_rho_sq(sr_r1, -sr_g1.cutoff, sr_g1.cutoff));
  rate_check("self_uniform", static_cast<double>(su_M2) / static_cast<double>(su_M1));
  rate_check("dcp_narrow", 2 * std::pow(rho(narrow_r, 1.0), 2) /
                               sum_rho_sq(narrow_r, -narrow_g.cutoff, narrow_g.cutoff));
  {
    const double bound = 2 * std::exp(-2 * std::numbers::pi / (narrow_r * narrow_r)) /
                         (narrow_r / std::sqrt(2.0) + 1);
    const double emp = rep.aggregates["dcp_narrow"]["accept_rate"].get<double>();
    const double lower = bound - th.sigma_slack * binomial_sigma(bound, cfg.trials);
    rep.aggregates["dcp_narrow"]["v_equals_one_bound"] = bound;
    checks.at_least("dcp_narrow.v_equals_one_rate", emp, lower);
  }
  {
    const ConversionTally t = tally("dcp_wide");
    rep.aggregates["dcp_wide"] = {{"accepted", t.accepted},
                                  {"accept_rate", rate(t.accepted, cfg.trials)},
                                  {"verify_failures", t.verify_failures}};
    checks.equals("dcp_wide.verify_failures", t.verify_failures, 0);
  }
  {
    std::int64_t accepted = 0, preserved = 0;
    for (const json& rec : rep.trials) {
      if (!rec["chain"]["accepted"].get<bool>()) continue;
      ++accepted;
      preserved += rec["chain"]["secret_preserved"].get<bool>() ? 1 : 0;
    }
    rep.aggregates["chain"] = {{"accepted", accepted}, {"secret_preserved", preserved}};
    checks.equals("chain.secret_lost", accepted - preserved, 0);
    checks.at_least("chain.accepted", static_cast<double>(accepted), 1);
  }
}

// ---------------------------------------------------------------------------
// Serialization helpers

std::string csv_cell(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void flatten_scalars(const json& j, const std::string& prefix,
                     std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      flatten_scalars(v, prefix.empty() ? k : prefix + "." + k, out);
    }
  } else if (!j.is_array()) {
    out.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

}  // namespace

std::string_view experiment_name(Experiment e) {
  for (const auto& [ex, name] : kExperimentNames) {
    if (ex == e) return name;
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (const auto& [ex, n] : kExperimentNames) {
    if (n == name) return ex;
  }
  return std::nullopt;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& entry : kExperimentNames) out.emplace_back(entry.second);
  return out;
}

void Thresholds::set(const std::string& name, double value) {
  std::map<std::string, double*> slots = {
      {"chi2_p_floor", &chi2_p_floor},
      {"sampler_tv_ceiling", &sampler_tv_ceiling},
      {"reduction_tv_ceiling", &reduction_tv_ceiling},
      {"sigma_slack", &sigma_slack},
      {"poisson_rel_tol", &poisson_rel_tol},
      {"roundtrip_success_floor", &roundtrip_success_floor},
      {"ball_ratio_floor", &ball_ratio_floor},
      {"ball_constant_stability", &ball_constant_stability},
      {"distinguisher_advantage_floor", &distinguisher_advantage_floor},
  };
  auto it = slots.find(name);
  if (it == slots.end()) throw ParameterError("unknown threshold: " + name);
  if (!std::isfinite(value)) throw ParameterError("threshold must be finite: " + name);
  *it->second = value;
}

nlohmann::ordered_json Thresholds::to_json() const {
  return {{"chi2_p_floor", chi2_p_floor},
          {"sampler_tv_ceiling", sampler_tv_ceiling},
          {"reduction_tv_ceiling", reduction_tv_ceiling},
          {"sigma_slack", sigma_slack},
          {"poisson_rel_tol", poisson_rel_tol},
          {"roundtrip_success_floor", roundtrip_success_floor},
          {"ball_ratio_floor", ball_ratio_floor},
          {"ball_constant_stability", ball_constant_stability},
          {"distinguisher_advantage_floor", distinguisher_advantage_floor}};
}

int worker_count() {
  if (const char* env = std::getenv("DIHEDRAL_BRIDGE_THREADS")) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), v);
    if (ec == std::errc() && *ptr == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentReport run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.trials < 1) throw ParameterError("trials must be >= 1");
  if (config.out_format != "json" && config.out_format != "csv") {
    throw ParameterError("output format must be json or csv");
  }
  Params params(config.params);
  Thresholds th;
  Checks checks;
  ExperimentReport rep;
  rep.aggregates = json::object();
  switch (config.experiment) {
    case Experiment::kMathChecks:
      math_checks(config, params, th, rep, checks);
      break;
    case Experiment::kGridClaims:
      grid_claims(config, params, th, rep, checks);
      break;
    case Experiment::kBallClaims:
      ball_claims(config, params, th, rep, checks);
      break;
    case Experiment::kEdcp2LweStats:
      edcp2lwe_stats(config, params, th, rep, checks);
      break;
    case Experiment::kDecisionalE2L:
      decisional_e2l(config, params, th, rep, checks);
      break;
    case Experiment::kDecisionalL2E:
      decisional_l2e(config, params, th, rep, checks);
      break;
    case Experiment::kRoundtripCube:
      roundtrip_cube(config, params, th, rep, checks);
      break;
    case Experiment::kRoundtripBall:
      roundtrip_ball(config, params, th, rep, checks);
      break;
    case Experiment::kDcpChain:
      dcp_chain(config, params, th, rep, checks);
      break;
    case Experiment::kVariantConversions:
      variant_conversions(config, params, th, rep, checks);
      break;
  }
  rep.config = {{"experiment", experiment_name(config.experiment)},
                {"seed", config.seed},
                {"trials", config.trials},
                {"out_format", config.out_format},
                {"params", params.echo()},
                {"thresholds", th.to_json()}};
  rep.aggregates["checks"] = checks.to_json();
  rep.pass = checks.pass();
  rep.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return rep;
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
  json trials = json::array();
  for (const json& t : report.trials) trials.push_back(t);
  return {{"config", report.config},
          {"trials", std::move(trials)},
          {"aggregates", report.aggregates},
          {"pass", report.pass},
          {"wall_time_ms", report.wall_time_ms}};
}

ExperimentReport report_from_json(const nlohmann::ordered_json& j) {
  ExperimentReport rep;
  rep.config = j.at("config");
  for (const json& t : j.at("trials")) rep.trials.push_back(t);
  rep.aggregates = j.at("aggregates");
  rep.pass = j.at("pass").get<bool>();
  rep.wall_time_ms = j.at("wall_time_ms").get<double>();
  return rep;
}

std::string to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  std::vector<std::string> columns;
  if (!report.trials.empty()) {
    for (const auto& [k, v] : report.trials.front().items()) columns.push_back(k);
  }
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << csv_cell(columns[i]);
  out << "\n";
  for (const json& t : report.trials) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << (i ? "," : "") << (t.contains(columns[i]) ? csv_cell(t[columns[i]]) : "");
    }
    out << "\n";
  }
  std::vector<std::pair<std::string, std::string>> flat;
  flatten_scalars(report.aggregates, "", flat);
  std::string summary = "pass=" + std::string(report.pass ? "true" : "false");
  for (const auto& [k, v] : flat) summary += ";" + k + "=" + v;
  out << "summary," << csv_cell(json(summary)) << "\n";
  return out.str();
}

void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path) {
  std::string text;
  if (format == "json") {
    text = to_json(report).dump(2) + "\n";
  } else if (format == "csv") {
    text = to_csv(report);
  } else {
    throw ParameterError("output format must be json or csv");
  }
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace dihedral
