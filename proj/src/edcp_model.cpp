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

#include "dihedral/edcp_model.hpp"

#include <algorithm>
#include <cmath>

#include "dihedral/errors.hpp"

namespace dihedral {

void LweParams::validate() const {
  if (q < 2) throw ParameterError("LWE modulus must be >= 2");
  if (n < 1 || m < n) throw ParameterError("LWE needs m >= n >= 1");
  if (!(alpha > 0) || !(alpha < 1)) throw ParameterError("alpha must lie in (0, 1)");
  if (kappa < 1) throw ParameterError("kappa must be >= 1");
}

LweSample LwePublic::sample(int i) const {
  LweSample s;
  s.a.resize(static_cast<std::size_t>(A.cols()));
  for (int j = 0; j < A.cols(); ++j) s.a[j] = A(i, j);
  s.b = b[static_cast<std::size_t>(i)];
  return s;
}

void EdcpParams::validate() const {
  if (N < 2) throw ParameterError("EDCP modulus must be >= 2");
  if (n < 1) throw ParameterError("EDCP dimension must be >= 1");
  if (ell < 1) throw ParameterError("state count must be >= 1");
}

LweInstance gen_lwe(const LweParams& params, Rng& rng) {
  params.validate();
  LweInstance inst;
  inst.params = params;
  inst.A = ResidueMatrix(params.m, params.n, params.q);
  for (int i = 0; i < params.m; ++i) {
    for (int j = 0; j < params.n; ++j) inst.A.set(i, j, uniform_int(rng, 0, params.q - 1));
  }
  inst.s0.resize(static_cast<std::size_t>(params.n));
  for (auto& v : inst.s0) v = uniform_int(rng, 0, params.q - 1);
  const DiscreteGaussianSampler noise(GaussianParam(params.noise_width(), params.kappa));
  inst.e0.resize(static_cast<std::size_t>(params.m));
  for (auto& e : inst.e0) e = noise(rng);
  const Residues as = inst.A.apply(inst.s0);
  inst.b.resize(static_cast<std::size_t>(params.m));
  for (std::size_t i = 0; i < inst.b.size(); ++i) inst.b[i] = mod(as[i] + inst.e0[i], params.q);
  return inst;
}

RegisterLayout edcp_layout(const EdcpParams& params) {
  const std::int64_t bound =
      std::max(-params.dist.support_lo(), params.dist.support_hi());
  return RegisterLayout({IntRegister{bound}, ModRegister{params.N, params.n}});
}

EdcpInstance gen_edcp(const EdcpParams& params, Rng& rng) {
  params.validate();
  if (params.dist.kind() == WeightFn::Kind::kGaussian &&
      params.N <= 2 * params.dist.gaussian_param().cutoff) {
    throw ParameterError("N must exceed twice the Gaussian cutoff");
  }
  EdcpInstance inst;
  inst.params = params;
  inst.s.resize(static_cast<std::size_t>(params.n));
  for (auto& v : inst.s) v = uniform_int(rng, 0, params.N - 1);
  const RegisterLayout layout = edcp_layout(params);
  const SparseState base = prepare_weighted(layout, params.dist);
  for (int k = 0; k < params.ell; ++k) {
    Residues x(static_cast<std::size_t>(params.n));
    for (auto& v : x) v = uniform_int(rng, 0, params.N - 1);
    const Residues s = inst.s;
    auto write = [x, s](LabelView j) {
      Label out(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + j[0] * s[i];
      return out;
    };
    inst.states.push_back(apply_classical(base, write, {0}, 1, ClassicalMode::kWrite));
    inst.offsets.push_back(std::move(x));
  }
  return inst;
}

std::vector<SparseState> gen_decisional_null(const EdcpParams& params, Rng& rng) {
  params.validate();
  const RegisterLayout layout = edcp_layout(params);
  const TableSampler j_law(params.dist.support_lo(), params.dist.squared_pmf());
  std::vector<SparseState> out;
  Label label(static_cast<std::size_t>(layout.width()));
  for (int k = 0; k < params.ell; ++k) {
    label[0] = j_law(rng);
    for (int i = 0; i < params.n; ++i) label[1 + i] = uniform_int(rng, 0, params.N - 1);
    out.push_back(prepare_basis(layout, label));
  }
  return out;
}

SparseState ideal_edcp_state(const RegisterLayout& layout, const Residues& s,
                             const Residues& x, const WeightFn& dist) {
  if (layout.size() != 2 || !layout.is_int(0) || layout.is_int(1)) {
    throw ParameterError("EDCP layout must be [IntRegister, ModRegister]");
  }
  const std::int64_t N = layout.modulus(1);
  const auto n = static_cast<std::size_t>(layout.arity(1));
  if (s.size() != n || x.size() != n) throw ParameterError("secret arity mismatch");
  std::vector<std::int64_t> labels;
  std::vector<Amplitude> amps;
  for (std::int64_t j = dist.support_lo(); j <= dist.support_hi(); ++j) {
    const double w = dist(j);
    if (w == 0) continue;
    labels.push_back(j);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(mod(x[i] + j * s[i], N));
    amps.emplace_back(w);
  }
  return SparseState::from_entries(layout, std::move(labels), std::move(amps));
}

bool verify_edcp_state(const SparseState& state, const Residues& s,
                       const Residues& x, const WeightFn& dist) {
  const RegisterLayout& layout = state.layout();
  if (layout.size() != 2 || !layout.is_int(0) || layout.is_int(1)) return false;
  if (s.size() != static_cast<std::size_t>(layout.arity(1)) || x.size() != s.size()) {
    return false;
  }
  const std::int64_t bound = std::get<IntRegister>(layout[0]).bound;
  if (dist.support_lo() < -bound || dist.support_hi() > bound) return false;
  return l2_distance(state, ideal_edcp_state(layout, s, x, dist)) <= kVerifyTolerance;
}

std::optional<SupportStructure> edcp_support_structure(const SparseState& state) {
  const RegisterLayout& layout = state.layout();
  if (layout.size() != 2 || !layout.is_int(0) || layout.is_int(1)) return std::nullopt;
  const std::int64_t N = layout.modulus(1);
  const auto n = static_cast<std::size_t>(layout.arity(1));
  // Labels are sorted by j first, so consecutive entries must step j by one.
  SupportStructure out;
  out.j_lo = state.label(0)[0];
  out.j_hi = state.label(state.size() - 1)[0];
  if (out.j_hi - out.j_lo + 1 != static_cast<std::int64_t>(state.size())) return std::nullopt;
  out.step.assign(n, 0);
  if (state.size() > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      out.step[i] = mod(state.label(1)[1 + i] - state.label(0)[1 + i], N);
    }
  }
  for (std::size_t k = 1; k < state.size(); ++k) {
    if (state.label(k)[0] != out.j_lo + static_cast<std::int64_t>(k)) return std::nullopt;
    for (std::size_t i = 0; i < n; ++i) {
      if (mod(state.label(k)[1 + i] - state.label(k - 1)[1 + i], N) != out.step[i]) {
        return std::nullopt;
      }
    }
  }
  out.offset.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.offset[i] = mod(state.label(0)[1 + i] - out.j_lo * out.step[i], N);
  }
  return out;
}

nlohmann::ordered_json to_json(const LweInstance& inst) {
  nlohmann::ordered_json j;
  j["n"] = inst.params.n;
  j["q"] = inst.params.q;
  j["alpha"] = inst.params.alpha;
  j["m"] = inst.params.m;
  j["kappa"] = inst.params.kappa;
  j["A"] = inst.A.data();
  j["b"] = inst.b;
  j["s0"] = inst.s0;
  j["e0"] = inst.e0;
  return j;
}

LweInstance lwe_instance_from_json(const nlohmann::ordered_json& j) {
  LweInstance inst;
  inst.params.n = j.at("n").get<int>();
  inst.params.q = j.at("q").get<std::int64_t>();
  inst.params.alpha = j.at("alpha").get<double>();
  inst.params.m = j.at("m").get<int>();
  inst.params.kappa = j.at("kappa").get<int>();
  inst.params.validate();
  inst.A = ResidueMatrix(inst.params.m, inst.params.n, inst.params.q);
  const auto data = j.at("A").get<std::vector<std::int64_t>>();
  if (data.size() != static_cast<std::size_t>(inst.params.m * inst.params.n)) {
    throw ParameterError("matrix size does not match m x n");
  }
  for (int r = 0; r < inst.params.m; ++r) {
    for (int c = 0; c < inst.params.n; ++c) inst.A.set(r, c, data[r * inst.params.n + c]);
  }
  inst.b = j.at("b").get<Residues>();
  inst.s0 = j.at("s0").get<Residues>();
  inst.e0 = j.at("e0").get<std::vector<std::int64_t>>();
  return inst;
}

nlohmann::ordered_json to_json(const EdcpParams& params) {
  nlohmann::ordered_json j;
  j["n"] = params.n;
  j["N"] = params.N;
  switch (params.dist.kind()) {
    case WeightFn::Kind::kGaussian:
      j["dist"] = {{"kind", "gaussian"},
                   {"r", params.dist.gaussian_param().r},
                   {"kappa", params.dist.gaussian_param().kappa}};
      break;
    case WeightFn::Kind::kUniform:
      j["dist"] = {{"kind", "uniform"}, {"M", params.dist.uniform_size()}};
      break;
    case WeightFn::Kind::kIndicator01:
      j["dist"] = {{"kind", "indicator01"}};
      break;
  }
  j["ell"] = params.ell;
  return j;
}

EdcpParams edcp_params_from_json(const nlohmann::ordered_json& j) {
  EdcpParams p;
  p.n = j.at("n").get<int>();
  p.N = j.at("N").get<std::int64_t>();
  const auto& d = j.at("dist");
  const auto kind = d.at("kind").get<std::string>();
  if (kind == "gaussian") {
    p.dist = WeightFn::gaussian(
        GaussianParam(d.at("r").get<double>(), d.at("kappa").get<int>()));
  } else if (kind == "uniform") {
    p.dist = WeightFn::uniform(d.at("M").get<std::int64_t>());
  } else if (kind == "indicator01") {
    p.dist = WeightFn::indicator01();
  } else {
    throw ParameterError("unknown weight kind: " + kind);
  }
  p.ell = j.at("ell").get<int>();
  p.validate();
  return p;
}

}  // namespace dihedral
