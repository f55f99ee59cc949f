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

#include "dihedral/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>

#include "dihedral/errors.hpp"
#include "dihedral/modular.hpp"

namespace dihedral {

namespace {

bool label_less(LabelView a, LabelView b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool label_equal(LabelView a, LabelView b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

// Collects entries for a new state.
struct Builder {
  explicit Builder(const RegisterLayout& l) : layout(l) {}

  void add(LabelView label, Amplitude a) {
    labels.insert(labels.end(), label.begin(), label.end());
    amps.push_back(a);
  }

  SparseState build() && {
    return SparseState::from_entries(layout, std::move(labels), std::move(amps));
  }

  RegisterLayout layout;
  std::vector<std::int64_t> labels;
  std::vector<Amplitude> amps;
};

}  // namespace

RegisterLayout::RegisterLayout(std::vector<Register> registers)
    : registers_(std::move(registers)) {
  int ints = 0;
  for (const Register& r : registers_) {
    offsets_.push_back(width_);
    if (const auto* ir = std::get_if<IntRegister>(&r)) {
      if (ir->bound < 0) throw ParameterError("IntRegister bound must be >= 0");
      ++ints;
      width_ += 1;
    } else {
      const auto& mr = std::get<ModRegister>(r);
      if (mr.modulus < 2) throw ParameterError("register modulus must be >= 2");
      if (mr.arity < 1) throw ParameterError("register arity must be >= 1");
      width_ += mr.arity;
    }
  }
  if (ints > 1) throw ParameterError("at most one IntRegister per layout");
}

int RegisterLayout::arity(std::size_t reg) const {
  if (const auto* mr = std::get_if<ModRegister>(&registers_.at(reg))) return mr->arity;
  return 1;
}

bool RegisterLayout::is_int(std::size_t reg) const {
  return std::holds_alternative<IntRegister>(registers_.at(reg));
}

std::int64_t RegisterLayout::modulus(std::size_t reg) const {
  const auto* mr = std::get_if<ModRegister>(&registers_.at(reg));
  if (!mr) throw ParameterError("register is not a ModRegister");
  return mr->modulus;
}

bool RegisterLayout::contains(LabelView label) const {
  if (static_cast<int>(label.size()) != width_) return false;
  for (std::size_t r = 0; r < registers_.size(); ++r) {
    const int off = offsets_[r];
    if (const auto* ir = std::get_if<IntRegister>(&registers_[r])) {
      if (label[off] < -ir->bound || label[off] > ir->bound) return false;
    } else {
      const auto& mr = std::get<ModRegister>(registers_[r]);
      for (int k = 0; k < mr.arity; ++k) {
        if (label[off + k] < 0 || label[off + k] >= mr.modulus) return false;
      }
    }
  }
  return true;
}

SparseState SparseState::from_entries(RegisterLayout layout,
                                      std::vector<std::int64_t> flat_labels,
                                      std::vector<Amplitude> amplitudes) {
  const auto w = static_cast<std::size_t>(layout.width());
  const std::size_t n = amplitudes.size();
  if (flat_labels.size() != n * w) throw ParameterError("label buffer size mismatch");
  auto view = [&](std::size_t i) { return LabelView(flat_labels.data() + i * w, w); };
  for (std::size_t i = 0; i < n; ++i) {
    if (!layout.contains(view(i))) throw ParameterError("label outside register range");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return label_less(view(a), view(b)); });

  std::vector<std::int64_t> labels;
  std::vector<Amplitude> amps;
  labels.reserve(flat_labels.size());
  amps.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    if (!amps.empty() &&
        label_equal(view(i), LabelView(labels.data() + labels.size() - w, w))) {
      amps.back() += amplitudes[i];
    } else {
      labels.insert(labels.end(), view(i).begin(), view(i).end());
      amps.push_back(amplitudes[i]);
    }
  }
  double total = 0;
  for (const Amplitude& a : amps) total += std::norm(a);
  if (!(total > 0)) throw PreconditionError("state has no amplitude mass");

  const double cut = kPruneThreshold * std::sqrt(total);
  std::size_t kept = 0;
  double kept_mass = 0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (std::abs(amps[i]) < cut) continue;
    if (kept != i) {
      std::copy_n(labels.begin() + static_cast<std::ptrdiff_t>(i * w), w,
                  labels.begin() + static_cast<std::ptrdiff_t>(kept * w));
      amps[kept] = amps[i];
    }
    kept_mass += std::norm(amps[kept]);
    ++kept;
  }
  labels.resize(kept * w);
  amps.resize(kept);
  const double scale = 1.0 / std::sqrt(kept_mass);
  for (Amplitude& a : amps) a *= scale;
  return SparseState(std::move(layout), std::move(labels), std::move(amps), total);
}

Amplitude SparseState::amplitude_of(LabelView label) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (label_less(this->label(mid), label)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size() && label_equal(this->label(lo), label)) return amplitudes_[lo];
  return 0.0;
}

Label SparseState::register_value(std::size_t i, std::size_t reg) const {
  LabelView l = label(i);
  const int off = layout_.offset(reg);
  return Label(l.begin() + off, l.begin() + off + layout_.arity(reg));
}

SparseState prepare_basis(const RegisterLayout& layout, LabelView label) {
  Builder b(layout);
  b.add(label, 1.0);
  return std::move(b).build();
}

SparseState prepare_weighted(const RegisterLayout& layout, const WeightFn& weight) {
  if (layout.size() == 0 || !layout.is_int(0)) {
    throw ParameterError("register 0 must be an IntRegister");
  }
  const std::int64_t bound = std::get<IntRegister>(layout[0]).bound;
  if (weight.support_lo() < -bound || weight.support_hi() > bound) {
    throw ParameterError("weight window exceeds the IntRegister bound");
  }
  Builder b(layout);
  Label label(static_cast<std::size_t>(layout.width()), 0);
  for (std::int64_t j = weight.support_lo(); j <= weight.support_hi(); ++j) {
    const double w = weight(j);
    if (w == 0) continue;
    label[0] = j;
    b.add(label, w);
  }
  if (b.amps.empty()) throw ParameterError("weight has empty support");
  return std::move(b).build();
}

SparseState qft_mod(const SparseState& state, std::size_t reg, Direction dir) {
  const RegisterLayout& layout = state.layout();
  if (reg >= layout.size() || layout.is_int(reg)) {
    throw ParameterError("QFT target must be a ModRegister");
  }
  const std::int64_t N = layout.modulus(reg);
  const double sign = dir == Direction::kForward ? 1.0 : -1.0;
  std::vector<Amplitude> twiddle(static_cast<std::size_t>(N));
  for (std::int64_t t = 0; t < N; ++t) {
    const double angle = sign * 2 * std::numbers::pi * static_cast<double>(t) /
                         static_cast<double>(N);
    twiddle[static_cast<std::size_t>(t)] = {std::cos(angle), std::sin(angle)};
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  const auto w = static_cast<std::size_t>(layout.width());

  SparseState cur = state;
  for (int k = 0; k < layout.arity(reg); ++k) {
    const std::size_t slot = static_cast<std::size_t>(layout.offset(reg) + k);
    // Group support points that agree outside `slot`.
    std::vector<std::size_t> order(cur.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less_outside = [&](std::size_t a, std::size_t b) {
      LabelView la = cur.label(a), lb = cur.label(b);
      for (std::size_t s = 0; s < w; ++s) {
        if (s == slot) continue;
        if (la[s] != lb[s]) return la[s] < lb[s];
      }
      return la[slot] < lb[slot];
    };
    std::sort(order.begin(), order.end(), less_outside);
    auto same_group = [&](std::size_t a, std::size_t b) {
      LabelView la = cur.label(a), lb = cur.label(b);
      for (std::size_t s = 0; s < w; ++s) {
        if (s != slot && la[s] != lb[s]) return false;
      }
      return true;
    };

    Builder out(layout);
    std::vector<Amplitude> acc(static_cast<std::size_t>(N));
    std::size_t g = 0;
    while (g < order.size()) {
      std::size_t e = g + 1;
      while (e < order.size() && same_group(order[g], order[e])) ++e;
      std::fill(acc.begin(), acc.end(), Amplitude(0.0));
      for (std::size_t i = g; i < e; ++i) {
        const std::int64_t x = cur.label(order[i])[slot];
        const Amplitude a = cur.amplitude(order[i]);
        for (std::int64_t y = 0; y < N; ++y) {
          acc[static_cast<std::size_t>(y)] +=
              a * twiddle[static_cast<std::size_t>((x * y) % N)];
        }
      }
      Label label(cur.label(order[g]).begin(), cur.label(order[g]).end());
      for (std::int64_t y = 0; y < N; ++y) {
        label[slot] = y;
        out.add(label, acc[static_cast<std::size_t>(y)] * scale);
      }
      g = e;
    }
    cur = std::move(out).build();
  }
  return cur;
}

SparseState lift_int_to_mod(const SparseState& state, std::size_t reg,
                            std::int64_t N) {
  const RegisterLayout& layout = state.layout();
  if (reg >= layout.size() || !layout.is_int(reg)) {
    throw ParameterError("lift target must be the IntRegister");
  }
  if (N < 2) throw ParameterError("modulus must be >= 2");
  std::vector<Register> regs = layout.registers();
  regs[reg] = ModRegister{N, 1};
  RegisterLayout lifted(std::move(regs));
  const std::int64_t lo = -(N / 2), hi = (N + 1) / 2 - 1;
  const auto slot = static_cast<std::size_t>(layout.offset(reg));
  Builder out(lifted);
  for (std::size_t i = 0; i < state.size(); ++i) {
    Label label(state.label(i).begin(), state.label(i).end());
    if (label[slot] < lo || label[slot] > hi) {
      throw PreconditionError("IntRegister support exceeds the liftable range");
    }
    label[slot] = mod(label[slot], N);
    out.add(label, state.amplitude(i));
  }
  return std::move(out).build();
}

std::vector<std::pair<Label, double>> marginal(const SparseState& state,
                                               std::size_t reg) {
  std::map<Label, double> m;
  for (std::size_t i = 0; i < state.size(); ++i) {
    m[state.register_value(i, reg)] += std::norm(state.amplitude(i));
  }
  return {m.begin(), m.end()};
}

namespace {

MeasurementOutcome measure_by(const SparseState& state,
                              const std::function<Label(std::size_t)>& key,
                              Rng& rng) {
  std::map<Label, double> m;
  std::vector<Label> keys(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    keys[i] = key(i);
    m[keys[i]] += std::norm(state.amplitude(i));
  }
  const double u = uniform_unit(rng);
  double acc = 0;
  auto chosen = std::prev(m.end());
  for (auto it = m.begin(); it != m.end(); ++it) {
    acc += it->second;
    if (u < acc) {
      chosen = it;
      break;
    }
  }
  Builder out(state.layout());
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (keys[i] == chosen->first) out.add(state.label(i), state.amplitude(i));
  }
  return {chosen->first, chosen->second, std::move(out).build()};
}

}  // namespace

MeasurementOutcome measure(const SparseState& state, std::size_t reg, Rng& rng) {
  if (reg >= state.layout().size()) throw ParameterError("no such register");
  return measure_by(
      state, [&](std::size_t i) { return state.register_value(i, reg); }, rng);
}

MeasurementOutcome measure_derived(const SparseState& state,
                                   const std::function<Label(LabelView)>& f,
                                   Rng& rng) {
  return measure_by(
      state, [&](std::size_t i) { return f(state.label(i)); }, rng);
}

std::optional<std::pair<SparseState, double>> project(
    const SparseState& state, const std::function<bool(LabelView)>& keep) {
  Builder out(state.layout());
  double mass = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (!keep(state.label(i))) continue;
    out.add(state.label(i), state.amplitude(i));
    mass += std::norm(state.amplitude(i));
  }
  if (out.amps.empty() || !(mass > 0)) return std::nullopt;
  return std::make_pair(std::move(out).build(), mass);
}

SparseState apply_classical(const SparseState& state,
                            const std::function<Label(LabelView)>& f,
                            const std::vector<std::size_t>& sources,
                            std::size_t target, ClassicalMode mode) {
  const RegisterLayout& layout = state.layout();
  if (target >= layout.size()) throw ParameterError("no such target register");
  for (std::size_t s : sources) {
    if (s >= layout.size() || s == target) {
      throw ParameterError("sources must be distinct from the target");
    }
  }
  const int toff = layout.offset(target);
  const int tar = layout.arity(target);
  Builder out(layout);
  Label src;
  for (std::size_t i = 0; i < state.size(); ++i) {
    LabelView l = state.label(i);
    src.clear();
    for (std::size_t s : sources) {
      const int off = layout.offset(s);
      src.insert(src.end(), l.begin() + off, l.begin() + off + layout.arity(s));
    }
    Label value = f(src);
    if (static_cast<int>(value.size()) != tar) {
      throw ParameterError("classical function returned the wrong arity");
    }
    if (!layout.is_int(target)) {
      for (std::int64_t& v : value) v = mod(v, layout.modulus(target));
    }
    Label label(l.begin(), l.end());
    const bool is_zero = std::all_of(l.begin() + toff, l.begin() + toff + tar,
                                     [](std::int64_t v) { return v == 0; });
    if (mode == ClassicalMode::kWrite) {
      if (!is_zero) throw PreconditionError("write target is not |0>");
      std::copy(value.begin(), value.end(), label.begin() + toff);
    } else {
      if (!std::equal(value.begin(), value.end(), l.begin() + toff)) {
        throw ConsistencyError("uncompute target does not hold f(sources)");
      }
      std::fill(label.begin() + toff, label.begin() + toff + tar, 0);
    }
    out.add(label, state.amplitude(i));
  }
  return std::move(out).build();
}

SparseState apply_bijection(const SparseState& state, const RegisterLayout& layout,
                            const std::function<Label(LabelView)>& f) {
  Builder out(layout);
  for (std::size_t i = 0; i < state.size(); ++i) {
    Label label = f(state.label(i));
    if (!layout.contains(label)) throw PreconditionError("relabel leaves the layout");
    out.add(label, state.amplitude(i));
  }
  const std::size_t before = out.amps.size();
  SparseState result = std::move(out).build();
  // Inputs are already pruned, so a smaller support means two labels merged.
  if (result.size() != before) {
    throw PreconditionError("relabeling is not injective on the support");
  }
  return result;
}

SparseState append_register(const SparseState& state, const Register& reg) {
  std::vector<Register> regs = state.layout().registers();
  regs.push_back(reg);
  RegisterLayout layout(std::move(regs));
  const int extra = layout.arity(layout.size() - 1);
  Builder out(layout);
  for (std::size_t i = 0; i < state.size(); ++i) {
    Label label(state.label(i).begin(), state.label(i).end());
    label.insert(label.end(), static_cast<std::size_t>(extra), 0);
    out.add(label, state.amplitude(i));
  }
  return std::move(out).build();
}

SparseState drop_register(const SparseState& state, std::size_t reg) {
  const RegisterLayout& layout = state.layout();
  if (reg >= layout.size()) throw ParameterError("no such register");
  const Label first = state.register_value(0, reg);
  std::vector<Register> regs = layout.registers();
  regs.erase(regs.begin() + static_cast<std::ptrdiff_t>(reg));
  RegisterLayout smaller(std::move(regs));
  const int off = layout.offset(reg), ar = layout.arity(reg);
  Builder out(smaller);
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.register_value(i, reg) != first) {
      throw PreconditionError("register is entangled with the rest of the state");
    }
    LabelView l = state.label(i);
    Label label(l.begin(), l.begin() + off);
    label.insert(label.end(), l.begin() + off + ar, l.end());
    out.add(label, state.amplitude(i));
  }
  return std::move(out).build();
}

ResampleResult rejection_resample(const SparseState& state,
                                  const std::function<double(LabelView)>& p,
                                  Rng& rng) {
  std::vector<double> weights(state.size());
  double accept = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double pk = p(state.label(i));
    const double pi = std::abs(state.amplitude(i));
    if (pk < 0 || pk > pi * (1 + 1e-12) + 1e-15) {
      throw PreconditionError("target weight exceeds the current amplitude");
    }
    weights[i] = pk;
    accept += pk * pk;
  }
  accept = std::min(accept, 1.0);
  if (!(uniform_unit(rng) < accept)) return {false, accept, std::nullopt};
  Builder out(state.layout());
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (weights[i] == 0) continue;
    const Amplitude a = state.amplitude(i);
    out.add(state.label(i), weights[i] * (a / std::abs(a)));
  }
  return {true, accept, std::move(out).build()};
}

double l2_distance(const SparseState& a, const SparseState& b) {
  if (!(a.layout() == b.layout())) throw ParameterError("layout mismatch");
  // <a, b> over the common support.
  Amplitude ip = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (label_less(a.label(i), b.label(j))) {
      ++i;
    } else if (label_less(b.label(j), a.label(i))) {
      ++j;
    } else {
      ip += std::conj(a.amplitude(i)) * b.amplitude(j);
      ++i;
      ++j;
    }
  }
  // Align b to a with the phase that maximizes Re<a, e^{i t} b>, then sum
  // squared differences termwise so small distances keep their precision.
  const Amplitude phase = std::abs(ip) > 0 ? std::conj(ip) / std::abs(ip) : 1.0;
  double sq = 0;
  i = j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && label_less(a.label(i), b.label(j)))) {
      sq += std::norm(a.amplitude(i++));
    } else if (i >= a.size() || label_less(b.label(j), a.label(i))) {
      sq += std::norm(b.amplitude(j++));
    } else {
      sq += std::norm(a.amplitude(i++) - phase * b.amplitude(j++));
    }
  }
  return std::sqrt(sq);
}

std::string dump(const SparseState& state) {
  std::string out;
  char buf[96];
  for (std::size_t i = 0; i < state.size(); ++i) {
    LabelView l = state.label(i);
    out += '(';
    for (std::size_t s = 0; s < l.size(); ++s) {
      if (s) out += ',';
      out += std::to_string(l[s]);
    }
    const Amplitude a = state.amplitude(i);
    std::snprintf(buf, sizeof(buf), ") : %.15e %.15e\n", a.real(), a.imag());
    out += buf;
  }
  return out;
}

}  // namespace dihedral
