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

// Sparse statevector simulator over one bounded Z-register and any number of
// Z_N^n registers. A basis label is the concatenation of every register's
// slots; states keep their labels sorted lexicographically.

#ifndef DIHEDRAL_STATEVECTOR_HPP_
#define DIHEDRAL_STATEVECTOR_HPP_

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dihedral/core_math.hpp"
#include "dihedral/random.hpp"

namespace dihedral {

using Amplitude = std::complex<double>;
using Label = std::vector<std::int64_t>;
using LabelView = std::span<const std::int64_t>;

inline constexpr double kPruneThreshold = 1e-15;

// Labels in [-bound, bound].
struct IntRegister {
  std::int64_t bound;
  bool operator==(const IntRegister&) const = default;
};

// Labels in Z_modulus^arity.
struct ModRegister {
  std::int64_t modulus;
  int arity = 1;
  bool operator==(const ModRegister&) const = default;
};

using Register = std::variant<IntRegister, ModRegister>;

class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<Register> registers);

  std::size_t size() const { return registers_.size(); }
  const Register& operator[](std::size_t i) const { return registers_[i]; }
  const std::vector<Register>& registers() const { return registers_; }

  int width() const { return width_; }
  int offset(std::size_t reg) const { return offsets_[reg]; }
  int arity(std::size_t reg) const;
  bool is_int(std::size_t reg) const;
  std::int64_t modulus(std::size_t reg) const;

  bool contains(LabelView label) const;

  bool operator==(const RegisterLayout& o) const { return registers_ == o.registers_; }

 private:
  std::vector<Register> registers_;
  std::vector<int> offsets_;
  int width_ = 0;
};

class SparseState {
 public:
  // Sorts, merges duplicate labels, prunes tiny amplitudes and normalizes.
  // Throws PreconditionError when nothing survives.
  static SparseState from_entries(RegisterLayout layout,
                                  std::vector<std::int64_t> flat_labels,
                                  std::vector<Amplitude> amplitudes);

  const RegisterLayout& layout() const { return layout_; }
  std::size_t size() const { return amplitudes_.size(); }
  LabelView label(std::size_t i) const {
    return {labels_.data() + i * static_cast<std::size_t>(layout_.width()),
            static_cast<std::size_t>(layout_.width())};
  }
  Amplitude amplitude(std::size_t i) const { return amplitudes_[i]; }
  const std::vector<Amplitude>& amplitudes() const { return amplitudes_; }
  const std::vector<std::int64_t>& flat_labels() const { return labels_; }

  // Sum of |amplitude|^2 before the last normalization.
  double norm() const { return norm_; }

  // Amplitude of a label, zero if absent.
  Amplitude amplitude_of(LabelView label) const;

  // The slots of register `reg` in entry i.
  Label register_value(std::size_t i, std::size_t reg) const;

 private:
  SparseState(RegisterLayout layout, std::vector<std::int64_t> labels,
              std::vector<Amplitude> amps, double norm)
      : layout_(std::move(layout)), labels_(std::move(labels)),
        amplitudes_(std::move(amps)), norm_(norm) {}

  RegisterLayout layout_;
  std::vector<std::int64_t> labels_;
  std::vector<Amplitude> amplitudes_;
  double norm_ = 1.0;
};

enum class Direction { kForward, kInverse };
enum class ClassicalMode { kWrite, kUncompute };

struct MeasurementOutcome {
  Label value;
  double probability;
  SparseState collapsed;
};

struct ResampleResult {
  bool accepted;
  double accept_probability;  // ||p||^2
  std::optional<SparseState> state;  // present iff accepted
};

SparseState prepare_basis(const RegisterLayout& layout, LabelView label);

// Register 0 (an IntRegister) carries amplitudes proportional to `weight`
// over its truncated window; every other register is |0>.
SparseState prepare_weighted(const RegisterLayout& layout, const WeightFn& weight);

SparseState qft_mod(const SparseState& state, std::size_t reg, Direction dir);

// Reinterprets the IntRegister at `reg` as Z_N.
SparseState lift_int_to_mod(const SparseState& state, std::size_t reg,
                            std::int64_t N);

// Exact Born marginal of register `reg`, sorted by value.
std::vector<std::pair<Label, double>> marginal(const SparseState& state,
                                               std::size_t reg);

MeasurementOutcome measure(const SparseState& state, std::size_t reg, Rng& rng);

// Measures a register that is a classical function of the stored label
// without materializing it: the support is partitioned by `f`.
MeasurementOutcome measure_derived(const SparseState& state,
                                   const std::function<Label(LabelView)>& f,
                                   Rng& rng);

// Projects onto labels satisfying `keep` and renormalizes. Returns the
// projected state with its pre-projection mass, or nullopt if empty.
std::optional<std::pair<SparseState, double>> project(
    const SparseState& state, const std::function<bool(LabelView)>& keep);

// |src>|0> -> |src>|f(src)>, or the inverse for kUncompute. `f` receives the
// concatenated slots of `sources` and returns the target's slots.
SparseState apply_classical(const SparseState& state,
                            const std::function<Label(LabelView)>& f,
                            const std::vector<std::size_t>& sources,
                            std::size_t target, ClassicalMode mode);

// Relabels every support point through an injective map into `layout`.
SparseState apply_bijection(const SparseState& state, const RegisterLayout& layout,
                            const std::function<Label(LabelView)>& f);

// Appends a register initialized to |0>.
SparseState append_register(const SparseState& state, const Register& reg);

// Discards register `reg`, which must hold one value across the support.
SparseState drop_register(const SparseState& state, std::size_t reg);

// Amplitude reweighting pi_k -> p_k / ||p|| with Pr[accept] = sum p_k^2.
// The phase of each amplitude is kept, so per-label phases play the role of
// the auxiliary register.
ResampleResult rejection_resample(const SparseState& state,
                                  const std::function<double(LabelView)>& p,
                                  Rng& rng);

// min over theta of ||a - e^{i theta} b||.
double l2_distance(const SparseState& a, const SparseState& b);

// One line per support point, "label : re im", in label order.
std::string dump(const SparseState& state);

}  // namespace dihedral

#endif  // DIHEDRAL_STATEVECTOR_HPP_
