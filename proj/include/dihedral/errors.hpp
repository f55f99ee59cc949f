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

#ifndef DIHEDRAL_ERRORS_HPP_
#define DIHEDRAL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dihedral {

// Invalid argument values (non-positive widths, bad moduli, broken bounds).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Enumeration or simulation budget exceeded.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// A state or input violates an operation's precondition. Reductions treat
// this as a retry signal when it stems from a tail event.
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Uncompute found a register that does not hold the expected value.
class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dihedral

#endif  // DIHEDRAL_ERRORS_HPP_
