// Copyright 2026 The z3sim Authors
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


#pragma once

#include <stdexcept>
#include <string>

namespace z3sim {

// Coherent-state amplitude too large for the Fock cutoff. Carries the
// probability weight that falls outside the truncated space.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double tail_weight)
      : std::runtime_error(what), tail_weight_(tail_weight) {}
  double tail_weight() const { return tail_weight_; }

 private:
  double tail_weight_;
};

// Iterative solver exhausted its budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), achieved_residual_(achieved_residual) {}
  double achieved_residual() const { return achieved_residual_; }

 private:
  double achieved_residual_;
};

// Interaction matrix does not commute with the ring translation.
class NotReducibleError : public std::runtime_error {
 public:
  NotReducibleError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class ChargeResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters outside the window where an effective description is valid.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace z3sim
